#pragma once

#include "hrc/core_types.hpp"

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace hrc::motion {

HRC_DEFINE_ERROR(NonConvergence);

enum class Method
{
    Baseline, // hand treated as a point obstacle
    Rapf,     // hand treated as an ellipsoid spanning its current position and target
};

std::string_view to_string(Method m);
/// Accepts "baseline" or "rapf"; throws InvalidParameter otherwise.
Method parse_method(std::string_view s);

/// Virtual obstacle built from the hand position and its predicted target.
struct Ellipsoid
{
    Vec3 center;
    std::array<double, 3> semi_axes{1.0, 1.0, 1.0}; // a (major), b, c
    std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};

    Vec3 to_local(const Vec3& p) const;
    Vec3 to_world(const Vec3& local) const;
    /// x^2/a^2 + y^2/b^2 + z^2/c^2 - 1 for a world point.
    double implicit(const Vec3& p) const;
    /// Outward unit normal at a world point (gradient of the implicit function).
    Vec3 normal_at(const Vec3& p) const;
};

struct Projection
{
    Vec3 point;
    double distance{0.0};
    bool inside{false};
};

struct ForceBreakdown
{
    Vec3 attractive;
    Vec3 obstacle_repulsive;
    Vec3 virtual_repulsive;
    Vec3 total;
};

/// Sigmoid repulsion law shared by physical and virtual obstacles.
double repulsive_magnitude(double d, const ApfParams& params);

Vec3 attractive_force(const Vec3& p_robot, const Vec3& p_goal, const ApfParams& params);

/// Sum of sigmoid repulsions from every obstacle, measured center-to-center.
/// Throws DegenerateDirection if the robot sits on an obstacle center.
Vec3 obstacle_repulsive_force(const Vec3& p_robot, std::span<const Element> obstacles,
                              const ApfParams& params);

/// Repulsion of a single point obstacle (the baseline hand model).
Vec3 point_repulsive_force(const Vec3& p_robot, const Vec3& p_obstacle, const ApfParams& params);

/// Ellipsoid whose major axis runs from the hand to its target.
/// b = k_b * a and c = k_c * a. The minor-axis frame is completed from the
/// coordinate axis least aligned with the major axis.
Ellipsoid build_virtual_obstacle(const Vec3& p_hand, const Vec3& p_target, const ApfParams& params);

/// Nearest point on the ellipsoid surface. Interior points report distance 0.
Projection closest_point_on_ellipsoid(const Ellipsoid& e, const Vec3& p);

/// Unclamped proximity scale; may be negative beyond the safety horizon.
double proximity_scale_raw(const Vec3& p_c, const Vec3& p_hand, const Vec3& p_target,
                           const ApfParams& params);

/// Proximity scale clamped to [0, 1].
double proximity_scale(const Vec3& p_c, const Vec3& p_hand, const Vec3& p_target,
                       const ApfParams& params);

struct VirtualRepulsion
{
    Vec3 force;
    Projection projection;
    double k_r{1.0};
    double k_r_raw{1.0};
};

VirtualRepulsion virtual_repulsion(const Vec3& p_robot, const Ellipsoid& e, const Vec3& p_hand,
                                   const Vec3& p_target, const ApfParams& params);

inline Vec3 virtual_repulsive_force(const Vec3& p_robot, const Ellipsoid& e, const Vec3& p_hand,
                                    const Vec3& p_target, const ApfParams& params)
{
    return virtual_repulsion(p_robot, e, p_hand, p_target, params).force;
}

/// F_t = F_a + F_ro + F_rv, summed in that order.
ForceBreakdown total_force(const Vec3& attractive, const Vec3& obstacle_repulsive,
                           const Vec3& virtual_repulsive);

/// Everything the robot needs to evaluate its force field for one tick.
struct ForceInputs
{
    Method method{Method::Rapf};
    Vec3 robot;
    Vec3 goal;
    std::span<const Element> obstacles;
    std::optional<Vec3> hand;        // absent once the hand has left the workspace
    std::optional<Vec3> hand_target; // absent while the hand is stationary
};

struct ForceEvaluation
{
    ForceBreakdown forces;
    double k_r{1.0};
    double k_r_raw{1.0};
};

/// Full force evaluation. In Rapf mode a stationary hand (no target, or
/// target within kDegenerateEps) degrades to the point-obstacle model.
ForceEvaluation compute_forces(const ForceInputs& in, const ApfParams& params);

/// Moves along the force direction at min(max_speed, force_gain * |F|).
Vec3 step_robot(const Vec3& p_robot, const Vec3& f_total, double dt, const ApfParams& params);

} // namespace hrc::motion
