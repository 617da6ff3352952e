// Independent reference implementations used by the unit and acceptance tests.
// None of these call into the library code they check.
#pragma once

#include "hrc/allocation.hpp"
#include "hrc/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

inline double dist(const hrc::Vec3& a, const hrc::Vec3& b)
{
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Walks the robot and the human through their task lists leg by leg and
// returns when each of them is done.
struct Timeline
{
    double robot{0.0};
    double human{0.0};
    double makespan() const { return std::max(robot, human); }
};

inline Timeline simulate_timeline(const hrc::allocation::Instance& inst, unsigned robot_mask,
                                  std::size_t first)
{
    const auto& p = inst.element_positions;
    Timeline tl;

    hrc::Vec3 at = inst.robot_start;
    auto walk = [&](const hrc::Vec3& to) {
        tl.robot += dist(at, to) / inst.robot_speed;
        at = to;
    };
    walk(p[first]);
    walk(inst.destination);
    for (std::size_t j = 0; j < p.size(); ++j)
    {
        if (j == first || !(robot_mask & (1u << j)))
            continue;
        walk(p[j]);
        walk(inst.destination);
    }

    tl.human = inst.human_delay;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (!(robot_mask & (1u << j)))
            tl.human += (dist(inst.destination, p[j]) + dist(p[j], inst.destination)) /
                        inst.human_speed;
    return tl;
}

// Minimum makespan over every feasible (assignment, first task) pair.
inline double best_makespan(const hrc::allocation::Instance& inst)
{
    const std::size_t n = inst.element_positions.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask)
        for (std::size_t f = 0; f < n; ++f)
            if (mask & (1u << f))
                best = std::min(best, simulate_timeline(inst, mask, f).makespan());
    return best;
}

// Dense parametric sampling of the ellipsoid surface on a theta/phi grid.
struct SurfaceGrid
{
    std::vector<double> ux, uy, uz; // unit-sphere samples

    explicit SurfaceGrid(int n_theta, int n_phi)
    {
        for (int i = 0; i < n_theta; ++i)
        {
            const double th = std::numbers::pi * (i + 0.5) / n_theta;
            for (int k = 0; k < n_phi; ++k)
            {
                const double ph = 2.0 * std::numbers::pi * k / n_phi;
                ux.push_back(std::cos(th));
                uy.push_back(std::sin(th) * std::cos(ph));
                uz.push_back(std::sin(th) * std::sin(ph));
            }
        }
    }

    std::size_t size() const { return ux.size(); }

    // Smallest distance from a local-frame point to the sampled surface.
    double min_distance_local(double a, double b, double c, const hrc::Vec3& q) const
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ux.size(); ++i)
        {
            const double dx = a * ux[i] - q.x, dy = b * uy[i] - q.y, dz = c * uz[i] - q.z;
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        return std::sqrt(best);
    }
};

// Angle between two non-zero vectors, robust near zero.
inline double angle_between(const hrc::Vec3& u, const hrc::Vec3& v)
{
    const hrc::Vec3 c = hrc::cross(u, v);
    return std::atan2(c.norm(), hrc::dot(u, v));
}

} // namespace oracle
