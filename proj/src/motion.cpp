#include "hrc/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hrc::motion {

std::string_view to_string(Method m)
{
    switch (m)
    {
    case Method::Baseline:
        return "baseline";
    case Method::Rapf:
        return "rapf";
    }
    return "unknown";
}

Method parse_method(std::string_view s)
{
    if (s == "baseline")
        return Method::Baseline;
    if (s == "rapf")
        return Method::Rapf;
    throw InvalidParameter("unknown method '" + std::string(s) + "' (expected baseline|rapf)");
}

Vec3 Ellipsoid::to_local(const Vec3& p) const
{
    const Vec3 d = p - center;
    return {dot(d, axes[0]), dot(d, axes[1]), dot(d, axes[2])};
}

Vec3 Ellipsoid::to_world(const Vec3& l) const
{
    return center + axes[0] * l.x + axes[1] * l.y + axes[2] * l.z;
}

double Ellipsoid::implicit(const Vec3& p) const
{
    const Vec3 l = to_local(p);
    const double u = l.x / semi_axes[0], v = l.y / semi_axes[1], w = l.z / semi_axes[2];
    return u * u + v * v + w * w - 1.0;
}

Vec3 Ellipsoid::normal_at(const Vec3& p) const
{
    const Vec3 l = to_local(p);
    const Vec3 g{l.x / (semi_axes[0] * semi_axes[0]), l.y / (semi_axes[1] * semi_axes[1]),
                 l.z / (semi_axes[2] * semi_axes[2])};
    const Vec3 world = axes[0] * g.x + axes[1] * g.y + axes[2] * g.z;
    return unit_vector(Vec3{}, world);
}

double repulsive_magnitude(double d, const ApfParams& params)
{
    const double arg = (2.0 * d / params.repulsive_shape - 1.0) * params.repulsive_decay;
    return params.repulsive_gain / (1.0 + std::exp(arg));
}

Vec3 attractive_force(const Vec3& p_robot, const Vec3& p_goal, const ApfParams& params)
{
    const double d_g = distance(p_robot, p_goal);
    if (d_g <= kDegenerateEps)
        return {};
    const double mag = params.attractive_gain * (1.0 - std::exp(-d_g / params.attractive_length));
    return unit_vector(p_robot, p_goal) * mag;
}

Vec3 point_repulsive_force(const Vec3& p_robot, const Vec3& p_obstacle, const ApfParams& params)
{
    const Vec3 dir = unit_vector(p_obstacle, p_robot);
    return dir * repulsive_magnitude(distance(p_robot, p_obstacle), params);
}

Vec3 obstacle_repulsive_force(const Vec3& p_robot, std::span<const Element> obstacles,
                              const ApfParams& params)
{
    Vec3 f;
    for (const auto& o : obstacles)
        f += point_repulsive_force(p_robot, o.position, params);
    return f;
}

Ellipsoid build_virtual_obstacle(const Vec3& p_hand, const Vec3& p_target, const ApfParams& params)
{
    const Vec3 u = unit_vector(p_hand, p_target);
    const double a = distance(p_hand, p_target) / 2.0;

    // Coordinate axis least aligned with u; first one wins on ties.
    const double comps[3] = {std::abs(u.x), std::abs(u.y), std::abs(u.z)};
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (comps[i] < comps[k])
            k = i;
    Vec3 seed;
    (k == 0 ? seed.x : k == 1 ? seed.y : seed.z) = 1.0;
    const Vec3 v = unit_vector(Vec3{}, seed - u * dot(seed, u));
    const Vec3 w = cross(u, v);

    Ellipsoid e;
    e.center = (p_hand + p_target) * 0.5;
    e.semi_axes = {a, params.k_b * a, params.k_c * a};
    e.axes = {u, v, w};
    return e;
}

namespace {

constexpr int kMaxIterations = 100;
constexpr double kRootTolerance = 1e-12;

// Root of sum_i (e_i z_i / (t + e_i^2))^2 = 1 for strictly positive z_i,
// bracketed in [t_lo, t_hi]. The function is convex and decreasing there, so
// Newton from the left end moves monotonically toward the root; bisection
// guards against any overshoot.
template <std::size_t N>
double solve_lagrange(const std::array<double, N>& e, const std::array<double, N>& z)
{
    auto eval = [&](double t, double& deriv) {
        double f = -1.0;
        deriv = 0.0;
        for (std::size_t i = 0; i < N; ++i)
        {
            const double denom = t + e[i] * e[i];
            const double r = e[i] * z[i] / denom;
            f += r * r;
            deriv -= 2.0 * r * r / denom;
        }
        return f;
    };

    std::size_t small = 0;
    double z_norm2 = 0.0;
    double e_max = 0.0;
    for (std::size_t i = 0; i < N; ++i)
    {
        if (e[i] < e[small])
            small = i;
        z_norm2 += z[i] * z[i];
        e_max = std::max(e_max, e[i]);
    }
    double lo = -e[small] * e[small] + e[small] * z[small];
    double hi = e_max * std::sqrt(z_norm2);
    if (hi < lo)
        hi = lo;

    double t = lo;
    for (int it = 0; it < kMaxIterations; ++it)
    {
        double deriv = 0.0;
        const double f = eval(t, deriv);
        if (std::abs(f) < kRootTolerance)
            return t;
        if (f > 0.0)
            lo = std::max(lo, t);
        else
            hi = std::min(hi, t);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            return t;
        double next = (deriv < 0.0) ? t - f / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        t = next;
    }
    throw NonConvergence("ellipsoid projection did not converge in " +
                         std::to_string(kMaxIterations) + " iterations");
}

// Closest point on an ellipse with e0 >= e1 > 0 to (y0, y1), both >= 0.
std::array<double, 2> nearest_on_ellipse(double e0, double e1, double y0, double y1)
{
    if (y1 > 0.0)
    {
        if (y0 > 0.0)
        {
            const std::array<double, 2> e{e0, e1}, z{y0, y1};
            const double t = solve_lagrange(e, z);
            return {e0 * e0 * y0 / (t + e0 * e0), e1 * e1 * y1 / (t + e1 * e1)};
        }
        return {0.0, e1};
    }
    const double numer0 = e0 * y0;
    const double denom0 = e0 * e0 - e1 * e1;
    if (numer0 < denom0)
    {
        const double xde0 = numer0 / denom0;
        return {e0 * xde0, e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0))};
    }
    return {e0, 0.0};
}

// Closest point on an ellipsoid with e0 >= e1 >= e2 > 0 to y, all y_i >= 0.
std::array<double, 3> nearest_on_ellipsoid(const std::array<double, 3>& e,
                                           const std::array<double, 3>& y)
{
    if (y[2] > 0.0)
    {
        if (y[1] > 0.0)
        {
            if (y[0] > 0.0)
            {
                const double t = solve_lagrange(e, y);
                return {e[0] * e[0] * y[0] / (t + e[0] * e[0]),
                        e[1] * e[1] * y[1] / (t + e[1] * e[1]),
                        e[2] * e[2] * y[2] / (t + e[2] * e[2])};
            }
            const auto x = nearest_on_ellipse(e[1], e[2], y[1], y[2]);
            return {0.0, x[0], x[1]};
        }
        if (y[0] > 0.0)
        {
            const auto x = nearest_on_ellipse(e[0], e[2], y[0], y[2]);
            return {x[0], 0.0, x[1]};
        }
        return {0.0, 0.0, e[2]};
    }

    // y2 == 0: the nearest point may leave the plane when y is deep inside.
    const double denom0 = e[0] * e[0] - e[2] * e[2];
    const double denom1 = e[1] * e[1] - e[2] * e[2];
    const double numer0 = e[0] * y[0];
    const double numer1 = e[1] * y[1];
    if (numer0 < denom0 && numer1 < denom1)
    {
        const double xde0 = numer0 / denom0;
        const double xde1 = numer1 / denom1;
        const double discr = 1.0 - xde0 * xde0 - xde1 * xde1;
        if (discr > 0.0)
            return {e[0] * xde0, e[1] * xde1, e[2] * std::sqrt(discr)};
    }
    const auto x = nearest_on_ellipse(e[0], e[1], y[0], y[1]);
    return {x[0], x[1], 0.0};
}

} // namespace

Projection closest_point_on_ellipsoid(const Ellipsoid& e, const Vec3& p)
{
    require_finite(p, "projection query");
    const Vec3 local = e.to_local(p);
    const std::array<double, 3> coords{local.x, local.y, local.z};

    // Sort axes by decreasing semi-axis length and fold into the first octant.
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return e.semi_axes[i] > e.semi_axes[j]; });
    std::array<double, 3> es{}, ys{};
    for (int k = 0; k < 3; ++k)
    {
        es[k] = e.semi_axes[order[k]];
        ys[k] = std::abs(coords[order[k]]);
    }
    const auto xs = nearest_on_ellipsoid(es, ys);

    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k)
        out[order[k]] = std::copysign(xs[k], coords[order[k]]);

    Projection r;
    r.point = e.to_world({out[0], out[1], out[2]});
    r.inside = e.implicit(p) < 0.0;
    r.distance = r.inside ? 0.0 : distance(p, r.point);
    return r;
}

double proximity_scale_raw(const Vec3& p_c, const Vec3& p_hand, const Vec3& p_target,
                           const ApfParams& params)
{
    const Vec3 u = unit_vector(p_hand, p_target);
    const double horizon = (params.human_speed + params.robot_speed) * params.safety_time;
    return 1.0 - dot(p_c - p_hand, u) / horizon;
}

double proximity_scale(const Vec3& p_c, const Vec3& p_hand, const Vec3& p_target,
                       const ApfParams& params)
{
    return std::clamp(proximity_scale_raw(p_c, p_hand, p_target, params), 0.0, 1.0);
}

VirtualRepulsion virtual_repulsion(const Vec3& p_robot, const Ellipsoid& e, const Vec3& p_hand,
                                   const Vec3& p_target, const ApfParams& params)
{
    VirtualRepulsion out;
    out.projection = closest_point_on_ellipsoid(e, p_robot);
    out.k_r_raw = proximity_scale_raw(out.projection.point, p_hand, p_target, params);
    out.k_r = std::clamp(out.k_r_raw, 0.0, 1.0);
    if (out.k_r == 0.0)
        return out;
    const Vec3 normal = e.normal_at(out.projection.point);
    out.force = normal * (out.k_r * repulsive_magnitude(out.projection.distance, params));
    return out;
}

ForceBreakdown total_force(const Vec3& attractive, const Vec3& obstacle_repulsive,
                           const Vec3& virtual_repulsive)
{
    ForceBreakdown b{attractive, obstacle_repulsive, virtual_repulsive, {}};
    b.total = (attractive + obstacle_repulsive) + virtual_repulsive;
    return b;
}

ForceEvaluation compute_forces(const ForceInputs& in, const ApfParams& params)
{
    const Vec3 f_a = attractive_force(in.robot, in.goal, params);
    const Vec3 f_ro = obstacle_repulsive_force(in.robot, in.obstacles, params);

    ForceEvaluation out;
    Vec3 f_rv;
    if (in.hand)
    {
        const bool moving = in.hand_target && distance(*in.hand, *in.hand_target) > kDegenerateEps;
        if (in.method == Method::Rapf && moving)
        {
            const Ellipsoid e = build_virtual_obstacle(*in.hand, *in.hand_target, params);
            const auto v = virtual_repulsion(in.robot, e, *in.hand, *in.hand_target, params);
            f_rv = v.force;
            out.k_r = v.k_r;
            out.k_r_raw = v.k_r_raw;
        }
        else
        {
            f_rv = point_repulsive_force(in.robot, *in.hand, params);
        }
    }
    out.forces = total_force(f_a, f_ro, f_rv);
    return out;
}

Vec3 step_robot(const Vec3& p_robot, const Vec3& f_total, double dt, const ApfParams& params)
{
    if (!(dt > 0.0))
        throw InvalidParameter("time step must be positive");
    const double mag = f_total.norm();
    if (mag <= kDegenerateEps)
        return p_robot;
    const double speed = std::min(params.max_speed, params.force_gain * mag);
    return p_robot + f_total * (speed * dt / mag);
}

} // namespace hrc::motion
