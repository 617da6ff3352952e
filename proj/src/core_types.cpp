#include "hrc/core_types.hpp"

#include <string>

namespace hrc {

void require_finite(const Vec3& v, const char* what)
{
    if (!v.is_finite())
        throw NonFiniteValue(std::string(what) + " has a non-finite component");
}

Vec3 unit_vector(const Vec3& from, const Vec3& to)
{
    require_finite(from, "unit_vector origin");
    require_finite(to, "unit_vector target");
    const Vec3 d = to - from;
    const double n = d.norm();
    if (n <= kDegenerateEps)
        throw DegenerateDirection("direction between coincident points is undefined");
    return d / n;
}

double distance(const Vec3& a, const Vec3& b) { return (b - a).norm(); }

int Scene::find_label(const std::string& label) const
{
    for (const auto& e : elements)
        if (e.label == label)
            return e.id;
    return -1;
}

void Scene::validate() const
{
    const double hx = table_size.x / 2.0;
    const double hy = table_size.y / 2.0;
    auto on_table = [&](const Vec3& p) {
        return p.is_finite() && std::abs(p.x) <= hx + 1e-12 && std::abs(p.y) <= hy + 1e-12 &&
               p.z >= table_height - 1e-12;
    };
    if (!on_table(destination))
        throw InvalidParameter("destination outside the table workspace");
    if (!on_table(robot_start))
        throw InvalidParameter("robot start outside the table workspace");
    if (!on_table(hand_start))
        throw InvalidParameter("hand start outside the table workspace");

    for (std::size_t i = 0; i < elements.size(); ++i)
    {
        const auto& a = elements[i];
        if (a.label.empty())
            throw InvalidParameter("element " + std::to_string(a.id) + " has an empty label");
        if (!(a.radius > 0.0))
            throw InvalidParameter("element '" + a.label + "' has a non-positive radius");
        if (!on_table(a.position))
            throw InvalidParameter("element '" + a.label + "' lies outside the table");
        for (std::size_t j = i + 1; j < elements.size(); ++j)
        {
            const auto& b = elements[j];
            if (distance(a.position, b.position) <= a.radius + b.radius)
                throw InvalidParameter("elements '" + a.label + "' and '" + b.label + "' overlap");
        }
    }
}

void ApfParams::validate() const
{
    const double all[] = {attractive_gain, attractive_length, repulsive_gain, repulsive_shape,
                          repulsive_decay, k_b,               k_c,            safety_time,
                          robot_speed,     human_speed,       max_speed,      force_gain};
    for (double v : all)
        if (!(std::isfinite(v) && v > 0.0))
            throw InvalidParameter("APF parameters must be finite and strictly positive");
    if (k_b > 1.0 || k_c > 1.0)
        throw InvalidParameter("ellipsoid shape factors k_b, k_c must lie in (0, 1]");
    if (max_speed < robot_speed)
        throw InvalidParameter("max_speed must be at least robot_speed");
}

} // namespace hrc
