#include "hrc/allocation.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>

namespace hrc::allocation {

namespace {

void validate_instance(const Instance& instance)
{
    if (!(instance.robot_speed > 0.0) || !(instance.human_speed > 0.0))
        throw InvalidParameter("robot and human speeds must be positive");
    if (!(instance.human_delay >= 0.0))
        throw InvalidParameter("human start-up delay must be non-negative");
}

void check_binary(const std::vector<int>& v, const char* name)
{
    for (int b : v)
        if (b != 0 && b != 1)
            throw InvalidParameter(std::string(name) + " must be a binary vector");
}

} // namespace

std::size_t Solution::robot_task_count() const
{
    return static_cast<std::size_t>(std::count(robot_assigned.begin(), robot_assigned.end(), 1));
}

std::size_t Solution::first_index() const
{
    return static_cast<std::size_t>(std::find(first_task.begin(), first_task.end(), 1) -
                                    first_task.begin());
}

double robot_time(const Instance& instance, const std::vector<int>& x, const std::vector<int>& y)
{
    validate_instance(instance);
    const std::size_t n = instance.element_positions.size();
    if (x.size() != n || y.size() != n)
        throw ShapeMismatch("x and y must have one entry per element");
    check_binary(x, "x");
    check_binary(y, "y");

    int first_count = 0;
    for (std::size_t j = 0; j < n; ++j)
    {
        first_count += y[j];
        if (y[j] > x[j])
            throw InvalidFirstTask("the first task must be assigned to the robot");
    }
    if (first_count != 1)
        throw InvalidFirstTask("exactly one first task is required");

    const auto& p_d = instance.destination;
    const auto& p_r0 = instance.robot_start;
    double t = 0.0;
    for (std::size_t j = 0; j < n; ++j)
    {
        const auto& p_e = instance.element_positions[j];
        t += y[j] * (distance(p_r0, p_e) + distance(p_e, p_d)) / instance.robot_speed;
        t += x[j] * (1 - y[j]) * (2.0 * distance(p_d, p_e)) / instance.robot_speed;
    }
    return t;
}

double human_time(const Instance& instance, const std::vector<int>& x)
{
    validate_instance(instance);
    const std::size_t n = instance.element_positions.size();
    if (x.size() != n)
        throw ShapeMismatch("x must have one entry per element");
    check_binary(x, "x");

    double t = instance.human_delay;
    for (std::size_t j = 0; j < n; ++j)
        t += (1 - x[j]) * (2.0 * distance(instance.destination, instance.element_positions[j])) /
             instance.human_speed;
    return t;
}

Solution solve(const Instance& instance)
{
    validate_instance(instance);
    const std::size_t n = instance.element_positions.size();
    if (n == 0)
        throw Infeasible("no elements: the robot cannot be given a first task");
    if (n > kMaxElements)
        throw InstanceTooLarge("exhaustive allocation supports at most " +
                               std::to_string(kMaxElements) + " elements, got " +
                               std::to_string(n));

    // Per-element costs, so each (x, y) pair is evaluated in O(1) per bit.
    std::vector<double> round_trip_robot(n), round_trip_human(n), first_trip_robot(n);
    for (std::size_t j = 0; j < n; ++j)
    {
        const auto& p_e = instance.element_positions[j];
        const double to_dest = distance(instance.destination, p_e);
        round_trip_robot[j] = 2.0 * to_dest / instance.robot_speed;
        round_trip_human[j] = 2.0 * to_dest / instance.human_speed;
        first_trip_robot[j] =
            (distance(instance.robot_start, p_e) + distance(p_e, instance.destination)) /
            instance.robot_speed;
    }

    struct Best
    {
        double z;
        int count;
        std::size_t first;
        std::uint32_t mask;
        double t_r;
        double t_h;
    };
    Best best{0.0, 0, 0, 0, 0.0, 0.0};
    bool have_best = false;

    const std::uint32_t full = (std::uint32_t{1} << n) - 1;
    for (std::uint32_t mask = 1; mask <= full; ++mask)
    {
        double shared = 0.0;
        double t_h = instance.human_delay;
        for (std::size_t j = 0; j < n; ++j)
        {
            if (mask & (std::uint32_t{1} << j))
                shared += round_trip_robot[j];
            else
                t_h += round_trip_human[j];
        }
        const int count = std::popcount(mask);
        for (std::size_t j = 0; j < n; ++j)
        {
            if (!(mask & (std::uint32_t{1} << j)))
                continue;
            const double t_r = shared - round_trip_robot[j] + first_trip_robot[j];
            const double z = std::max(t_r, t_h);
            const bool better =
                !have_best || z < best.z ||
                (z == best.z && (count < best.count || (count == best.count && j < best.first)));
            if (better)
            {
                best = {z, count, j, mask, t_r, t_h};
                have_best = true;
            }
        }
    }

    Solution s;
    s.robot_assigned.assign(n, 0);
    s.first_task.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j)
        s.robot_assigned[j] = (best.mask >> j) & 1u;
    s.first_task[best.first] = 1;
    // Report the closed-form times for the chosen pair.
    s.robot_time = robot_time(instance, s.robot_assigned, s.first_task);
    s.human_time = human_time(instance, s.robot_assigned);
    s.makespan = std::max(s.robot_time, s.human_time);
    return s;
}

} // namespace hrc::allocation
