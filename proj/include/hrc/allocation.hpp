#pragma once

#include "hrc/core_types.hpp"

#include <cstddef>
#include <vector>

namespace hrc::allocation {

HRC_DEFINE_ERROR(ShapeMismatch);
HRC_DEFINE_ERROR(InvalidFirstTask);
HRC_DEFINE_ERROR(Infeasible);
HRC_DEFINE_ERROR(InstanceTooLarge);

/// Largest instance the exhaustive solver accepts.
inline constexpr std::size_t kMaxElements = 20;

struct Instance
{
    std::vector<Vec3> element_positions;
    Vec3 destination;
    Vec3 robot_start;
    double robot_speed{0.4};
    double human_speed{0.4};
    double human_delay{0.0}; // d_h, seconds until the human is free
};

struct Solution
{
    std::vector<int> robot_assigned; // x_j
    std::vector<int> first_task;     // y_j
    double robot_time{0.0};          // T_r
    double human_time{0.0};          // T_h
    double makespan{0.0};            // Z

    std::size_t robot_task_count() const;
    /// Index j with y_j = 1.
    std::size_t first_index() const;
};

/// Robot completion time: the first task starts from the robot's initial
/// position, every other task is a round trip from the destination.
double robot_time(const Instance& instance, const std::vector<int>& x, const std::vector<int>& y);

/// Human completion time: start-up delay plus a round trip per unassigned element.
double human_time(const Instance& instance, const std::vector<int>& x);

/// Exact makespan minimisation by enumerating every assignment and first task.
///
/// Ties on the makespan are broken by fewer robot tasks, then by the lowest
/// first-task index, so the result is deterministic.
Solution solve(const Instance& instance);

} // namespace hrc::allocation
