#pragma once

#include "hrc/core_types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hrc::human {

/// One pick-and-place round trip: home -> pickup -> home.
struct Trip
{
    int element_id{0};
    std::string label;
    Vec3 pickup;
    /// Earliest departure time (s). The hand waits at home until then; 0 means
    /// the trip follows the previous one immediately.
    double not_before{0.0};
};

struct HandScript
{
    std::vector<Trip> trips;
    Vec3 home;
    double speed{0.4};       // v_h
    double start_delay{0.0}; // d_h
    double dwell{0.0};       // pause at each pickup and drop, seconds

    void validate() const;
};

struct ActionEvent
{
    double time{0.0};
    int element_id{0};
    std::string action; // "grabbed <label>"
};

struct HandState
{
    Vec3 position;
    Vec3 velocity;
    std::optional<Vec3> target; // where the hand is heading; empty while stationary
    std::vector<ActionEvent> events; // every pickup completed at or before t
    int active_trip{-1};             // trip index in progress, -1 when idle
    bool finished{false};            // all trips done
};

/// Timing of one trip, derived from the script.
struct TripTiming
{
    double depart{0.0};
    double pickup{0.0}; // pickup completion (after dwell)
    double back{0.0};   // arrival at home (after dwell)
};

std::vector<TripTiming> trip_timings(const HandScript& script);

/// Time at which the hand is back home after the last trip (start_delay if no trips).
double script_end_time(const HandScript& script);

/// Hand kinematics at time t: constant-speed straight segments with dwell pauses.
HandState hand_state(const HandScript& script, double t);

} // namespace hrc::human
