#include "hrc/human_model.hpp"

#include <algorithm>
#include <cmath>

namespace hrc::human {

void HandScript::validate() const
{
    if (!(speed > 0.0) || !std::isfinite(speed))
        throw InvalidParameter("hand speed must be positive");
    if (!(start_delay >= 0.0) || !(dwell >= 0.0))
        throw InvalidParameter("hand start delay and dwell must be non-negative");
    require_finite(home, "hand home");
    for (const auto& trip : trips)
        require_finite(trip.pickup, "hand pickup");
}

std::vector<TripTiming> trip_timings(const HandScript& script)
{
    std::vector<TripTiming> out;
    out.reserve(script.trips.size());
    double clock = script.start_delay;
    for (const auto& trip : script.trips)
    {
        TripTiming tt;
        tt.depart = std::max(clock, trip.not_before);
        const double leg = distance(script.home, trip.pickup) / script.speed;
        tt.pickup = tt.depart + leg + script.dwell;
        tt.back = tt.pickup + leg + script.dwell;
        clock = tt.back;
        out.push_back(tt);
    }
    return out;
}

double script_end_time(const HandScript& script)
{
    const auto timings = trip_timings(script);
    return timings.empty() ? script.start_delay : timings.back().back;
}

HandState hand_state(const HandScript& script, double t)
{
    script.validate();
    if (!(t >= 0.0))
        throw InvalidParameter("hand_state requires t >= 0");

    HandState s;
    s.position = script.home;
    const auto timings = trip_timings(script);

    for (std::size_t i = 0; i < timings.size(); ++i)
    {
        const auto& trip = script.trips[i];
        const auto& tt = timings[i];
        if (t >= tt.pickup)
            s.events.push_back({tt.pickup, trip.element_id, "grabbed " + trip.label});

        if (t < tt.depart || t >= tt.back)
            continue;

        s.active_trip = static_cast<int>(i);
        const double leg = distance(script.home, trip.pickup) / script.speed;
        const double arrive = tt.depart + leg;
        const double leave = tt.pickup;
        if (t < arrive)
        {
            const Vec3 dir = unit_vector(script.home, trip.pickup);
            s.position = script.home + dir * (script.speed * (t - tt.depart));
            s.velocity = dir * script.speed;
            s.target = trip.pickup;
        }
        else if (t < leave)
        {
            s.position = trip.pickup; // dwelling at the pickup
        }
        else if (t < leave + leg)
        {
            const Vec3 dir = unit_vector(trip.pickup, script.home);
            s.position = trip.pickup + dir * (script.speed * (t - leave));
            s.velocity = dir * script.speed;
            s.target = script.home;
        }
        // otherwise dwelling at home after the drop
    }
    s.finished = t >= script_end_time(script);
    return s;
}

} // namespace hrc::human
