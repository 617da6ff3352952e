#include "doctest.h"

#include "hrc/allocation.hpp"
#include "hrc/simulator.hpp"

#include <chrono>
#include <cmath>

using namespace hrc;
using namespace hrc::sim;

namespace {

bool same_trace(const EpisodeTrace& a, const EpisodeTrace& b)
{
    if (a.ticks.size() != b.ticks.size())
        return false;
    for (std::size_t i = 0; i < a.ticks.size(); ++i)
    {
        const auto &x = a.ticks[i], &y = b.ticks[i];
        if (!(x.hand == y.hand && x.gripper == y.gripper && x.forces.total == y.forces.total &&
              x.collision == y.collision && x.phase == y.phase && x.events == y.events))
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("scene generation is deterministic and well spaced")
{
    SimConfig c;
    const Scene a = generate_scene(c, 5), b = generate_scene(c, 5);
    REQUIRE(a.elements.size() == 13);
    for (std::size_t i = 0; i < a.elements.size(); ++i)
    {
        CHECK(a.elements[i].label == b.elements[i].label);
        CHECK(a.elements[i].position == b.elements[i].position);
    }
    for (std::size_t i = 0; i < a.elements.size(); ++i)
        for (std::size_t j = i + 1; j < a.elements.size(); ++j)
            CHECK(distance(a.elements[i].position, a.elements[j].position) >= 0.08);
    for (const auto& label : c.objective_spec.required)
        CHECK(a.find_label(label) >= 0);
    CHECK_NOTHROW(a.validate());

    // Different seeds usually give different layouts.
    const Scene other = generate_scene(c, 6);
    bool differs = false;
    for (std::size_t i = 0; i < a.elements.size(); ++i)
        differs = differs || !(a.elements[i].position == other.elements[i].position);
    CHECK(differs);
}

TEST_CASE("slots on the half circle")
{
    SimConfig c;
    const Scene s = generate_scene(c, 1);
    for (const auto& e : s.elements)
    {
        const double r = std::hypot(e.position.x - c.circle_center_x, e.position.y - c.circle_center_y);
        CHECK(r == doctest::Approx(c.circle_radius).epsilon(1e-12));
        CHECK(e.position.y >= c.circle_center_y - 1e-12);
        CHECK(e.position.z == doctest::Approx(c.object_plane()));
    }
}

TEST_CASE("too many objects for the slots")
{
    SimConfig c;
    c.n_total_objects = 14;
    CHECK_THROWS_AS(generate_scene(c, 1), SlotOverflow);
}

TEST_CASE("collision threshold")
{
    CHECK_FALSE(detect_collision({0, 0, 0}, {0.10, 0, 0}));
    CHECK(detect_collision({0, 0, 0}, {0.079, 0, 0}));
    CHECK(detect_collision({1, 2, 3}, {1, 2, 3}));
}

TEST_CASE("aggregate metrics")
{
    std::vector<EpisodeMetrics> batch(10);
    for (auto& m : batch)
        m.total_frames = 100;
    batch[2].collided_case = true;
    batch[2].collided_frames = 3;
    batch[7].collided_case = true;
    batch[7].collided_frames = 1;
    CHECK(aggregate_metrics(batch).rate_collided_cases == doctest::Approx(0.2));

    std::vector<EpisodeMetrics> clean(4);
    for (auto& m : clean)
        m.total_frames = 50;
    const auto z = aggregate_metrics(clean);
    CHECK(z.rate_collided_cases == 0.0);
    CHECK(z.rate_collided_frames == 0.0);

    std::vector<EpisodeMetrics> two(2);
    two[0].collided_case = true;
    two[0].collided_frames = 3;
    two[0].total_frames = 300;
    two[1].total_frames = 200;
    CHECK(aggregate_metrics(two).rate_collided_frames == doctest::Approx(0.006).epsilon(1e-12));

    CHECK_THROWS_AS(aggregate_metrics({}), EmptyBatch);
}

TEST_CASE("episodes are deterministic per seed and method")
{
    SimConfig c;
    c.seed = 42;
    for (auto m : {motion::Method::Baseline, motion::Method::Rapf})
    {
        c.method = m;
        const auto a = run_episode(c), b = run_episode(c);
        CHECK(same_trace(a.trace, b.trace));
        CHECK(a.metrics.completion_time == b.metrics.completion_time);
        CHECK(a.metrics.collided_frames == b.metrics.collided_frames);
    }
}

TEST_CASE("zero latency commits the allocation on the first pickup tick")
{
    SimConfig c;
    c.relevance_latency_ticks = 0;
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        c.seed = seed;
        const auto r = run_episode(c);
        long first_event = -1;
        for (const auto& t : r.trace.ticks)
            if (!t.events.empty())
            {
                first_event = t.tick;
                break;
            }
        REQUIRE(!r.trace.allocations.empty());
        CHECK(r.trace.allocations.front().tick == first_event);
        CHECK(r.trace.predictions.front().delivered_tick == first_event);
    }
}

TEST_CASE("latency delays the allocation by exactly that many ticks")
{
    SimConfig c;
    c.seed = 8;
    c.relevance_latency_ticks = 0;
    const long t0 = run_episode(c).trace.allocations.front().tick;
    c.relevance_latency_ticks = 45;
    const auto r = run_episode(c);
    CHECK(r.trace.allocations.front().tick == t0 + 45);
    CHECK(r.trace.predictions.front().issued_tick == t0);
}

TEST_CASE("paired seeds: identical hand paths, tasks and start ticks")
{
    SimConfig c;
    for (std::uint64_t seed = 0; seed < 25; ++seed)
    {
        c.seed = seed;
        c.method = motion::Method::Baseline;
        const auto b = run_episode(c);
        c.method = motion::Method::Rapf;
        const auto r = run_episode(c);

        CHECK(b.metrics.robot_start_tick == r.metrics.robot_start_tick);
        CHECK(b.metrics.robot_tasks == r.metrics.robot_tasks);
        REQUIRE(b.trace.allocations.size() == r.trace.allocations.size());
        for (std::size_t i = 0; i < b.trace.allocations.size(); ++i)
        {
            CHECK(b.trace.allocations[i].element_ids == r.trace.allocations[i].element_ids);
            CHECK(b.trace.allocations[i].solution.robot_assigned ==
                  r.trace.allocations[i].solution.robot_assigned);
        }
        const std::size_t n = std::min(b.trace.ticks.size(), r.trace.ticks.size());
        bool hands_match = true;
        for (std::size_t i = 0; i < n; ++i)
            hands_match = hands_match && b.trace.ticks[i].hand == r.trace.ticks[i].hand;
        CHECK(hands_match);
    }
}

TEST_CASE("episode invariants")
{
    SimConfig c;
    for (std::uint64_t seed = 100; seed < 140; ++seed)
    {
        c.seed = seed;
        const auto r = run_episode(c);
        const auto& m = r.metrics;
        CHECK(m.collided_case == (m.collided_frames > 0));
        CHECK(m.total_frames == static_cast<long>(r.trace.ticks.size()));
        CHECK_FALSE(m.incomplete);
        CHECK(m.robot_tasks >= 1);
        CHECK(m.provider_error.empty());

        long collided = 0;
        for (const auto& t : r.trace.ticks)
        {
            collided += t.collision;
            CHECK(t.forces.total == t.forces.attractive + t.forces.obstacle_repulsive +
                                        t.forces.virtual_repulsive);
        }
        CHECK(collided == m.collided_frames);

        // Gripper speed never exceeds the cap.
        for (std::size_t i = 1; i < r.trace.ticks.size(); ++i)
            CHECK(distance(r.trace.ticks[i].gripper, r.trace.ticks[i - 1].gripper) <=
                  c.apf.max_speed * c.dt() + 1e-12);
    }
}

TEST_CASE("human completion time matches the allocation's human time")
{
    SimConfig c;
    for (std::uint64_t seed = 200; seed < 230; ++seed)
    {
        c.seed = seed;
        const auto r = run_episode(c);
        REQUIRE(!r.trace.allocations.empty());
        const auto& a = r.trace.allocations.back();
        const double predicted = a.tick * c.dt() + a.solution.human_time;
        CHECK(std::abs(r.metrics.human_completion_time - predicted) <= c.dt() + 1e-9);
    }
}

TEST_CASE("robot tasks and the human's trips cover every required object once")
{
    SimConfig c;
    c.seed = 17;
    const auto r = run_episode(c);
    std::multiset<std::string> picked;
    for (const auto& t : r.final_script.trips)
        picked.insert(t.label);
    const auto& a = r.trace.allocations.front();
    const auto setup = generate_setup(c, c.seed);
    for (std::size_t j = 0; j < a.element_ids.size(); ++j)
        if (a.solution.robot_assigned[j])
            picked.insert(setup.scene.elements[static_cast<std::size_t>(a.element_ids[j])].label);
    for (const auto& label : c.objective_spec.required)
        CHECK(picked.count(label) == 1);
}

TEST_CASE("provider failure leaves the robot idle and the human finishes alone")
{
    SimConfig c;
    c.seed = 3;
    c.provider.kind = "http";
    c.provider.http.base_url = "http://127.0.0.1:1";
    c.provider.http.timeout_s = 1.0;
    const auto r = run_episode(c);
    CHECK_FALSE(r.metrics.provider_error.empty());
    CHECK(r.metrics.robot_tasks == 0);
    CHECK(r.trace.allocations.empty());
    CHECK_FALSE(r.metrics.incomplete);
    CHECK(r.final_script.trips.size() == c.objective_spec.required.size());
    for (const auto& t : r.trace.ticks)
        CHECK(t.gripper == r.trace.ticks.front().gripper);
}

TEST_CASE("the loop keeps ticking while a request is pending")
{
    SimConfig c;
    c.seed = 9;
    c.relevance_latency_ticks = 60;
    const auto r = run_episode(c);
    long pending = 0;
    for (const auto& t : r.trace.ticks)
        pending += t.relevance == RelevanceState::Pending;
    CHECK(pending == 60);
}

TEST_CASE("realtime pacing follows the wall clock")
{
    SimConfig c;
    c.realtime = true;
    c.tick_cap = 15;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_episode(c);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.metrics.incomplete);
    CHECK(wall >= 14 * c.dt() - 0.01);
}

TEST_CASE("batch runs preserve seed order and match single episodes")
{
    SimConfig c;
    const std::vector<std::uint64_t> seeds{4, 2, 9};
    const auto batch = run_batch(c, seeds, motion::Method::Rapf, 3);
    REQUIRE(batch.size() == 3);
    for (std::size_t i = 0; i < seeds.size(); ++i)
    {
        CHECK(batch[i].seed == seeds[i]);
        SimConfig one = c;
        one.seed = seeds[i];
        one.method = motion::Method::Rapf;
        const auto single = run_episode(one).metrics;
        CHECK(single.collided_frames == batch[i].collided_frames);
        CHECK(single.completion_time == batch[i].completion_time);
    }
}

TEST_CASE("config validation")
{
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.tick_rate = 0;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = {};
    c.n_total_objects = 2;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = {};
    c.circle_radius = 2.0;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
}
