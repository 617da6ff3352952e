#include "hrc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <thread>

namespace hrc::sim {

namespace {

// Rejection sampling keeps draws unbiased and identical across standard libraries.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n)
{
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do
        v = rng();
    while (v >= limit);
    return static_cast<std::size_t>(v % bound);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng)
{
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[draw_index(rng, i)]);
}

Scene generate_with(const SimConfig& config, std::mt19937_64& rng)
{
    config.validate();
    const auto& required = config.objective_spec.required;
    const auto n = static_cast<std::size_t>(config.n_total_objects);
    if (config.n_total_objects > config.slot_count)
        throw SlotOverflow(std::to_string(config.n_total_objects) + " objects do not fit on " +
                           std::to_string(config.slot_count) + " slots");

    std::vector<std::string> pool;
    for (const auto& label : config.distractor_pool)
        if (std::find(required.begin(), required.end(), label) == required.end() &&
            std::find(pool.begin(), pool.end(), label) == pool.end())
            pool.push_back(label);
    const std::size_t need = n - required.size();
    if (need > pool.size())
        throw InvalidParameter("distractor pool has " + std::to_string(pool.size()) +
                               " usable labels, " + std::to_string(need) + " needed");

    std::vector<std::string> labels(required.begin(), required.end());
    for (std::size_t i = 0; i < need; ++i)
    {
        // Partial Fisher-Yates: the first `need` entries become the sample.
        std::swap(pool[i], pool[i + draw_index(rng, pool.size() - i)]);
        labels.push_back(pool[i]);
    }

    std::vector<int> slots(static_cast<std::size_t>(config.slot_count));
    for (std::size_t i = 0; i < slots.size(); ++i)
        slots[i] = static_cast<int>(i);
    shuffle(slots, rng);

    const double z = config.object_plane();
    const double step =
        config.slot_count > 1 ? std::numbers::pi / (config.slot_count - 1) : 0.0;
    const double start = config.slot_count > 1 ? 0.0 : std::numbers::pi / 2.0;

    Scene scene;
    scene.table_size = config.table_size;
    scene.table_height = config.table_height;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double theta = start + step * slots[i];
        Element e;
        e.id = static_cast<int>(i);
        e.label = labels[i];
        e.radius = config.object_diameter / 2.0;
        e.position = {config.circle_center_x + config.circle_radius * std::cos(theta),
                      config.circle_center_y + config.circle_radius * std::sin(theta), z};
        scene.elements.push_back(std::move(e));
    }
    scene.destination = {config.destination.x, config.destination.y, z};
    scene.robot_start = {config.robot_start.x, config.robot_start.y, z};
    scene.hand_start = {config.destination.x, config.destination.y,
                        config.table_height + config.hand_height_offset};
    scene.validate();
    return scene;
}

} // namespace

void SimConfig::validate() const
{
    if (!(tick_rate > 0.0))
        throw InvalidParameter("tick_rate must be positive");
    if (!(circle_radius > 0.0) || !(object_diameter > 0.0))
        throw InvalidParameter("circle radius and object diameter must be positive");
    if (objective_spec.required.empty())
        throw InvalidParameter("objective needs at least one required element");
    if (n_total_objects < static_cast<int>(objective_spec.required.size()))
        throw InvalidParameter("n_total_objects is smaller than the required element count");
    if (slot_count < 1)
        throw InvalidParameter("slot_count must be positive");
    if (slot_count > 1)
    {
        const double chord =
            2.0 * circle_radius * std::sin(std::numbers::pi / (2.0 * (slot_count - 1)));
        if (chord <= object_diameter)
            throw InvalidParameter("adjacent half-circle slots would overlap");
    }
    const double hx = table_size.x / 2.0, hy = table_size.y / 2.0;
    if (std::abs(circle_center_x) + circle_radius > hx || circle_center_y < -hy ||
        circle_center_y + circle_radius > hy)
        throw InvalidParameter("half circle does not fit on the table");
    if (relevance_latency_ticks < 0 || tick_cap <= 0)
        throw InvalidParameter("latency must be >= 0 and tick_cap > 0");
    if (!(d_h >= 0.0) || !(dwell >= 0.0) || !(goal_tolerance > 0.0))
        throw InvalidParameter("d_h, dwell must be >= 0 and goal_tolerance > 0");
    if (!(gripper_radius > 0.0) || !(hand_radius > 0.0))
        throw InvalidParameter("collision radii must be positive");
    apf.validate();
}

Scene generate_scene(const SimConfig& config, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return generate_with(config, rng);
}

EpisodeSetup generate_setup(const SimConfig& config, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    EpisodeSetup setup;
    setup.scene = generate_with(config, rng);
    // Required elements occupy the first ids.
    setup.first_intent =
        static_cast<int>(draw_index(rng, config.objective_spec.required.size()));
    return setup;
}

bool detect_collision(const Vec3& p_gripper, const Vec3& p_hand, double radius_gripper,
                      double radius_hand)
{
    if (!(radius_gripper > 0.0) || !(radius_hand > 0.0))
        throw InvalidParameter("collision radii must be positive");
    return distance(p_gripper, p_hand) < radius_gripper + radius_hand;
}

std::string_view to_string(RobotPhase p)
{
    switch (p)
    {
    case RobotPhase::Waiting:
        return "waiting";
    case RobotPhase::ToObject:
        return "to_object";
    case RobotPhase::ToDestination:
        return "to_destination";
    case RobotPhase::Done:
        return "done";
    }
    return "unknown";
}

std::string_view to_string(RelevanceState s)
{
    switch (s)
    {
    case RelevanceState::None:
        return "none";
    case RelevanceState::Pending:
        return "pending";
    case RelevanceState::Delivered:
        return "delivered";
    case RelevanceState::Failed:
        return "failed";
    }
    return "unknown";
}

std::shared_ptr<relevance::Provider> make_provider(const SimConfig& config)
{
    if (config.provider.kind == "http")
        return std::make_shared<relevance::HttpProvider>(config.provider.http);
    if (config.provider.kind != "mock")
        throw InvalidParameter("unknown provider '" + config.provider.kind +
                               "' (expected mock|http)");
    if (!config.provider.rules_path.empty())
        return std::make_shared<relevance::MockProvider>(
            relevance::load_rule_table(config.provider.rules_path));

    // One rule per required element, keyed on it being grabbed first.
    relevance::RuleTable table;
    table.env_label = config.env_label;
    for (const auto& label : config.objective_spec.required)
        table.rules.push_back({{"grabbed " + label},
                               config.objective_spec.objective,
                               config.objective_spec.required});
    return std::make_shared<relevance::MockProvider>(std::move(table));
}

namespace {

class EpisodeRunner
{
  public:
    EpisodeRunner(const SimConfig& config, const EpisodeSetup& setup,
                  std::shared_ptr<relevance::Provider> provider)
        : cfg_(config), scene_(setup.scene), worker_(std::move(provider))
    {
        const std::size_t n = scene_.elements.size();
        on_table_.assign(n, 1);
        assigned_.assign(n, 0);
        required_.assign(n, 0);
        for (const auto& label : cfg_.objective_spec.required)
            if (int id = scene_.find_label(label); id >= 0)
                required_[static_cast<std::size_t>(id)] = 1;

        const auto& first = scene_.elements.at(static_cast<std::size_t>(setup.first_intent));
        script_.home = scene_.hand_start;
        script_.speed = cfg_.apf.human_speed;
        script_.start_delay = cfg_.d_h;
        script_.dwell = cfg_.dwell;
        script_.trips.push_back({first.id, first.label, hand_point(first.position), 0.0});
        assigned_[static_cast<std::size_t>(first.id)] = 1;

        history_.env_label = cfg_.env_label;
        robot_ = scene_.robot_start;
        metrics_.seed = cfg_.seed;
        metrics_.method = cfg_.method;
    }

    EpisodeResult run()
    {
        const auto wall_start = std::chrono::steady_clock::now();
        long tick = 0;
        for (; tick < cfg_.tick_cap; ++tick)
        {
            if (cfg_.realtime)
                std::this_thread::sleep_until(
                    wall_start + std::chrono::duration<double>(tick * cfg_.dt()));

            const double t = tick * cfg_.dt();
            TickRecord rec;
            rec.tick = tick;

            consume_events(human::hand_state(script_, t), tick, rec);
            poll_relevance(tick);
            // A delivery may have extended the script; new trips never start before t.
            const auto hand = human::hand_state(script_, t);

            const bool human_done = hand.finished && relevance_resolved();
            if (human_done && metrics_.human_completion_time < 0.0)
                metrics_.human_completion_time = t;
            if (human_done && robot_tasks_done())
                break;

            rec.hand = hand.position;
            rec.hand_present = !human_done;
            rec.gripper = robot_;
            rec.collision = rec.hand_present &&
                            detect_collision(robot_, hand.position, cfg_.gripper_radius,
                                             cfg_.hand_radius);
            rec.relevance = rel_state_;
            step_robot(hand, rec);
            rec.phase = phase_;

            metrics_.collided_frames += rec.collision ? 1 : 0;
            trace_.ticks.push_back(std::move(rec));
        }

        metrics_.total_frames = static_cast<long>(trace_.ticks.size());
        metrics_.collided_case = metrics_.collided_frames > 0;
        metrics_.incomplete = tick >= cfg_.tick_cap;
        metrics_.completion_time = tick * cfg_.dt();
        metrics_.robot_path_length = path_length_;

        // Drain an unanswered request so the worker is idle before teardown.
        if (worker_.outstanding())
            worker_.wait_take();

        return {std::move(trace_), metrics_, script_};
    }

  private:
    Vec3 hand_point(const Vec3& p) const
    {
        return {p.x, p.y, cfg_.table_height + cfg_.hand_height_offset};
    }

    bool relevance_resolved() const
    {
        return rel_state_ == RelevanceState::Delivered || rel_state_ == RelevanceState::Failed;
    }

    bool robot_tasks_done() const
    {
        return phase_ == RobotPhase::Done ||
               (phase_ == RobotPhase::Waiting && relevance_resolved() && tasks_.empty());
    }

    void consume_events(const human::HandState& hand, long tick, TickRecord& rec)
    {
        for (; events_seen_ < hand.events.size(); ++events_seen_)
        {
            const auto& ev = hand.events[events_seen_];
            on_table_[static_cast<std::size_t>(ev.element_id)] = 0;
            history_.actions.push_back(ev.action);
            rec.events.push_back(ev.action);

            const std::string label = relevance::normalize_label(
                scene_.elements[static_cast<std::size_t>(ev.element_id)].label);
            const bool first_action = history_.actions.size() == 1;
            const bool unexpected = last_prediction_ && !last_prediction_->count(label);
            if ((first_action || unexpected) && !worker_.outstanding())
                submit(tick);
        }
    }

    void submit(long tick)
    {
        relevance::Query q;
        q.history = history_;
        for (const auto& e : scene_.elements)
            q.object_labels.insert(e.label);
        worker_.submit(std::move(q), tick);
        issued_tick_ = tick;
        rel_state_ = RelevanceState::Pending;
    }

    void poll_relevance(long tick)
    {
        if (!worker_.outstanding())
            return;
        std::optional<relevance::AsyncRelevanceWorker::Response> resp;
        if (cfg_.realtime)
            resp = worker_.try_take();
        else if (tick >= issued_tick_ + cfg_.relevance_latency_ticks)
            resp = worker_.wait_take();
        if (!resp)
            return;

        if (resp->result)
        {
            resp->result->issued_tick = resp->issued_tick;
            resp->result->delivered_tick = tick;
            last_prediction_ = resp->result->relevant_labels;
            trace_.predictions.push_back(*resp->result);
            rel_state_ = RelevanceState::Delivered;
            allocate(resp->result->relevant_labels, tick);
        }
        else
        {
            std::cerr << "relevance provider failed (seed " << cfg_.seed << "): " << resp->error
                      << "\n";
            if (metrics_.provider_error.empty())
                metrics_.provider_error = resp->error;
            if (rel_state_ != RelevanceState::Delivered)
                rel_state_ = RelevanceState::Failed;
        }
        hand_over_leftovers(tick);
    }

    void allocate(const std::set<std::string>& relevant, long tick)
    {
        std::vector<int> ids;
        for (const auto& e : scene_.elements)
        {
            const auto i = static_cast<std::size_t>(e.id);
            if (on_table_[i] && !assigned_[i] && relevant.count(relevance::normalize_label(e.label)))
                ids.push_back(e.id);
        }
        if (ids.empty())
            return;
        if (ids.size() > allocation::kMaxElements)
            ids.resize(allocation::kMaxElements);

        const double t = tick * cfg_.dt();
        allocation::Instance inst;
        for (int id : ids)
            inst.element_positions.push_back(scene_.elements[static_cast<std::size_t>(id)].position);
        inst.destination = scene_.destination;
        inst.robot_start = robot_;
        inst.robot_speed = cfg_.apf.robot_speed;
        inst.human_speed = cfg_.apf.human_speed;
        inst.human_delay = std::max(0.0, human::script_end_time(script_) - t);
        const auto sol = allocation::solve(inst);

        std::vector<int> robot_rest;
        int robot_first = -1;
        for (std::size_t j = 0; j < ids.size(); ++j)
        {
            const int id = ids[j];
            assigned_[static_cast<std::size_t>(id)] = 1;
            if (sol.first_task[j])
                robot_first = id;
            else if (sol.robot_assigned[j])
                robot_rest.push_back(id);
            else
                add_human_trip(id, t);
        }
        // Non-first robot tasks: nearest to the destination first.
        std::stable_sort(robot_rest.begin(), robot_rest.end(), [&](int a, int b) {
            return distance(scene_.elements[static_cast<std::size_t>(a)].position,
                            scene_.destination) <
                   distance(scene_.elements[static_cast<std::size_t>(b)].position,
                            scene_.destination);
        });
        tasks_.push_back(robot_first);
        tasks_.insert(tasks_.end(), robot_rest.begin(), robot_rest.end());

        trace_.allocations.push_back({tick, inst.human_delay, ids, sol});
        if (metrics_.robot_start_tick < 0)
            metrics_.robot_start_tick = tick;
        metrics_.robot_tasks += static_cast<int>(sol.robot_task_count());
        if (phase_ == RobotPhase::Waiting || phase_ == RobotPhase::Done)
            next_task();
    }

    // Required elements nobody has claimed go to the human.
    void hand_over_leftovers(long tick)
    {
        for (const auto& e : scene_.elements)
        {
            const auto i = static_cast<std::size_t>(e.id);
            if (required_[i] && on_table_[i] && !assigned_[i])
            {
                assigned_[i] = 1;
                add_human_trip(e.id, tick * cfg_.dt());
            }
        }
    }

    void add_human_trip(int id, double not_before)
    {
        const auto& e = scene_.elements[static_cast<std::size_t>(id)];
        script_.trips.push_back({id, e.label, hand_point(e.position), not_before});
    }

    void next_task()
    {
        if (tasks_.empty())
        {
            phase_ = RobotPhase::Done;
            current_ = -1;
            return;
        }
        current_ = tasks_.front();
        tasks_.erase(tasks_.begin());
        phase_ = RobotPhase::ToObject;
    }

    void step_robot(const human::HandState& hand, TickRecord& rec)
    {
        if (phase_ == RobotPhase::Waiting)
            return;

        Vec3 goal = scene_.robot_start; // Done: retreat out of the human's way
        if (phase_ == RobotPhase::ToObject)
            goal = scene_.elements[static_cast<std::size_t>(current_)].position;
        else if (phase_ == RobotPhase::ToDestination)
            goal = scene_.destination;

        obstacles_.clear();
        for (const auto& e : scene_.elements)
            if (on_table_[static_cast<std::size_t>(e.id)] &&
                !(phase_ == RobotPhase::ToObject && e.id == current_))
                obstacles_.push_back(e);

        motion::ForceInputs in;
        in.method = cfg_.method;
        in.robot = robot_;
        in.goal = goal;
        in.obstacles = obstacles_;
        if (rec.hand_present)
        {
            in.hand = hand.position;
            in.hand_target = hand.target;
        }
        try
        {
            const auto eval = motion::compute_forces(in, cfg_.apf);
            rec.forces = eval.forces;
            rec.k_r_raw = eval.k_r_raw;
        }
        catch (const DegenerateDirection&)
        {
            // Robot exactly on an obstacle center: no usable direction this tick.
            rec.forces = {};
        }

        const Vec3 next = motion::step_robot(robot_, rec.forces.total, cfg_.dt(), cfg_.apf);
        path_length_ += distance(robot_, next);
        robot_ = next;

        if (distance(robot_, goal) > cfg_.goal_tolerance)
            return;
        if (phase_ == RobotPhase::ToObject)
        {
            on_table_[static_cast<std::size_t>(current_)] = 0;
            rec.events.push_back("robot grabbed " +
                                 scene_.elements[static_cast<std::size_t>(current_)].label);
            phase_ = RobotPhase::ToDestination;
        }
        else if (phase_ == RobotPhase::ToDestination)
        {
            rec.events.push_back("robot placed " +
                                 scene_.elements[static_cast<std::size_t>(current_)].label);
            next_task();
        }
    }

    const SimConfig& cfg_;
    const Scene& scene_;
    relevance::AsyncRelevanceWorker worker_;

    std::vector<char> on_table_, assigned_, required_;
    human::HandScript script_;
    std::size_t events_seen_{0};
    relevance::ActionHistory history_;
    RelevanceState rel_state_{RelevanceState::None};
    long issued_tick_{0};
    std::optional<std::set<std::string>> last_prediction_;

    Vec3 robot_;
    RobotPhase phase_{RobotPhase::Waiting};
    std::vector<int> tasks_;
    int current_{-1};
    double path_length_{0.0};
    std::vector<Element> obstacles_;

    EpisodeTrace trace_;
    EpisodeMetrics metrics_;
};

} // namespace

EpisodeResult run_episode(const SimConfig& config, const EpisodeSetup& setup,
                          std::shared_ptr<relevance::Provider> provider)
{
    config.validate();
    setup.scene.validate();
    if (setup.first_intent < 0 ||
        static_cast<std::size_t>(setup.first_intent) >= setup.scene.elements.size())
        throw InvalidParameter("first intent does not name a scene element");
    EpisodeRunner runner(config, setup, std::move(provider));
    return runner.run();
}

EpisodeResult run_episode(const SimConfig& config, const EpisodeSetup& setup)
{
    return run_episode(config, setup, make_provider(config));
}

EpisodeResult run_episode(const SimConfig& config)
{
    return run_episode(config, generate_setup(config, config.seed));
}

MetricsSummary aggregate_metrics(const std::vector<EpisodeMetrics>& batch)
{
    if (batch.empty())
        throw EmptyBatch("cannot aggregate an empty batch");
    MetricsSummary s;
    s.episodes = batch.size();
    long cases = 0, frames = 0, total = 0;
    double time = 0.0, path = 0.0;
    for (const auto& m : batch)
    {
        cases += m.collided_case ? 1 : 0;
        frames += m.collided_frames;
        total += m.total_frames;
        time += m.completion_time;
        path += m.robot_path_length;
        s.incomplete += m.incomplete ? 1 : 0;
    }
    const auto n = static_cast<double>(batch.size());
    s.rate_collided_cases = cases / n;
    s.rate_collided_frames = total > 0 ? static_cast<double>(frames) / total : 0.0;
    s.mean_completion_time = time / n;
    s.mean_path_length = path / n;
    return s;
}

std::vector<EpisodeMetrics> run_batch(const SimConfig& config,
                                      const std::vector<std::uint64_t>& seeds,
                                      motion::Method method, unsigned threads)
{
    std::vector<EpisodeMetrics> out(seeds.size());
    if (seeds.empty())
        return out;
    const auto provider = make_provider(config);
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();)
        {
            try
            {
                SimConfig c = config;
                c.seed = seeds[i];
                c.method = method;
                out[i] = run_episode(c, generate_setup(c, c.seed), provider).metrics;
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < threads; ++k)
        pool.emplace_back(work);
    work();
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

} // namespace hrc::sim
