#pragma once

#include "hrc/allocation.hpp"
#include "hrc/core_types.hpp"
#include "hrc/human_model.hpp"
#include "hrc/motion.hpp"
#include "hrc/provider.hpp"
#include "hrc/relevance.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hrc::sim {

HRC_DEFINE_ERROR(SlotOverflow);
HRC_DEFINE_ERROR(EmptyBatch);

struct ObjectiveSpec
{
    std::string objective{"making cereals"};
    std::vector<std::string> required{"cereal", "bowl", "milk", "spoon"};
};

struct ProviderConfig
{
    std::string kind{"mock"}; // mock | http
    std::string rules_path;   // mock: empty means rules derived from the objective
    relevance::HttpProviderConfig http;
};

struct SimConfig
{
    double tick_rate{30.0};
    Vec3 table_size{1.80, 0.76, 0.06};
    double table_height{0.73};
    double circle_radius{0.60};
    double circle_center_x{0.0};
    double circle_center_y{-0.30};
    int slot_count{13};
    double object_diameter{0.08};
    ObjectiveSpec objective_spec;
    std::vector<std::string> distractor_pool{
        "plate", "cup",   "knife",  "fork",   "pan",   "kettle", "toaster", "jam",   "butter",
        "bread", "sugar", "teapot", "glass",  "apple", "banana", "napkin",  "egg",   "ladle"};
    int n_total_objects{13};
    long relevance_latency_ticks{30};
    motion::Method method{motion::Method::Rapf};
    std::uint64_t seed{0};
    ApfParams apf;
    double d_h{0.5}; // seconds the hand waits at home before its first trip
    double dwell{0.0};
    double hand_height_offset{0.04};
    double goal_tolerance{0.02};
    double gripper_radius{0.04};
    double hand_radius{0.04};
    long tick_cap{3600};
    Vec3 destination{-0.75, 0.0, 0.0};  // z is replaced by the object plane
    Vec3 robot_start{0.80, 0.0, 0.0};   // z is replaced by the object plane
    std::string env_label{"kitchen"};
    ProviderConfig provider;
    bool realtime{false};

    double dt() const { return 1.0 / tick_rate; }
    double object_plane() const { return table_height + object_diameter / 2.0; }
    void validate() const;
};

/// A generated scene plus the element the human reaches for first.
struct EpisodeSetup
{
    Scene scene;
    int first_intent{0};
};

/// Objects on uniformly spaced half-circle slots chosen by a seeded permutation.
Scene generate_scene(const SimConfig& config, std::uint64_t seed);
EpisodeSetup generate_setup(const SimConfig& config, std::uint64_t seed);

bool detect_collision(const Vec3& p_gripper, const Vec3& p_hand, double radius_gripper = 0.04,
                      double radius_hand = 0.04);

enum class RobotPhase
{
    Waiting,
    ToObject,
    ToDestination,
    Done,
};
std::string_view to_string(RobotPhase p);

enum class RelevanceState
{
    None,
    Pending,
    Delivered,
    Failed,
};
std::string_view to_string(RelevanceState s);

struct TickRecord
{
    long tick{0};
    Vec3 hand;
    bool hand_present{true};
    Vec3 gripper;
    motion::ForceBreakdown forces;
    double k_r_raw{1.0};
    bool collision{false};
    RobotPhase phase{RobotPhase::Waiting};
    RelevanceState relevance{RelevanceState::None};
    std::vector<std::string> events;
};

struct AllocationRecord
{
    long tick{0};
    double human_delay{0.0};
    std::vector<int> element_ids;
    allocation::Solution solution;
};

struct EpisodeMetrics
{
    std::uint64_t seed{0};
    motion::Method method{motion::Method::Rapf};
    bool collided_case{false};
    long collided_frames{0};
    long total_frames{0};
    double completion_time{0.0};
    double robot_path_length{0.0};
    bool incomplete{false}; // tick cap reached
    double human_completion_time{-1.0};
    long robot_start_tick{-1};
    int robot_tasks{0};
    std::string provider_error;
};

struct EpisodeTrace
{
    std::vector<TickRecord> ticks;
    std::vector<AllocationRecord> allocations;
    std::vector<relevance::RelevanceResult> predictions;
};

struct EpisodeResult
{
    EpisodeTrace trace;
    EpisodeMetrics metrics;
    human::HandScript final_script;
};

/// Builds the relevance provider named in the config.
std::shared_ptr<relevance::Provider> make_provider(const SimConfig& config);

/// Runs one episode on the scene generated from config.seed.
EpisodeResult run_episode(const SimConfig& config);
/// Runs one episode on a given setup (replay).
EpisodeResult run_episode(const SimConfig& config, const EpisodeSetup& setup);
EpisodeResult run_episode(const SimConfig& config, const EpisodeSetup& setup,
                          std::shared_ptr<relevance::Provider> provider);

struct MetricsSummary
{
    std::size_t episodes{0};
    double rate_collided_cases{0.0};
    double rate_collided_frames{0.0};
    double mean_completion_time{0.0};
    double mean_path_length{0.0};
    std::size_t incomplete{0};
};

MetricsSummary aggregate_metrics(const std::vector<EpisodeMetrics>& batch);

/// Runs one episode per seed for the given method, in seed order.
/// Episodes are independent and may run on `threads` workers.
std::vector<EpisodeMetrics> run_batch(const SimConfig& config,
                                      const std::vector<std::uint64_t>& seeds,
                                      motion::Method method, unsigned threads = 0);

} // namespace hrc::sim
