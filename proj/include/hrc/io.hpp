#pragma once

#include "hrc/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hrc::io {

HRC_DEFINE_ERROR(ConfigError);

nlohmann::json config_to_json(const sim::SimConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
sim::SimConfig config_from_json(const nlohmann::json& j);
sim::SimConfig load_config(const std::filesystem::path& path);

/// Applies "dotted.key=value" to a config document. The value is parsed as
/// JSON when possible and taken as a plain string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

nlohmann::json setup_to_json(const sim::EpisodeSetup& setup);
sim::EpisodeSetup setup_from_json(const nlohmann::json& j);
sim::EpisodeSetup load_setup(const std::filesystem::path& path);

/// Column names of the per-tick trace CSV, in order.
const std::vector<std::string>& trace_columns();
void write_trace_csv(std::ostream& out, const sim::EpisodeTrace& trace, double dt);

nlohmann::json metrics_to_json(const sim::EpisodeMetrics& m);
nlohmann::json summary_to_json(const sim::MetricsSummary& s);

void write_episode_metrics_csv(std::ostream& out, const std::vector<sim::EpisodeMetrics>& batch);

/// Serialises with fixed key order and indentation so identical inputs give
/// identical bytes.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace hrc::io
