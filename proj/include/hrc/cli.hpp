#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hrc::cli {

struct RunSpec
{
    std::string subcommand; // run | compare | score | replay
    std::optional<std::filesystem::path> config_path;
    std::vector<std::string> overrides; // key=value, applied on top of the config file
    std::optional<std::uint64_t> seed;
    std::optional<std::pair<std::uint64_t, std::uint64_t>> seed_range; // inclusive
    std::filesystem::path out_dir{"out"};
    std::string method{"both"};  // baseline | rapf | both
    std::optional<std::string> provider; // mock | http
    bool realtime{false};
    std::optional<long> latency_ticks;
    unsigned threads{0};
    std::filesystem::path fixtures_path; // score
    std::filesystem::path rules_path;    // score, mock provider
    std::filesystem::path scene_path;    // replay
};

/// Parses "A..B" (inclusive). Throws std::invalid_argument on malformed or empty ranges.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);

// Subcommands return a process exit code and report failures on `err`.
int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_compare(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_score(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_replay(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Full command-line entry point; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hrc::cli
