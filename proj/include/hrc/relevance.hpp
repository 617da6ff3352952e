#pragma once

#include "hrc/core_types.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hrc::relevance {

HRC_DEFINE_ERROR(InvalidRatio);
HRC_DEFINE_ERROR(MalformedResponse);
HRC_DEFINE_ERROR(NoRuleMatched);
HRC_DEFINE_ERROR(EmptyGroundTruth);
HRC_DEFINE_ERROR(EmptyHistory);
HRC_DEFINE_ERROR(FixtureError);

struct ActionHistory
{
    std::vector<std::string> actions; // e.g. "grabbed bowl"
    std::string env_label{"kitchen"};
};

struct RelevanceResult
{
    std::string objective;
    std::set<std::string> relevant_labels;
    long issued_tick{0};
    long delivered_tick{0};
};

struct GroundTruthRecord
{
    std::string gto;
    std::vector<std::string> gtp;
    std::set<std::string> gt_relevant;
};

/// Lowercase, punctuation replaced by spaces, whitespace collapsed and trimmed.
std::string normalize_label(std::string_view s);

/// Word-level match between two labels (see score_objective).
bool labels_match(std::string_view a, std::string_view b);

/// First ceil(step_ratio * |gtp|) actions.
std::vector<std::string> truncate_plan(const std::vector<std::string>& gtp, double step_ratio);

/// Scene-contextualisation prompt with an output-format instruction appended.
/// Object labels are sorted and de-duplicated, so the text is deterministic.
std::string build_prompt(const ActionHistory& history, const std::set<std::string>& object_labels);

/// Parses the structured block requested by build_prompt:
///
///     ```relevance
///     objective: making cereals
///     relevant: cereal, bowl, milk, spoon
///     ```
///
/// The fence is optional; the two keyed lines are not.
RelevanceResult parse_response(std::string_view text);

struct Rule
{
    std::vector<std::string> prefix;
    std::string objective;
    std::vector<std::string> relevant;
};

struct RuleTable
{
    std::string env_label{"kitchen"};
    std::vector<Rule> rules;
};

/// Deterministic stand-in for the language model: the rule whose action
/// prefix matches the history and is longest wins (first listed on ties).
RelevanceResult mock_predict(const ActionHistory& history, const RuleTable& rules);

/// True when the labels match after normalisation: identical once whitespace
/// is removed, or sharing at least half of the shorter label's tokens.
bool score_objective(std::string_view predicted, std::string_view gto);

/// Fraction of ground-truth labels matched by some predicted label.
double score_relevance(const std::set<std::string>& predicted, const std::set<std::string>& gt);

/// Rule table from JSON: {"env": "...", "rules": [{"prefix": [...], "objective": "...",
/// "relevant": [...]}]}.
RuleTable load_rule_table(const std::filesystem::path& path);
RuleTable parse_rule_table(std::string_view json_text);

/// Line-oriented fixtures, one record per line:
///     gto=making cereals | gtp=take bowl;pour cereals | relevant=bowl,cereal
/// Blank lines and lines starting with '#' are ignored.
std::vector<GroundTruthRecord> parse_fixtures(std::string_view text);
std::vector<GroundTruthRecord> load_fixtures(const std::filesystem::path& path);

} // namespace hrc::relevance
