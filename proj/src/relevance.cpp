#include "hrc/relevance.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hrc::relevance {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> tokens(std::string_view normalized)
{
    std::vector<std::string> out;
    std::istringstream in{std::string(normalized)};
    for (std::string tok; in >> tok;)
        out.push_back(tok);
    return out;
}

// Crude plural folding: "cereals" and "cereal" compare equal.
std::string stem(std::string word)
{
    if (word.size() > 3 && word.back() == 's')
        word.pop_back();
    return word;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i)
    {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

bool starts_with_key(const std::string& line, std::string_view key, std::string& value)
{
    std::string lowered;
    for (char c : line.substr(0, key.size()))
        lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lowered != key)
        return false;
    value = trim(std::string_view(line).substr(key.size()));
    return true;
}

// Extracts (objective, relevant) from a run of lines; false when either key is missing.
bool extract_fields(const std::vector<std::string>& lines, std::string& objective,
                    std::string& relevant)
{
    bool have_objective = false, have_relevant = false;
    for (const auto& raw : lines)
    {
        const std::string line = trim(raw);
        std::string value;
        if (!have_objective && starts_with_key(line, "objective:", value))
        {
            objective = value;
            have_objective = true;
        }
        else if (!have_relevant && starts_with_key(line, "relevant:", value))
        {
            relevant = value;
            have_relevant = true;
        }
    }
    return have_objective && have_relevant;
}

} // namespace

std::string normalize_label(std::string_view s)
{
    std::string out;
    bool pending_space = false;
    for (char ch : s)
    {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c))
        {
            if (pending_space && !out.empty())
                out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(c));
        }
        else
        {
            pending_space = true;
        }
    }
    return out;
}

bool labels_match(std::string_view a, std::string_view b)
{
    const auto ta = tokens(normalize_label(a));
    const auto tb = tokens(normalize_label(b));
    if (ta.empty() || tb.empty())
        return false;

    std::string ca, cb;
    for (const auto& t : ta)
        ca += t;
    for (const auto& t : tb)
        cb += t;
    if (stem(ca) == stem(cb))
        return true;

    std::set<std::string> sa, sb;
    for (const auto& t : ta)
        sa.insert(stem(t));
    for (const auto& t : tb)
        sb.insert(stem(t));
    const auto& shorter = sa.size() <= sb.size() ? sa : sb;
    const auto& longer = sa.size() <= sb.size() ? sb : sa;
    std::size_t shared = 0;
    for (const auto& t : shorter)
        shared += longer.count(t);
    return shared > 0 && 2 * shared >= shorter.size();
}

std::vector<std::string> truncate_plan(const std::vector<std::string>& gtp, double step_ratio)
{
    if (!(step_ratio > 0.0 && step_ratio <= 1.0))
        throw InvalidRatio("step ratio must lie in (0, 1]");
    if (gtp.empty())
        throw InvalidParameter("ground-truth plan is empty");
    // The small slack keeps e.g. 0.7 * 10 from rounding up to 8.
    const double raw = step_ratio * static_cast<double>(gtp.size());
    auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    count = std::clamp<std::size_t>(count, 1, gtp.size());
    return {gtp.begin(), gtp.begin() + static_cast<std::ptrdiff_t>(count)};
}

std::string build_prompt(const ActionHistory& history, const std::set<std::string>& object_labels)
{
    if (object_labels.empty())
        throw InvalidParameter("prompt needs at least one object label");

    // std::set is already sorted and unique.
    const std::string objects =
        join(std::vector<std::string>(object_labels.begin(), object_labels.end()), ", ");
    const std::string actions =
        history.actions.empty() ? "not grabbed anything yet" : join(history.actions, ", ");

    std::ostringstream out;
    out << "In a " << history.env_label << " with " << objects << ", a person has already "
        << actions << ". What objective is the human trying to finish? What objects will be "
        << "relevant next among " << objects << "?\n\n"
        << "Answer with exactly this block, listing only objects named above:\n"
        << "```relevance\n"
        << "objective: <the human objective>\n"
        << "relevant: <comma-separated relevant objects>\n"
        << "```\n";
    return out.str();
}

RelevanceResult parse_response(std::string_view text)
{
    std::vector<std::string> lines;
    {
        std::istringstream in{std::string(text)};
        for (std::string line; std::getline(in, line);)
            lines.push_back(line);
    }

    std::string objective, relevant;
    bool found = false;

    // Fenced blocks take priority over loose keyed lines.
    for (std::size_t i = 0; i < lines.size() && !found; ++i)
    {
        if (trim(lines[i]).rfind("```", 0) != 0)
            continue;
        std::size_t j = i + 1;
        while (j < lines.size() && trim(lines[j]).rfind("```", 0) != 0)
            ++j;
        std::vector<std::string> block(lines.begin() + static_cast<std::ptrdiff_t>(i + 1),
                                       lines.begin() + static_cast<std::ptrdiff_t>(j));
        found = extract_fields(block, objective, relevant);
        i = j;
    }
    if (!found)
        found = extract_fields(lines, objective, relevant);
    if (!found)
        throw MalformedResponse("response has no objective/relevant block");

    RelevanceResult r;
    r.objective = normalize_label(objective);
    for (const auto& item : split(relevant, ','))
    {
        auto label = normalize_label(item);
        if (!label.empty())
            r.relevant_labels.insert(std::move(label));
    }
    if (r.objective.empty())
        throw MalformedResponse("response objective is empty");
    if (r.relevant_labels.empty())
        throw MalformedResponse("response lists no relevant objects");
    return r;
}

RelevanceResult mock_predict(const ActionHistory& history, const RuleTable& rules)
{
    if (history.actions.empty())
        throw EmptyHistory("action history is empty");

    const Rule* best = nullptr;
    for (const auto& rule : rules.rules)
    {
        if (rule.prefix.size() > history.actions.size())
            continue;
        bool match = true;
        for (std::size_t i = 0; i < rule.prefix.size() && match; ++i)
            match = normalize_label(rule.prefix[i]) == normalize_label(history.actions[i]);
        if (match && (!best || rule.prefix.size() > best->prefix.size()))
            best = &rule;
    }
    if (!best)
        throw NoRuleMatched("no rule matches history starting with '" + history.actions.front() +
                            "'");

    RelevanceResult r;
    r.objective = normalize_label(best->objective);
    for (const auto& label : best->relevant)
        r.relevant_labels.insert(normalize_label(label));
    return r;
}

bool score_objective(std::string_view predicted, std::string_view gto)
{
    return labels_match(predicted, gto);
}

double score_relevance(const std::set<std::string>& predicted, const std::set<std::string>& gt)
{
    if (gt.empty())
        throw EmptyGroundTruth("ground-truth relevant set is empty");
    std::size_t matched = 0;
    for (const auto& g : gt)
        matched += std::any_of(predicted.begin(), predicted.end(),
                               [&](const std::string& p) { return labels_match(p, g); });
    return static_cast<double>(matched) / static_cast<double>(gt.size());
}

RuleTable parse_rule_table(std::string_view json_text)
{
    try
    {
        const auto j = nlohmann::json::parse(json_text);
        RuleTable table;
        table.env_label = j.value("env", std::string{"kitchen"});
        for (const auto& r : j.at("rules"))
        {
            Rule rule;
            rule.prefix = r.at("prefix").get<std::vector<std::string>>();
            rule.objective = r.at("objective").get<std::string>();
            rule.relevant = r.at("relevant").get<std::vector<std::string>>();
            table.rules.push_back(std::move(rule));
        }
        return table;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw FixtureError(std::string("invalid rule table: ") + e.what());
    }
}

RuleTable load_rule_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw FixtureError("cannot open rule table " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_rule_table(buf.str());
}

std::vector<GroundTruthRecord> parse_fixtures(std::string_view text)
{
    std::vector<GroundTruthRecord> out;
    std::istringstream in{std::string(text)};
    int line_no = 0;
    for (std::string line; std::getline(in, line);)
    {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;

        GroundTruthRecord rec;
        for (const auto& field : split(t, '|'))
        {
            const auto eq = field.find('=');
            if (eq == std::string::npos)
                throw FixtureError("line " + std::to_string(line_no) + ": field without '='");
            const std::string key = trim(std::string_view(field).substr(0, eq));
            const std::string value = trim(std::string_view(field).substr(eq + 1));
            if (key == "gto")
                rec.gto = value;
            else if (key == "gtp")
            {
                for (auto& a : split(value, ';'))
                    if (!a.empty())
                        rec.gtp.push_back(std::move(a));
            }
            else if (key == "relevant")
            {
                for (const auto& r : split(value, ','))
                    if (!r.empty())
                        rec.gt_relevant.insert(normalize_label(r));
            }
            else
                throw FixtureError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        if (rec.gto.empty() || rec.gtp.empty() || rec.gt_relevant.empty())
            throw FixtureError("line " + std::to_string(line_no) +
                               ": gto, gtp and relevant are all required");
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<GroundTruthRecord> load_fixtures(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw FixtureError("cannot open fixture file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_fixtures(buf.str());
}

} // namespace hrc::relevance
