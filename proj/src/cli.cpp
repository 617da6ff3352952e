#include "hrc/cli.hpp"

#include "hrc/io.hpp"
#include "hrc/provider.hpp"
#include "hrc/relevance.hpp"
#include "hrc/simulator.hpp"

#include "CLI11.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hrc::cli {

using nlohmann::json;

namespace {

constexpr double kStepRatios[] = {0.25, 0.5, 0.75};

sim::SimConfig resolve_config(const RunSpec& spec)
{
    json doc;
    if (spec.config_path)
    {
        std::ifstream in(*spec.config_path);
        if (!in)
            throw io::ConfigError("cannot open config file " + spec.config_path->string());
        try
        {
            doc = json::parse(in);
        }
        catch (const json::parse_error& e)
        {
            throw io::ConfigError("config file " + spec.config_path->string() +
                                  " is not valid JSON: " + e.what());
        }
    }
    else
    {
        doc = json::object();
    }
    for (const auto& o : spec.overrides)
        io::apply_override(doc, o);
    if (spec.provider)
        doc["provider"]["kind"] = *spec.provider;
    if (spec.latency_ticks)
        doc["relevance_latency_ticks"] = *spec.latency_ticks;
    if (spec.realtime)
        doc["realtime"] = true;
    return io::config_from_json(doc);
}

std::vector<motion::Method> methods_of(const std::string& m)
{
    if (m == "both")
        return {motion::Method::Baseline, motion::Method::Rapf};
    return {motion::parse_method(m)};
}

std::vector<std::uint64_t> seeds_of(const RunSpec& spec, const sim::SimConfig& config)
{
    if (spec.seed_range)
    {
        std::vector<std::uint64_t> out;
        for (auto s = spec.seed_range->first;; ++s)
        {
            out.push_back(s);
            if (s == spec.seed_range->second)
                break;
        }
        return out;
    }
    return {spec.seed.value_or(config.seed)};
}

double percentage_decrease(double baseline, double rapf)
{
    return baseline > 0.0 ? 100.0 * (baseline - rapf) / baseline : 0.0;
}

std::string tag(motion::Method m, std::uint64_t seed)
{
    return std::string(motion::to_string(m)) + "_seed" + std::to_string(seed);
}

void write_trace(const std::filesystem::path& path, const sim::EpisodeResult& r, double dt)
{
    std::ofstream out(path);
    if (!out)
        throw io::ConfigError("cannot write " + path.string());
    io::write_trace_csv(out, r.trace, dt);
}

// Runs every requested method on one setup and writes trace + metrics files.
void run_setup(const sim::SimConfig& base, const sim::EpisodeSetup& setup,
               const std::vector<motion::Method>& methods, const std::filesystem::path& dir,
               std::ostream& out)
{
    for (auto m : methods)
    {
        sim::SimConfig c = base;
        c.method = m;
        const auto r = sim::run_episode(c, setup);
        write_trace(dir / ("trace_" + tag(m, c.seed) + ".csv"), r, c.dt());
        io::write_json(dir / ("metrics_" + tag(m, c.seed) + ".json"), io::metrics_to_json(r.metrics));
        out << motion::to_string(m) << " seed " << c.seed << ": "
            << (r.metrics.collided_case ? "collided" : "no collision") << ", "
            << r.metrics.collided_frames << "/" << r.metrics.total_frames
            << " collided frames, completion " << std::fixed << std::setprecision(2)
            << r.metrics.completion_time << " s" << std::defaultfloat
            << (r.metrics.incomplete ? " (tick cap reached)" : "") << "\n";
    }
}

template <typename F>
int guarded(std::ostream& err, F&& body)
{
    try
    {
        return body();
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text)
{
    const auto dots = text.find("..");
    if (dots == std::string::npos)
        throw std::invalid_argument("seed range must look like A..B, got '" + text + "'");
    auto parse = [&](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("invalid seed '" + s + "' in range '" + text + "'");
        return static_cast<std::uint64_t>(std::stoull(s));
    };
    const auto a = parse(text.substr(0, dots));
    const auto b = parse(text.substr(dots + 2));
    if (b < a)
        throw std::invalid_argument("seed range '" + text + "' is empty");
    return {a, b};
}

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        sim::SimConfig config = resolve_config(spec);
        config.seed = spec.seed.value_or(config.seed);
        const auto methods = methods_of(spec.method);
        std::filesystem::create_directories(spec.out_dir);
        io::write_json(spec.out_dir / "config.json", io::config_to_json(config));
        const auto setup = sim::generate_setup(config, config.seed);
        io::write_json(spec.out_dir / ("scene_seed" + std::to_string(config.seed) + ".json"),
                       io::setup_to_json(setup));
        run_setup(config, setup, methods, spec.out_dir, out);
        return 0;
    });
}

int cmd_replay(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        sim::SimConfig config = resolve_config(spec);
        config.seed = spec.seed.value_or(config.seed);
        const auto setup = io::load_setup(spec.scene_path);
        std::filesystem::create_directories(spec.out_dir);
        run_setup(config, setup, methods_of(spec.method), spec.out_dir, out);
        return 0;
    });
}

int cmd_compare(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const sim::SimConfig config = resolve_config(spec);
        const auto seeds = seeds_of(spec, config);
        std::filesystem::create_directories(spec.out_dir);
        io::write_json(spec.out_dir / "config.json", io::config_to_json(config));

        std::map<motion::Method, sim::MetricsSummary> summaries;
        std::map<motion::Method, std::vector<sim::EpisodeMetrics>> batches;
        for (auto m : {motion::Method::Baseline, motion::Method::Rapf})
        {
            batches[m] = sim::run_batch(config, seeds, m, spec.threads);
            summaries[m] = sim::aggregate_metrics(batches[m]);
            std::ofstream csv(spec.out_dir / ("episodes_" + std::string(motion::to_string(m)) + ".csv"));
            io::write_episode_metrics_csv(csv, batches[m]);
        }

        // Pairing check: both methods saw the same seeds and started the robot on the same tick.
        bool paired = true;
        for (std::size_t i = 0; i < seeds.size(); ++i)
        {
            const auto& b = batches[motion::Method::Baseline][i];
            const auto& r = batches[motion::Method::Rapf][i];
            paired = paired && b.seed == r.seed && b.robot_start_tick == r.robot_start_tick &&
                     b.robot_tasks == r.robot_tasks;
        }

        const auto& base = summaries[motion::Method::Baseline];
        const auto& rapf = summaries[motion::Method::Rapf];
        json summary = {
            {"seeds", {{"first", seeds.front()}, {"last", seeds.back()}, {"count", seeds.size()}}},
            {"paired", paired},
            {"provider", config.provider.kind},
            {"relevance_latency_ticks", config.relevance_latency_ticks},
            {"baseline", io::summary_to_json(base)},
            {"rapf", io::summary_to_json(rapf)},
            {"percentage_decrease",
             {{"rate_collided_cases", percentage_decrease(base.rate_collided_cases, rapf.rate_collided_cases)},
              {"rate_collided_frames",
               percentage_decrease(base.rate_collided_frames, rapf.rate_collided_frames)}}},
        };
        io::write_json(spec.out_dir / "summary.json", summary);

        if (seeds.size() == 1)
        {
            sim::SimConfig c = config;
            c.seed = seeds.front();
            run_setup(c, sim::generate_setup(c, c.seed), methods_of("both"), spec.out_dir, out);
        }

        out << std::fixed << std::setprecision(4);
        out << "episodes: " << seeds.size() << " paired seeds " << seeds.front() << ".."
            << seeds.back() << (paired ? "" : " (PAIRING VIOLATED)") << "\n";
        out << "                         baseline    rapf   decrease\n";
        out << "rate of collided cases   " << std::setw(8) << base.rate_collided_cases << "  "
            << std::setw(6) << rapf.rate_collided_cases << "  " << std::setw(7) << std::setprecision(2)
            << percentage_decrease(base.rate_collided_cases, rapf.rate_collided_cases) << "%\n"
            << std::setprecision(4);
        out << "rate of collided frames  " << std::setw(8) << base.rate_collided_frames << "  "
            << std::setw(6) << rapf.rate_collided_frames << "  " << std::setw(7)
            << std::setprecision(2)
            << percentage_decrease(base.rate_collided_frames, rapf.rate_collided_frames) << "%\n";
        out << std::defaultfloat;
        return paired ? 0 : 1;
    });
}

int cmd_score(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const sim::SimConfig config = resolve_config(spec);
        const auto records = relevance::load_fixtures(spec.fixtures_path);
        if (records.empty())
        {
            err << "error: fixture file " << spec.fixtures_path.string() << " has no records\n";
            return 2;
        }

        std::shared_ptr<relevance::Provider> provider;
        std::string env = config.env_label;
        if (config.provider.kind == "mock")
        {
            std::filesystem::path rules = spec.rules_path;
            if (rules.empty())
                rules = config.provider.rules_path;
            if (rules.empty())
                throw io::ConfigError("the mock provider needs a rule table (--rules)");
            auto table = relevance::load_rule_table(rules);
            env = table.env_label;
            provider = std::make_shared<relevance::MockProvider>(std::move(table));
        }
        else
        {
            provider = sim::make_provider(config);
        }

        std::set<std::string> objects;
        for (const auto& r : records)
            objects.insert(r.gt_relevant.begin(), r.gt_relevant.end());

        // objective -> ratio index -> (objective hits, relevance sum, count)
        struct Cell
        {
            double objective{0.0};
            double relevance{0.0};
            int count{0};
        };
        std::map<std::string, std::array<Cell, 3>> table;
        int failures = 0, queries = 0;
        for (const auto& rec : records)
        {
            for (std::size_t k = 0; k < 3; ++k)
            {
                ++queries;
                auto& cell = table[rec.gto][k];
                ++cell.count;
                relevance::Query q;
                q.history.env_label = env;
                q.history.actions = relevance::truncate_plan(rec.gtp, kStepRatios[k]);
                q.object_labels = objects;
                try
                {
                    const auto pred = provider->predict(q);
                    cell.objective += relevance::score_objective(pred.objective, rec.gto) ? 1.0 : 0.0;
                    cell.relevance += relevance::score_relevance(pred.relevant_labels, rec.gt_relevant);
                }
                catch (const std::exception& e)
                {
                    ++failures;
                    err << "record '" << rec.gto << "' ratio " << kStepRatios[k] << ": " << e.what()
                        << "\n";
                }
            }
        }

        json result = json::object();
        out << std::fixed << std::setprecision(2);
        for (const char* metric : {"objective", "relevance"})
        {
            const bool obj = std::string(metric) == "objective";
            out << (obj ? "Objective prediction\n" : "Relevance prediction\n");
            out << "  ratio  average";
            for (const auto& [gto, cells] : table)
                out << "  " << gto;
            out << "\n";
            for (std::size_t k = 0; k < 3; ++k)
            {
                double sum = 0.0;
                std::vector<double> per;
                for (const auto& [gto, cells] : table)
                {
                    const auto& c = cells[k];
                    per.push_back((obj ? c.objective : c.relevance) / c.count);
                    sum += per.back();
                }
                const double avg = sum / static_cast<double>(per.size());
                out << "  " << kStepRatios[k] << "   " << avg;
                std::size_t i = 0;
                for (const auto& [gto, cells] : table)
                    out << "  " << std::setw(static_cast<int>(gto.size())) << per[i++];
                out << "\n";
                std::ostringstream key;
                key << kStepRatios[k];
                result[metric][key.str()] = avg;
            }
        }
        out << std::defaultfloat;
        result["queries"] = queries;
        result["failures"] = failures;
        std::filesystem::create_directories(spec.out_dir);
        io::write_json(spec.out_dir / "score.json", result);
        if (failures == queries)
        {
            err << "error: every provider query failed\n";
            return 3;
        }
        return 0;
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Human-robot collaboration simulator: relevance, task allocation and RAPF motion"};
    app.require_subcommand(1);

    RunSpec spec;
    std::string config_path, seed_range;
    std::uint64_t seed = 0;
    long latency = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--set", spec.overrides, "Override a config key, e.g. apf.k_b=0.5");
        sub->add_option("--seed", seed, "Single episode seed");
        sub->add_option("--provider", spec.provider, "Relevance provider")
            ->check(CLI::IsMember({"mock", "http"}));
        sub->add_option("--out", spec.out_dir, "Output directory");
        sub->add_flag("--realtime", spec.realtime, "Pace the simulation in wall-clock time");
        sub->add_option("--latency-ticks", latency, "Simulated relevance latency in ticks")
            ->check(CLI::NonNegativeNumber);
    };
    auto add_method = [&](CLI::App* sub) {
        sub->add_option("--method", spec.method, "Motion method")
            ->check(CLI::IsMember({"baseline", "rapf", "both"}));
    };

    auto* run = app.add_subcommand("run", "Run a single episode and export its trace");
    add_common(run);
    add_method(run);

    auto* compare = app.add_subcommand("compare", "Paired baseline/RAPF batch over a seed range");
    add_common(compare);
    compare->add_option("--seeds", seed_range, "Inclusive seed range A..B");
    compare->add_option("--threads", spec.threads, "Worker threads (0 = all cores)");

    auto* score = app.add_subcommand("score", "Score relevance predictions against fixtures");
    add_common(score);
    score->add_option("--fixtures", spec.fixtures_path, "Ground-truth fixture file")->required();
    score->add_option("--rules", spec.rules_path, "Rule table for the mock provider");

    auto* replay = app.add_subcommand("replay", "Run episodes on a saved scene file");
    add_common(replay);
    add_method(replay);
    replay->add_option("--scene", spec.scene_path, "Scene file written by 'run'")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e, out, err);
    }

    for (auto* sub : app.get_subcommands())
    {
        spec.subcommand = sub->get_name();
        if (sub->count("--config"))
            spec.config_path = config_path;
        if (sub->count("--seed"))
            spec.seed = seed;
        if (sub->count("--latency-ticks"))
            spec.latency_ticks = latency;
        if (spec.subcommand == "compare" && sub->count("--seeds"))
        {
            try
            {
                spec.seed_range = parse_seed_range(seed_range);
            }
            catch (const std::invalid_argument& e)
            {
                err << "error: " << e.what() << "\n";
                return 2;
            }
        }
    }

    if (spec.subcommand == "run")
        return cmd_run(spec, out, err);
    if (spec.subcommand == "compare")
        return cmd_compare(spec, out, err);
    if (spec.subcommand == "score")
        return cmd_score(spec, out, err);
    return cmd_replay(spec, out, err);
}

} // namespace hrc::cli
