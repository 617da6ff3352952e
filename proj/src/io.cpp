#include "hrc/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hrc::io {

using nlohmann::json;

namespace {

json vec3(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json vec2(double x, double y) { return json::array({x, y}); }

Vec3 read_vec3(const json& j)
{
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("expected a 3-element array, got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::pair<double, double> read_vec2(const json& j)
{
    if (!j.is_array() || j.size() != 2)
        throw ConfigError("expected a 2-element array, got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

void reject_unknown(const json& given, const json& known, const std::string& where)
{
    if (!given.is_object())
        return;
    for (const auto& [key, value] : given.items())
    {
        if (!known.contains(key))
            throw ConfigError("unknown config key '" + where + key + "'");
        if (known[key].is_object())
            reject_unknown(value, known[key], where + key + ".");
    }
}

} // namespace

json config_to_json(const sim::SimConfig& c)
{
    const auto& a = c.apf;
    const auto& h = c.provider.http;
    return {
        {"tick_rate", c.tick_rate},
        {"table_size", vec3(c.table_size)},
        {"table_height", c.table_height},
        {"circle_radius", c.circle_radius},
        {"circle_center", vec2(c.circle_center_x, c.circle_center_y)},
        {"slot_count", c.slot_count},
        {"object_diameter", c.object_diameter},
        {"objective", {{"label", c.objective_spec.objective}, {"required", c.objective_spec.required}}},
        {"distractor_pool", c.distractor_pool},
        {"n_total_objects", c.n_total_objects},
        {"relevance_latency_ticks", c.relevance_latency_ticks},
        {"method", std::string(motion::to_string(c.method))},
        {"seed", c.seed},
        {"apf",
         {{"attractive_gain", a.attractive_gain},
          {"attractive_length", a.attractive_length},
          {"repulsive_gain", a.repulsive_gain},
          {"repulsive_shape", a.repulsive_shape},
          {"repulsive_decay", a.repulsive_decay},
          {"k_b", a.k_b},
          {"k_c", a.k_c},
          {"safety_time", a.safety_time},
          {"robot_speed", a.robot_speed},
          {"human_speed", a.human_speed},
          {"max_speed", a.max_speed},
          {"force_gain", a.force_gain}}},
        {"d_h", c.d_h},
        {"dwell", c.dwell},
        {"hand_height_offset", c.hand_height_offset},
        {"goal_tolerance", c.goal_tolerance},
        {"gripper_radius", c.gripper_radius},
        {"hand_radius", c.hand_radius},
        {"tick_cap", c.tick_cap},
        {"destination", vec2(c.destination.x, c.destination.y)},
        {"robot_start", vec2(c.robot_start.x, c.robot_start.y)},
        {"env_label", c.env_label},
        {"provider",
         {{"kind", c.provider.kind},
          {"rules_path", c.provider.rules_path},
          {"http",
           {{"base_url", h.base_url},
            {"path", h.path},
            {"model", h.model},
            {"api_key_env", h.api_key_env},
            {"timeout_s", h.timeout_s},
            {"temperature", h.temperature}}}}},
        {"realtime", c.realtime},
    };
}

sim::SimConfig config_from_json(const json& given)
{
    const json defaults = config_to_json(sim::SimConfig{});
    if (!given.is_object())
        throw ConfigError("config must be a JSON object");
    reject_unknown(given, defaults, "");
    json j = defaults;
    j.merge_patch(given);

    try
    {
        sim::SimConfig c;
        c.tick_rate = j["tick_rate"].get<double>();
        c.table_size = read_vec3(j["table_size"]);
        c.table_height = j["table_height"].get<double>();
        c.circle_radius = j["circle_radius"].get<double>();
        std::tie(c.circle_center_x, c.circle_center_y) = read_vec2(j["circle_center"]);
        c.slot_count = j["slot_count"].get<int>();
        c.object_diameter = j["object_diameter"].get<double>();
        c.objective_spec.objective = j["objective"]["label"].get<std::string>();
        c.objective_spec.required = j["objective"]["required"].get<std::vector<std::string>>();
        c.distractor_pool = j["distractor_pool"].get<std::vector<std::string>>();
        c.n_total_objects = j["n_total_objects"].get<int>();
        c.relevance_latency_ticks = j["relevance_latency_ticks"].get<long>();
        c.method = motion::parse_method(j["method"].get<std::string>());
        c.seed = j["seed"].get<std::uint64_t>();

        const auto& a = j["apf"];
        c.apf.attractive_gain = a["attractive_gain"].get<double>();
        c.apf.attractive_length = a["attractive_length"].get<double>();
        c.apf.repulsive_gain = a["repulsive_gain"].get<double>();
        c.apf.repulsive_shape = a["repulsive_shape"].get<double>();
        c.apf.repulsive_decay = a["repulsive_decay"].get<double>();
        c.apf.k_b = a["k_b"].get<double>();
        c.apf.k_c = a["k_c"].get<double>();
        c.apf.safety_time = a["safety_time"].get<double>();
        c.apf.robot_speed = a["robot_speed"].get<double>();
        c.apf.human_speed = a["human_speed"].get<double>();
        c.apf.max_speed = a["max_speed"].get<double>();
        c.apf.force_gain = a["force_gain"].get<double>();

        c.d_h = j["d_h"].get<double>();
        c.dwell = j["dwell"].get<double>();
        c.hand_height_offset = j["hand_height_offset"].get<double>();
        c.goal_tolerance = j["goal_tolerance"].get<double>();
        c.gripper_radius = j["gripper_radius"].get<double>();
        c.hand_radius = j["hand_radius"].get<double>();
        c.tick_cap = j["tick_cap"].get<long>();
        const auto [dx, dy] = read_vec2(j["destination"]);
        c.destination = {dx, dy, 0.0};
        const auto [rx, ry] = read_vec2(j["robot_start"]);
        c.robot_start = {rx, ry, 0.0};
        c.env_label = j["env_label"].get<std::string>();

        const auto& p = j["provider"];
        c.provider.kind = p["kind"].get<std::string>();
        c.provider.rules_path = p["rules_path"].get<std::string>();
        const auto& h = p["http"];
        c.provider.http.base_url = h["base_url"].get<std::string>();
        c.provider.http.path = h["path"].get<std::string>();
        c.provider.http.model = h["model"].get<std::string>();
        c.provider.http.api_key_env = h["api_key_env"].get<std::string>();
        c.provider.http.timeout_s = h["timeout_s"].get<double>();
        c.provider.http.temperature = h["temperature"].get<double>();
        c.realtime = j["realtime"].get<bool>();

        c.validate();
        return c;
    }
    catch (const json::exception& e)
    {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    catch (const InvalidParameter& e)
    {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

sim::SimConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    try
    {
        return config_from_json(json::parse(in));
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' must look like key=value");
    std::string pointer = "/" + assignment.substr(0, eq);
    for (auto& ch : pointer)
        if (ch == '.')
            ch = '/';
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try
    {
        value = json::parse(raw);
    }
    catch (const json::parse_error&)
    {
        value = raw;
    }
    try
    {
        doc[json::json_pointer(pointer)] = value;
    }
    catch (const json::exception& e)
    {
        throw ConfigError("cannot apply override '" + assignment + "': " + e.what());
    }
}

json setup_to_json(const sim::EpisodeSetup& setup)
{
    const auto& s = setup.scene;
    json elements = json::array();
    for (const auto& e : s.elements)
        elements.push_back(
            {{"id", e.id}, {"label", e.label}, {"position", vec3(e.position)}, {"radius", e.radius}});
    return {
        {"table_size", vec3(s.table_size)},
        {"table_height", s.table_height},
        {"destination", vec3(s.destination)},
        {"robot_start", vec3(s.robot_start)},
        {"hand_start", vec3(s.hand_start)},
        {"elements", elements},
        {"first_intent", setup.first_intent},
    };
}

sim::EpisodeSetup setup_from_json(const json& j)
{
    try
    {
        sim::EpisodeSetup setup;
        auto& s = setup.scene;
        s.table_size = read_vec3(j.at("table_size"));
        s.table_height = j.at("table_height").get<double>();
        s.destination = read_vec3(j.at("destination"));
        s.robot_start = read_vec3(j.at("robot_start"));
        s.hand_start = read_vec3(j.at("hand_start"));
        for (const auto& e : j.at("elements"))
            s.elements.push_back({e.at("id").get<int>(), e.at("label").get<std::string>(),
                                  read_vec3(e.at("position")), e.at("radius").get<double>()});
        for (std::size_t i = 0; i < s.elements.size(); ++i)
            if (s.elements[i].id != static_cast<int>(i))
                throw ConfigError("scene element ids must be 0..n-1 in order");
        setup.first_intent = j.at("first_intent").get<int>();
        s.validate();
        return setup;
    }
    catch (const json::exception& e)
    {
        throw ConfigError(std::string("invalid scene file: ") + e.what());
    }
    catch (const InvalidParameter& e)
    {
        throw ConfigError(std::string("invalid scene: ") + e.what());
    }
}

sim::EpisodeSetup load_setup(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scene file " + path.string());
    try
    {
        return setup_from_json(json::parse(in));
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError("scene file " + path.string() + " is not valid JSON: " + e.what());
    }
}

const std::vector<std::string>& trace_columns()
{
    static const std::vector<std::string> cols{
        "tick",    "time",    "hand_x",       "hand_y",     "hand_z",    "hand_present",
        "gripper_x", "gripper_y", "gripper_z", "fa_x",      "fa_y",      "fa_z",
        "fro_x",   "fro_y",   "fro_z",        "frv_x",      "frv_y",     "frv_z",
        "ft_x",    "ft_y",    "ft_z",         "k_r_raw",    "collision", "phase",
        "relevance", "events"};
    return cols;
}

void write_trace_csv(std::ostream& out, const sim::EpisodeTrace& trace, double dt)
{
    const auto& cols = trace_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << "\n";

    std::ostringstream row;
    row << std::setprecision(10);
    auto v3 = [&](const Vec3& v) { row << v.x << ',' << v.y << ',' << v.z; };
    for (const auto& r : trace.ticks)
    {
        row.str("");
        row << r.tick << ',' << r.tick * dt << ',';
        v3(r.hand);
        row << ',' << (r.hand_present ? 1 : 0) << ',';
        v3(r.gripper);
        row << ',';
        v3(r.forces.attractive);
        row << ',';
        v3(r.forces.obstacle_repulsive);
        row << ',';
        v3(r.forces.virtual_repulsive);
        row << ',';
        v3(r.forces.total);
        row << ',' << r.k_r_raw << ',' << (r.collision ? 1 : 0) << ',' << sim::to_string(r.phase)
            << ',' << sim::to_string(r.relevance) << ',';
        for (std::size_t i = 0; i < r.events.size(); ++i)
            row << (i ? ";" : "") << r.events[i];
        out << row.str() << "\n";
    }
}

json metrics_to_json(const sim::EpisodeMetrics& m)
{
    return {
        {"seed", m.seed},
        {"method", std::string(motion::to_string(m.method))},
        {"collided_case", m.collided_case},
        {"collided_frames", m.collided_frames},
        {"total_frames", m.total_frames},
        {"completion_time", m.completion_time},
        {"robot_path_length", m.robot_path_length},
        {"incomplete", m.incomplete},
        {"human_completion_time", m.human_completion_time},
        {"robot_start_tick", m.robot_start_tick},
        {"robot_tasks", m.robot_tasks},
        {"provider_error", m.provider_error},
    };
}

json summary_to_json(const sim::MetricsSummary& s)
{
    return {
        {"episodes", s.episodes},
        {"rate_collided_cases", s.rate_collided_cases},
        {"rate_collided_frames", s.rate_collided_frames},
        {"mean_completion_time", s.mean_completion_time},
        {"mean_path_length", s.mean_path_length},
        {"incomplete", s.incomplete},
    };
}

void write_episode_metrics_csv(std::ostream& out, const std::vector<sim::EpisodeMetrics>& batch)
{
    out << "seed,method,collided_case,collided_frames,total_frames,completion_time,"
           "robot_path_length,incomplete,human_completion_time,robot_start_tick,robot_tasks\n";
    out << std::setprecision(10);
    for (const auto& m : batch)
        out << m.seed << ',' << motion::to_string(m.method) << ',' << (m.collided_case ? 1 : 0)
            << ',' << m.collided_frames << ',' << m.total_frames << ',' << m.completion_time << ','
            << m.robot_path_length << ',' << (m.incomplete ? 1 : 0) << ','
            << m.human_completion_time << ',' << m.robot_start_tick << ',' << m.robot_tasks << "\n";
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace hrc::io
