#include "groupnav/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "groupnav/trajectory.hpp"

namespace groupnav::cfg {

namespace {

struct Field {
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    bool derived;  // default chosen here rather than fixed by the benchmark setup
};

double parse_double(const std::string& v) {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not a number: " + v);
    return out;
}

int parse_int(const std::string& v) {
    size_t pos = 0;
    const long out = std::stol(v, &pos);
    if (pos != v.size() || out < std::numeric_limits<int>::min() ||
        out > std::numeric_limits<int>::max())
        throw std::invalid_argument("not an integer: " + v);
    return static_cast<int>(out);
}

uint64_t parse_u64(const std::string& v) {
    size_t pos = 0;
    const unsigned long long out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not an unsigned integer: " + v);
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("not a boolean (use true/false): " + v);
}

#define FIELD_DOUBLE(key, expr, derived)                                              \
    {key, [](RunConfig& c, const std::string& v) { c.expr = parse_double(v); },       \
     [](const RunConfig& c) { return io::format_double(c.expr); }, derived}
#define FIELD_INT(key, expr, derived)                                              \
    {key, [](RunConfig& c, const std::string& v) { c.expr = parse_int(v); },       \
     [](const RunConfig& c) { return std::to_string(c.expr); }, derived}
#define FIELD_BOOL(key, expr, derived)                                              \
    {key, [](RunConfig& c, const std::string& v) { c.expr = parse_bool(v); },       \
     [](const RunConfig& c) { return c.expr ? std::string("true") : std::string("false"); }, \
     derived}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        FIELD_INT("env.n_pedestrians", episode.n_pedestrians, false),
        FIELD_BOOL("env.single_group", episode.single_group, false),
        FIELD_DOUBLE("env.group_lambda", episode.group_lambda, false),
        FIELD_DOUBLE("env.circle_radius", episode.circle_radius, false),
        FIELD_DOUBLE("env.dt", episode.dt, false),
        FIELD_DOUBLE("env.timeout", episode.timeout, false),
        FIELD_DOUBLE("env.robot_radius", episode.robot_radius, false),
        FIELD_DOUBLE("env.ped_radius", episode.ped_radius, false),
        FIELD_DOUBLE("env.v_pref", episode.v_pref, false),
        FIELD_DOUBLE("reward.c_prog", reward.c_prog, false),
        FIELD_DOUBLE("reward.c_goal", reward.c_goal, false),
        FIELD_DOUBLE("reward.c_disc", reward.c_disc, false),
        FIELD_DOUBLE("reward.c_coll", reward.c_coll, false),
        FIELD_DOUBLE("reward.c_group", reward.c_group, false),
        FIELD_DOUBLE("reward.d_coll", reward.d_coll, false),
        FIELD_DOUBLE("reward.d_disc", reward.d_disc, false),
        FIELD_BOOL("reward.group_term_enabled", reward.group_term_enabled, false),
        FIELD_DOUBLE("sfm.tau", sfm.tau, true),
        FIELD_DOUBLE("sfm.social_strength", sfm.social_strength, true),
        FIELD_DOUBLE("sfm.social_range", sfm.social_range, true),
        FIELD_DOUBLE("sfm.obstacle_strength", sfm.obstacle_strength, true),
        FIELD_DOUBLE("sfm.obstacle_range", sfm.obstacle_range, true),
        FIELD_DOUBLE("sfm.gaze_strength", sfm.gaze_strength, true),
        FIELD_DOUBLE("sfm.attraction_strength", sfm.attraction_strength, true),
        FIELD_DOUBLE("sfm.group_repulsion_strength", sfm.group_repulsion_strength, true),
        FIELD_DOUBLE("sfm.vision_half_angle_deg", sfm.vision_half_angle_deg, true),
        FIELD_DOUBLE("sfm.attraction_threshold_coeff", sfm.attraction_threshold_coeff, true),
        FIELD_DOUBLE("sfm.group_repulsion_radius", sfm.group_repulsion_radius, true),
        FIELD_DOUBLE("sfm.max_speed_factor", sfm.max_speed_factor, false),
        FIELD_DOUBLE("ppo.gamma", ppo.gamma, false),
        FIELD_DOUBLE("ppo.gae_lambda", ppo.gae_lambda, false),
        FIELD_INT("ppo.window", ppo.window, false),
        FIELD_INT("ppo.windows_per_batch", ppo.windows_per_batch, false),
        FIELD_INT("ppo.epochs_per_batch", ppo.epochs_per_batch, true),
        FIELD_INT("ppo.minibatches", ppo.minibatches, true),
        FIELD_DOUBLE("ppo.clip_epsilon", ppo.clip_epsilon, true),
        FIELD_DOUBLE("ppo.value_coeff", ppo.value_coeff, true),
        FIELD_DOUBLE("ppo.entropy_coeff", ppo.entropy_coeff, true),
        FIELD_DOUBLE("ppo.grad_clip_norm", ppo.grad_clip_norm, true),
        FIELD_INT("ppo.iterations", ppo.iterations, false),
        FIELD_DOUBLE("ppo.lr", ppo.lr, false),
        FIELD_DOUBLE("ppo.adam_eps", ppo.adam_eps, false),
        FIELD_INT("ppo.checkpoint_interval", ppo.checkpoint_interval, true),
        FIELD_INT("eval.trials", eval_trials, false),
        {"eval.seed", [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); },
         [](const RunConfig& c) { return std::to_string(c.seed); }, false},
        {"output.dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
         [](const RunConfig& c) { return c.out_dir; }, false},
    };
    return table;
}

#undef FIELD_DOUBLE
#undef FIELD_INT
#undef FIELD_BOOL

const Field* find_field(const std::string& key) {
    for (const Field& f : fields())
        if (key == f.key) return &f;
    return nullptr;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const Field* field = find_field(key);
        if (!field)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        try {
            field->set(config, value);
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + " (" + key +
                                        "): " + e.what());
        }
    }
    return config;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override '" + assignment + "': expected section.key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const Field* field = find_field(key);
    if (!field) throw std::invalid_argument("override: unknown key '" + key + "'");
    try {
        field->set(config, value);
    } catch (const std::exception& e) {
        throw std::invalid_argument("override " + key + ": " + e.what());
    }
}

void validate(const RunConfig& config) {
    config.episode.validate();
    config.reward.validate();
    config.sfm.validate();
    config.ppo.validate();
    if (config.eval_trials < 1) throw std::invalid_argument("eval.trials must be >= 1");
    if (config.out_dir.empty()) throw std::invalid_argument("output.dir must not be empty");
}

std::string serialize_config(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const Field& f : fields()) {
        const std::string key = f.key;
        const std::string this_section = key.substr(0, key.find('.'));
        if (this_section != section) {
            if (!out.empty()) out += "\n";
            section = this_section;
        }
        out += key;
        out += " = ";
        out += f.get(config);
        if (f.derived) out += "  # derived default";
        out += "\n";
    }
    return out;
}

}  // namespace groupnav::cfg
