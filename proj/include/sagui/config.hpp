#pragma once

#include "sagui/grid.hpp"
#include "sagui/point_nav.hpp"
#include "sagui/student_trainer.hpp"

#include <fstream>
#include <map>
#include <ostream>

namespace sagui {

struct ConfigKey {
    std::string name;
    std::string fallback;
    std::string help;
};

namespace detail {

inline void add_role_keys(std::vector<ConfigKey>& keys, const std::string& role) {
    const std::vector<ConfigKey> shared = {
        {"epochs", "50", "training epochs"},
        {"steps_per_epoch", "1000", "environment steps per epoch"},
        {"updates_per_step", "1", "gradient steps per environment step"},
        {"update_after", "256", "buffer size before the first update"},
        {"buffer_capacity", "1000000", "replay capacity per buffer"},
        {"eval_episodes", "100", "evaluation episodes per epoch"},
        {"coverage_cell", "0.25", "cell side for the coverage count"},
        {"hidden", "32,32", "hidden layer sizes, or none"},
        {"polyak", "0.005", "target smoothing coefficient"},
        {"optimizer", "adam", "sgd or adam"},
        {"lr_policy", "0.001", "policy learning rate"},
        {"lr_reward", "0.001", "reward critic learning rate"},
        {"lr_cost", "0.001", "cost critic learning rate"},
        {"lr_alpha", "0.001", "entropy multiplier learning rate"},
        {"lr_beta", "0.001", "safety multiplier learning rate"},
        {"target_entropy", "auto", "entropy floor in nats; auto = -action_dim or 0.2"},
        {"fix_alpha", "false", "keep alpha at init_alpha"},
        {"init_alpha", "0.1", "initial entropy multiplier"},
        {"init_beta", "0.1", "initial safety multiplier"},
        {"batch_size", "32", "minibatch size"},
    };
    for (const auto& k : shared) keys.push_back({role + "." + k.name, k.fallback, k.help});
}

} // namespace detail

/// Every recognised key with its default. Defaults describe the full-scale static task;
/// the desk profiles below shrink them.
inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k = {
            {"run.profile", "grid", "default set: grid, nav or full"},
            {"run.env", "grid", "grid or nav"},
            {"run.seed", "0", "master seed"},
            {"run.seeds", "1", "number of consecutive seeds for ablate"},
            {"run.jump_start_k", "3", "epochs averaged by the jump-start metrics"},
            {"run.window", "3", "sustain window for time-to-safety and time-to-optimum"},
            {"run.optimum_tol", "0.05", "relative tolerance for time-to-optimum"},
            {"grid.width", "4", ""},
            {"grid.height", "4", ""},
            {"grid.hazards", "1,2;2,1", "cells x,y;x,y"},
            {"grid.goals", "3,3;3,0;0,3", "cells x,y;x,y"},
            {"grid.starts", "0,0", "cells x,y;x,y"},
            {"grid.slip_prob", "0.1", ""},
            {"grid.goal_reward", "1", ""},
            {"grid.horizon_cap", "100", ""},
            {"grid.discount", "0.9", ""},
            {"grid.target_threshold", "2", "d for the student"},
            {"grid.source_threshold", "1", "d for the guide"},
            {"nav.half_width", "2", ""},
            {"nav.hazards", "0,0,0.5", "circles x,y,r;x,y,r"},
            {"nav.goal", "1.2,1.2,0.3", "circle x,y,r"},
            {"nav.randomize_goal", "false", ""},
            {"nav.start", "-1.1,-1.1,0.3", "circle x,y,r"},
            {"nav.source_uniform_start", "0.5", "probability of a uniform source start"},
            {"nav.action_bound", "1", ""},
            {"nav.dt", "0.1", ""},
            {"nav.damping", "5", ""},
            {"nav.max_accel", "5", ""},
            {"nav.goal_bonus", "1", ""},
            {"nav.process_noise", "0", ""},
            {"nav.horizon_cap", "1000", ""},
            {"nav.discount", "0.99", ""},
            {"nav.target_threshold", "5", "d for the student"},
            {"nav.source_threshold", "0.05", "d for the guide"},
            {"guide.mode", "sagui", "sagui or maxent"},
            {"guide.maxent_fix_alpha", "true", "MaxEnt keeps alpha fixed"},
            {"student.sampling", "control-switch", "linear-decay, control-switch, guisam, stusam"},
            {"student.regularization", "adaptive", "adaptive, fixreg, decreg, none"},
            {"student.omega", "0.1", "fixreg weight and decreg start"},
            {"student.is_low", "0.1", "IS clip lower bound"},
            {"student.is_high", "2", "IS clip upper bound"},
            {"student.p_student_buffer", "0.75", "probability of drawing from the student buffer"},
            {"student.upsilon", "auto", "linear-decay step; auto = 1 / epochs"},
        };
        detail::add_role_keys(k, "guide");
        detail::add_role_keys(k, "student");
        return k;
    }();
    return keys;
}

/// Desk-scale overrides layered on the registry defaults.
inline std::map<std::string, std::string> profile_defaults(const std::string& profile) {
    if (profile == "full") return {};
    if (profile == "grid") {
        std::map<std::string, std::string> p = {{"run.env", "grid"}};
        for (const std::string role : {"guide", "student"}) {
            p[role + ".hidden"] = "none";
            p[role + ".update_after"] = "64";
            p[role + ".eval_episodes"] = "20";
            p[role + ".coverage_cell"] = "1";
            p[role + ".epochs"] = "60";
        }
        p["guide.optimizer"] = "adam";
        p["guide.target_entropy"] = "1";
        for (const char* k : {"lr_policy", "lr_reward", "lr_cost"}) p[std::string("guide.") + k] = "0.01";
        p["student.optimizer"] = "sgd";
        p["student.target_entropy"] = "0.05";
        for (const char* k : {"lr_policy", "lr_reward", "lr_cost"}) p[std::string("student.") + k] = "0.5";
        p["student.lr_alpha"] = p["student.lr_beta"] = "0.05";
        return p;
    }
    if (profile == "nav") {
        std::map<std::string, std::string> p = {{"run.env", "nav"}, {"nav.horizon_cap", "100"}};
        p["guide.epochs"] = "20";
        p["student.epochs"] = "10";
        for (const std::string role : {"guide", "student"}) {
            p[role + ".steps_per_epoch"] = "2000";
            p[role + ".eval_episodes"] = "10";
            p[role + ".lr_alpha"] = p[role + ".lr_beta"] = "0.01";
        }
        return p;
    }
    throw ConfigError("unknown profile '" + profile + "' (expected grid, nav or full)");
}

inline bool is_config_key(const std::string& key) {
    for (const auto& k : config_keys())
        if (k.name == key) return true;
    return false;
}

inline std::string valid_keys_message() {
    std::string out = "valid keys:";
    for (const auto& k : config_keys()) out += "\n  " + k.name;
    return out;
}

/// Parses "key=value" command-line overrides.
inline std::pair<std::string, std::string> parse_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + text + "' is not key=value");
    return {KeyValues::trim(text.substr(0, eq)), KeyValues::trim(text.substr(eq + 1))};
}

/// defaults < profile < file < overrides. The profile is read from the overrides first,
/// then the file. Any unknown key is a ConfigError naming every valid key.
inline KeyValues resolve_config(const KeyValues& file, const std::vector<std::pair<std::string, std::string>>& overrides) {
    auto check = [](const std::string& key) {
        if (!is_config_key(key)) throw ConfigError("unknown key '" + key + "'\n" + valid_keys_message());
    };
    for (const auto& [key, value] : file.entries()) check(key);
    for (const auto& [key, value] : overrides) check(key);

    std::string profile = file.get_or("run.profile", "grid");
    for (const auto& [key, value] : overrides)
        if (key == "run.profile") profile = value;

    KeyValues out;
    for (const auto& k : config_keys()) out.set(k.name, k.fallback);
    for (const auto& [key, value] : profile_defaults(profile)) out.set(key, value);
    for (const auto& [key, value] : file.entries()) out.set(key, value);
    for (const auto& [key, value] : overrides) out.set(key, value);
    out.set("run.profile", profile);
    return out;
}

inline KeyValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    return KeyValues::parse(in);
}

/// Writes the resolved values as sectioned key = value text that parses back to itself.
inline void write_config(std::ostream& out, const KeyValues& kv) {
    std::string section;
    for (const auto& [key, value] : kv.entries()) {
        const auto dot = key.find('.');
        const std::string s = key.substr(0, dot), name = key.substr(dot + 1);
        if (s != section) {
            out << (section.empty() ? "" : "\n") << '[' << s << "]\n";
            section = s;
        }
        out << name << " = " << value << '\n';
    }
}

namespace detail {

inline std::vector<std::size_t> parse_hidden(const std::string& key, const std::string& text) {
    std::vector<std::size_t> out;
    if (text.empty() || text == "none") return out;
    for (const auto& g : KeyValues::parse_groups(text))
        for (double v : g) {
            if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("key '" + key + "' expects positive sizes");
            out.push_back(static_cast<std::size_t>(v));
        }
    return out;
}

inline std::size_t count(const KeyValues& kv, const std::string& key) {
    const long long v = kv.integer(key);
    if (v < 0) throw ConfigError("key '" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

inline std::string choice(const KeyValues& kv, const std::string& key, std::initializer_list<const char*> allowed) {
    const auto& v = kv.get(key);
    for (const char* a : allowed)
        if (v == a) return v;
    std::string msg = "key '" + key + "' expects one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw ConfigError(msg + ", got '" + v + "'");
}

} // namespace detail

inline LoopConfig loop_config(const KeyValues& kv, const std::string& role) {
    LoopConfig c;
    c.epochs = detail::count(kv, role + ".epochs");
    c.steps_per_epoch = detail::count(kv, role + ".steps_per_epoch");
    c.updates_per_step = detail::count(kv, role + ".updates_per_step");
    c.update_after = detail::count(kv, role + ".update_after");
    c.buffer_capacity = detail::count(kv, role + ".buffer_capacity");
    c.eval_episodes = detail::count(kv, role + ".eval_episodes");
    c.coverage_cell = kv.number(role + ".coverage_cell");
    c.seed = static_cast<std::uint64_t>(kv.integer("run.seed"));
    if (c.epochs == 0 || c.eval_episodes == 0) throw ConfigError(role + ": epochs and eval_episodes must be positive");
    return c;
}

inline SacConfig sac_config(const KeyValues& kv, const std::string& role) {
    SacConfig c;
    c.hidden = detail::parse_hidden(role + ".hidden", kv.get(role + ".hidden"));
    c.polyak = kv.number(role + ".polyak");
    c.optimizer = parse_optimizer_kind(detail::choice(kv, role + ".optimizer", {"sgd", "adam"}));
    c.lr_policy = kv.number(role + ".lr_policy");
    c.lr_reward = kv.number(role + ".lr_reward");
    c.lr_cost = kv.number(role + ".lr_cost");
    c.lr_alpha = kv.number(role + ".lr_alpha");
    c.lr_beta = kv.number(role + ".lr_beta");
    if (kv.get(role + ".target_entropy") != "auto") c.target_entropy = kv.number(role + ".target_entropy");
    c.fix_alpha = kv.flag_or(role + ".fix_alpha", false);
    c.init_alpha = kv.number(role + ".init_alpha");
    c.init_beta = kv.number(role + ".init_beta");
    c.batch_size = detail::count(kv, role + ".batch_size");
    if (c.batch_size == 0) throw ConfigError(role + ".batch_size must be positive");
    if (!(c.init_alpha > 0.0) || !(c.init_beta > 0.0)) throw ConfigError(role + ": dual initial values must be positive");
    return c;
}

inline GuideConfig guide_config(const KeyValues& kv) {
    GuideConfig c;
    c.mode = parse_guide_mode(kv.get("guide.mode"));
    c.maxent_fix_alpha = kv.flag_or("guide.maxent_fix_alpha", true);
    c.loop = loop_config(kv, "guide");
    c.sac = sac_config(kv, "guide");
    return c;
}

inline StudentConfig student_config(const KeyValues& kv) {
    StudentConfig c;
    c.sampling = parse_sampling_mode(kv.get("student.sampling"));
    c.regularization = parse_regularization(kv.get("student.regularization"));
    c.omega = kv.number("student.omega");
    c.is_bounds = {kv.number("student.is_low"), kv.number("student.is_high")};
    c.p_student_buffer = kv.number("student.p_student_buffer");
    if (kv.get("student.upsilon") != "auto") c.upsilon = kv.number("student.upsilon");
    c.loop = loop_config(kv, "student");
    c.sac = sac_config(kv, "student");
    if (!(c.omega >= 0.0)) throw ConfigError("student.omega must be nonnegative");
    if (!(c.is_bounds.low <= 1.0 && 1.0 <= c.is_bounds.high))
        throw ConfigError("student IS bounds must satisfy is_low <= 1 <= is_high");
    return c;
}

inline std::string env_kind(const KeyValues& kv) { return detail::choice(kv, "run.env", {"grid", "nav"}); }

inline GridHazardSpec grid_spec(const KeyValues& kv) {
    try {
        auto s = grid_spec_from(kv, "grid.");
        if (s.source_threshold > s.target_threshold) throw ConfigError("grid: source_threshold must not exceed target_threshold");
        return s;
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

inline PointNavSpec nav_spec(const KeyValues& kv) {
    try {
        auto s = point_nav_spec_from(kv, "nav.");
        if (s.source_threshold > s.target_threshold) throw ConfigError("nav: source_threshold must not exceed target_threshold");
        return s;
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

/// Validates every typed view of the configuration without running anything.
inline void validate_config(const KeyValues& kv) {
    (void)env_kind(kv);
    (void)grid_spec(kv);
    (void)nav_spec(kv);
    (void)guide_config(kv);
    (void)student_config(kv);
    for (const char* k : {"run.seeds", "run.jump_start_k", "run.window"})
        if (detail::count(kv, k) == 0) throw ConfigError(std::string(k) + " must be positive");
    (void)kv.number("run.optimum_tol");
}

} // namespace sagui
