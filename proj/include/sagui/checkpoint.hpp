#pragma once

#include "sagui/cmdp.hpp"
#include "sagui/sac_lagrangian.hpp"

#include <fstream>
#include <sstream>

namespace sagui {

// Text checkpoint, format version 1:
//   sagui-checkpoint 1
//   kind continuous|discrete
//   obs_dim, actions (action_dim or count), bound, hidden sizes, config scalars, raw duals
//   params <n>
//   <one value per line: policy, reward critic, reward target, cost critic, cost target>
// Values use the shortest round-trip decimal form, so save/load is value-exact.

namespace detail {

inline std::string format_sizes(const std::vector<std::size_t>& v) {
    std::string out = std::to_string(v.size());
    for (auto x : v) out += " " + std::to_string(x);
    return out;
}

template <class T> T read_value(std::istream& in, const char* key) {
    std::string word;
    if (!(in >> word) || word != key) throw LoadError(std::string("checkpoint: expected '") + key + "'");
    if constexpr (std::is_same_v<T, double>) {
        std::string token;
        if (!(in >> token)) throw LoadError(std::string("checkpoint: missing value for ") + key);
        try {
            return parse_double(token);
        } catch (const std::exception&) {
            throw LoadError(std::string("checkpoint: bad number for ") + key);
        }
    } else {
        T value{};
        if (!(in >> value)) throw LoadError(std::string("checkpoint: missing value for ") + key);
        return value;
    }
}

} // namespace detail

template <class Policy> void save_checkpoint(std::ostream& out, const SacAgent<Policy>& agent) {
    using detail::format_double;
    const auto& cfg = agent.config();
    constexpr bool continuous = SacAgent<Policy>::continuous;
    out << "sagui-checkpoint 1\n";
    out << "kind " << (continuous ? "continuous" : "discrete") << '\n';
    out << "obs_dim " << agent.policy().observation_dim() << '\n';
    if constexpr (continuous) {
        out << "actions " << agent.policy().action_dim() << '\n';
        out << "bound " << format_double(agent.policy().bound()) << '\n';
    } else {
        out << "actions " << agent.policy().num_actions() << '\n';
        out << "bound 0\n";
    }
    out << "hidden " << detail::format_sizes(cfg.hidden) << '\n';
    out << "discount " << format_double(cfg.discount) << '\n';
    out << "polyak " << format_double(cfg.polyak) << '\n';
    out << "optimizer " << to_string(cfg.optimizer) << '\n';
    out << "lr " << format_double(cfg.lr_policy) << ' ' << format_double(cfg.lr_reward) << ' '
        << format_double(cfg.lr_cost) << ' ' << format_double(cfg.lr_alpha) << ' ' << format_double(cfg.lr_beta)
        << '\n';
    out << "target_entropy " << format_double(agent.target_entropy()) << '\n';
    out << "threshold " << format_double(cfg.threshold) << '\n';
    out << "fix_alpha " << (cfg.fix_alpha ? 1 : 0) << '\n';
    out << "batch_size " << cfg.batch_size << '\n';
    out << "alpha_raw " << format_double(agent.alpha_param().raw) << '\n';
    out << "beta_raw " << format_double(agent.beta_param().raw) << '\n';
    const DenseNet* nets[] = {&agent.policy().net(), &agent.reward_critic(), &agent.reward_target(),
                              &agent.cost_critic(), &agent.cost_target()};
    std::size_t total = 0;
    for (const auto* n : nets) total += n->num_params();
    out << "params " << total << '\n';
    for (const auto* n : nets)
        for (double p : n->params()) out << format_double(p) << '\n';
}

template <class Policy> SacAgent<Policy> load_checkpoint(std::istream& in) {
    using detail::read_value;
    constexpr bool continuous = SacAgent<Policy>::continuous;
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "sagui-checkpoint") throw LoadError("not a sagui checkpoint");
    if (version != 1) throw LoadError("unsupported checkpoint version " + std::to_string(version));
    const auto kind = read_value<std::string>(in, "kind");
    if (kind != (continuous ? "continuous" : "discrete")) throw LoadError("checkpoint kind mismatch: " + kind);
    const auto obs_dim = read_value<std::size_t>(in, "obs_dim");
    const auto actions = read_value<std::size_t>(in, "actions");
    const double bound = read_value<double>(in, "bound");
    SacConfig cfg;
    const auto layers = read_value<std::size_t>(in, "hidden");
    cfg.hidden.resize(layers);
    for (auto& h : cfg.hidden)
        if (!(in >> h)) throw LoadError("checkpoint: bad hidden sizes");
    cfg.discount = read_value<double>(in, "discount");
    cfg.polyak = read_value<double>(in, "polyak");
    cfg.optimizer = parse_optimizer_kind(read_value<std::string>(in, "optimizer"));
    cfg.lr_policy = read_value<double>(in, "lr");
    std::string token;
    for (double* lr : {&cfg.lr_reward, &cfg.lr_cost, &cfg.lr_alpha, &cfg.lr_beta}) {
        if (!(in >> token)) throw LoadError("checkpoint: bad learning rates");
        *lr = detail::parse_double(token);
    }
    cfg.target_entropy = read_value<double>(in, "target_entropy");
    cfg.threshold = read_value<double>(in, "threshold");
    cfg.fix_alpha = read_value<int>(in, "fix_alpha") != 0;
    cfg.batch_size = read_value<std::size_t>(in, "batch_size");
    const double alpha_raw = read_value<double>(in, "alpha_raw");
    const double beta_raw = read_value<double>(in, "beta_raw");

    SacAgent<Policy> agent = [&] {
        if constexpr (continuous)
            return SacAgent<Policy>(obs_dim, actions, bound, cfg);
        else
            return SacAgent<Policy>(obs_dim, actions, cfg);
    }();
    agent.alpha_param().raw = alpha_raw;
    agent.beta_param().raw = beta_raw;
    DenseNet* nets[] = {&agent.policy().net(), &agent.reward_critic(), &agent.reward_target(), &agent.cost_critic(),
                        &agent.cost_target()};
    std::size_t expected = 0;
    for (auto* n : nets) expected += n->num_params();
    if (read_value<std::size_t>(in, "params") != expected) throw LoadError("checkpoint: parameter count mismatch");
    for (auto* n : nets)
        for (double& p : n->params()) {
            if (!(in >> token)) throw LoadError("checkpoint: truncated parameter list");
            p = detail::parse_double(token);
        }
    return agent;
}

template <class Policy> void save_checkpoint(const std::string& path, const SacAgent<Policy>& agent) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write checkpoint " + path);
    save_checkpoint(out, agent);
}

template <class Policy> SacAgent<Policy> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open checkpoint " + path);
    return load_checkpoint<Policy>(in);
}

} // namespace sagui
