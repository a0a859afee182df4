#pragma once

#include "sagui/auxiliary_reward.hpp"
#include "sagui/cmdp.hpp"
#include "sagui/envs.hpp"

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace sagui {

/// One row of the per-epoch CSV. The two episodic_cost columns are the undiscounted
/// per-episode cost sums; the cost_return columns are discounted.
struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t env_steps = 0;
    double return_pib = 0.0;
    double cost_return_pib = 0.0;
    double return_pi_target = 0.0;
    double cost_return_pi_target = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double p_pi = 0.0;
    double coverage = std::numeric_limits<double>::quiet_NaN();
    double episodic_cost_pib = 0.0;
    double episodic_cost_pi_target = 0.0;
};

inline const char* epoch_csv_header() {
    return "epoch,env_steps,return_pib,cost_return_pib,return_pi_target,cost_return_pi_target,alpha,beta,p_pi,"
           "coverage,episodic_cost_pib,episodic_cost_pi_target";
}

inline void write_epoch_row(std::ostream& out, const EpochRecord& r) {
    using detail::format_double;
    out << r.epoch << ',' << r.env_steps << ',' << format_double(r.return_pib) << ','
        << format_double(r.cost_return_pib) << ',' << format_double(r.return_pi_target) << ','
        << format_double(r.cost_return_pi_target) << ',' << format_double(r.alpha) << ',' << format_double(r.beta)
        << ',' << format_double(r.p_pi) << ',' << format_double(r.coverage) << ','
        << format_double(r.episodic_cost_pib) << ',' << format_double(r.episodic_cost_pi_target) << '\n';
}

inline void write_epoch_csv(std::ostream& out, const std::vector<EpochRecord>& records) {
    out << epoch_csv_header() << '\n';
    for (const auto& r : records) write_epoch_row(out, r);
}

inline std::vector<EpochRecord> read_epoch_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != epoch_csv_header()) throw LoadError("epoch CSV: unexpected header");
    std::vector<EpochRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 12) throw LoadError("epoch CSV: expected 12 columns in '" + line + "'");
        auto num = [&](std::size_t i) {
            if (cells[i] == "nan" || cells[i] == "-nan") return std::numeric_limits<double>::quiet_NaN();
            return detail::parse_double(cells[i]);
        };
        EpochRecord r;
        r.epoch = std::stoull(cells[0]);
        r.env_steps = std::stoull(cells[1]);
        r.return_pib = num(2);
        r.cost_return_pib = num(3);
        r.return_pi_target = num(4);
        r.cost_return_pi_target = num(5);
        r.alpha = num(6);
        r.beta = num(7);
        r.p_pi = num(8);
        r.coverage = num(9);
        r.episodic_cost_pib = num(10);
        r.episodic_cost_pi_target = num(11);
        out.push_back(r);
    }
    return out;
}

struct EpisodeResult {
    double discounted_return = 0.0;
    double discounted_cost = 0.0;
    double undiscounted_return = 0.0;
    double undiscounted_cost = 0.0;
    std::size_t length = 0;
    std::vector<Vec2> positions;
};

struct EvaluationResult {
    double mean_return = 0.0;
    double mean_cost_return = 0.0;
    double mean_episodic_cost = 0.0;
    std::vector<double> returns;
    std::vector<double> cost_returns;
    std::vector<double> episodic_costs;
    std::vector<std::vector<Vec2>> trajectories;
};

template <class State> double evaluation_reward(const TargetStep<State>& step, const Vec2&, const Vec2&) {
    return step.reward;
}

/// Source tasks have no reward; their "return" is the exploration reward r^delta.
template <class State> double evaluation_reward(const SourceStep<State>&, const Vec2& from, const Vec2& to) {
    return auxiliary_reward(from, to);
}

/// Runs one episode. `policy` provides begin_episode(rng) and act(state, last_cost, rng).
template <class Env, class EpisodePolicy>
EpisodeResult run_episode(const Env& env, EpisodePolicy& policy, Rng& env_rng, Rng& action_rng,
                          bool record_positions = false) {
    EpisodeResult out;
    auto s = env.reset(env_rng);
    policy.begin_episode(action_rng);
    double last_cost = 0.0, discount = 1.0;
    if (record_positions) out.positions.push_back(env.position(s));
    for (std::size_t t = 0; t < env.horizon(); ++t) {
        const auto a = policy.act(s, last_cost, action_rng);
        const auto step = env.step(s, a, env_rng);
        const double r = evaluation_reward(step, env.position(s), env.position(step.next));
        out.discounted_return += discount * r;
        out.discounted_cost += discount * step.cost;
        out.undiscounted_return += r;
        out.undiscounted_cost += step.cost;
        discount *= env.discount();
        ++out.length;
        last_cost = step.cost;
        s = step.next;
        if (record_positions) out.positions.push_back(env.position(s));
        if (step.terminal || step.truncated) break;
    }
    return out;
}

/// Seeded evaluation: episode i uses sub-streams i of the env and action streams of `seed`.
template <class Env, class EpisodePolicy>
EvaluationResult evaluate(const Env& env, EpisodePolicy& policy, std::size_t episodes, std::uint64_t seed,
                          bool record_positions = false) {
    if (episodes == 0) throw InvalidInput("evaluate: need at least one episode");
    const SeedStreams streams(seed);
    EvaluationResult out;
    for (std::size_t i = 0; i < episodes; ++i) {
        Rng env_rng = streams.rng("env", i);
        Rng action_rng = streams.rng("action", i);
        auto ep = run_episode(env, policy, env_rng, action_rng, record_positions);
        out.returns.push_back(ep.discounted_return);
        out.cost_returns.push_back(ep.discounted_cost);
        out.episodic_costs.push_back(ep.undiscounted_cost);
        if (record_positions) out.trajectories.push_back(std::move(ep.positions));
    }
    const double n = static_cast<double>(episodes);
    for (std::size_t i = 0; i < episodes; ++i) {
        out.mean_return += out.returns[i] / n;
        out.mean_cost_return += out.cost_returns[i] / n;
        out.mean_episodic_cost += out.episodic_costs[i] / n;
    }
    return out;
}

/// Stateless stochastic policy over observations produced by `observe`.
template <class Agent, class Observe> struct AgentEpisodePolicy {
    const Agent& agent;
    Observe observe;

    void begin_episode(Rng&) {}
    template <class State> typename Agent::Action act(const State& s, double, Rng& rng) {
        return agent.sample(observe(s), rng).action;
    }
};

template <class Agent, class Observe> AgentEpisodePolicy<Agent, Observe> episode_policy(const Agent& a, Observe o) {
    return {a, std::move(o)};
}

/// Mean over the first K epochs of (scratch - max(transfer, d)).
inline double safety_jump_start(const std::vector<double>& scratch, const std::vector<double>& transfer, double d,
                                std::size_t k) {
    if (k == 0 || scratch.size() < k || transfer.size() < k)
        throw InvalidInput("safety_jump_start: curves shorter than K");
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += scratch[i] - std::max(transfer[i], d);
    return sum / static_cast<double>(k);
}

/// Mean over the first K epochs of (transfer - scratch) returns.
inline double return_jump_start(const std::vector<double>& scratch, const std::vector<double>& transfer,
                                std::size_t k) {
    if (k == 0 || scratch.size() < k || transfer.size() < k)
        throw InvalidInput("return_jump_start: curves shorter than K");
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += transfer[i] - scratch[i];
    return sum / static_cast<double>(k);
}

namespace detail {

template <class Pred>
std::optional<std::size_t> first_sustained(const std::vector<double>& curve, std::size_t window, Pred ok) {
    if (window == 0) throw InvalidInput("window must be at least 1");
    std::size_t run = 0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        run = ok(curve[i]) ? run + 1 : 0;
        if (run == window) return i + 1 - window;
    }
    return std::nullopt;
}

} // namespace detail

/// First epoch from which the cost-return stays <= d for `window` consecutive epochs.
inline std::optional<std::size_t> time_to_safety(const std::vector<double>& curve, double d, std::size_t window = 3) {
    if (!curve.empty() && curve.size() < window) {
        bool all = true;
        for (double c : curve) all = all && c <= d;
        if (all) return 0;
    }
    return detail::first_sustained(curve, window, [d](double c) { return c <= d; });
}

/// First epoch from which the return stays >= optimum (1 - tol) for `window` epochs.
inline std::optional<std::size_t> time_to_optimum(const std::vector<double>& curve, double optimum, double tol,
                                                  std::size_t window = 3) {
    const double bar = optimum * (1.0 - tol);
    return detail::first_sustained(curve, window, [bar](double r) { return r >= bar; });
}

/// Distinct cells of side cell_size visited by any trajectory.
inline std::size_t coverage(const std::vector<std::vector<Vec2>>& trajectories, double cell_size) {
    if (!(cell_size > 0.0)) throw InvalidInput("coverage: cell_size must be positive");
    std::vector<std::pair<long long, long long>> cells;
    for (const auto& traj : trajectories)
        for (const auto& p : traj)
            cells.emplace_back(static_cast<long long>(std::floor(p[0] / cell_size)),
                               static_cast<long long>(std::floor(p[1] / cell_size)));
    std::sort(cells.begin(), cells.end());
    return static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
}

inline std::vector<double> column(const std::vector<EpochRecord>& records, double EpochRecord::*field) {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.*field);
    return out;
}

} // namespace sagui
