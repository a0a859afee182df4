#pragma once

#include "sagui/metrics.hpp"
#include "sagui/replay_buffer.hpp"
#include "sagui/sac_lagrangian.hpp"

#include <functional>

namespace sagui {

enum class GuideMode { sagui, maxent };

inline GuideMode parse_guide_mode(const std::string& name) {
    if (name == "sagui") return GuideMode::sagui;
    if (name == "maxent") return GuideMode::maxent;
    throw ConfigError("unknown guide mode '" + name + "' (expected sagui or maxent)");
}

inline const char* to_string(GuideMode m) { return m == GuideMode::sagui ? "sagui" : "maxent"; }

/// Loop sizes shared by both trainers. One epoch = steps_per_epoch environment steps
/// followed by an evaluation of eval_episodes seeded episodes.
struct LoopConfig {
    std::size_t epochs = 10;
    std::size_t steps_per_epoch = 1000;
    std::size_t updates_per_step = 1;
    std::size_t update_after = 256;
    std::size_t buffer_capacity = 1000000;
    std::size_t eval_episodes = 100;
    double coverage_cell = 0.25;
    std::uint64_t seed = 0;
};

struct GuideConfig {
    GuideMode mode = GuideMode::sagui;
    /// MaxEnt keeps alpha at its initial value (the fixed-temperature objective).
    bool maxent_fix_alpha = true;
    LoopConfig loop;
    SacConfig sac;
};

template <class Agent> struct TrainingResult {
    Agent agent;
    std::vector<EpochRecord> log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Builds an agent for `env` with discount and threshold taken from the environment.
template <class Agent, class Env> Agent make_agent(const Env& env, std::size_t obs_dim, SacConfig sac) {
    sac.discount = env.discount();
    sac.threshold = env.threshold();
    if constexpr (Agent::continuous)
        return Agent(obs_dim, env.action_dim(), env.action_bound(), std::move(sac));
    else
        return Agent(obs_dim, env.num_actions(), std::move(sac));
}

template <class Action>
UpdateSample<Action> to_update(const TransitionSample<Action>& x, double reward, double weight) {
    return {x.observation, x.action, reward, x.cost, x.next_observation, x.terminal, weight};
}

/// Reward-free safe-exploration training on a source task. SaGui mode rewards the
/// displacement delta(f(s_t), f(s_{t+1})); MaxEnt mode uses no reward at all.
template <class Agent, class SourceEnv>
TrainingResult<Agent> train_guide(const SourceEnv& env, const GuideConfig& cfg, const EpochCallback& on_epoch = {}) {
    using Action = typename Agent::Action;
    SacConfig sac = cfg.sac;
    if (cfg.mode == GuideMode::maxent && cfg.maxent_fix_alpha) sac.fix_alpha = true;
    Agent agent = make_agent<Agent>(env, env.observation_dim(), sac);

    const SeedStreams streams(cfg.loop.seed);
    Rng init_rng = streams.rng("init");
    agent.initialize(init_rng);
    Rng env_rng = streams.rng("env"), action_rng = streams.rng("action");
    Rng buffer_rng = streams.rng("buffer"), update_rng = streams.rng("update");

    ReplayBuffer<TransitionSample<Action>> buffer(cfg.loop.buffer_capacity);
    std::vector<EpochRecord> log;
    auto s = env.reset(env_rng);
    std::size_t steps = 0;
    for (std::size_t epoch = 1; epoch <= cfg.loop.epochs; ++epoch) {
        for (std::size_t k = 0; k < cfg.loop.steps_per_epoch; ++k) {
            TransitionSample<Action> x;
            x.observation = env.observe(s);
            x.action = agent.sample(x.observation, action_rng).action;
            const auto step = env.step(s, x.action, env_rng);
            x.task_reward = cfg.mode == GuideMode::sagui ? auxiliary_reward(env.position(s), env.position(step.next)) : 0.0;
            x.cost = step.cost;
            x.next_observation = env.observe(step.next);
            x.terminal = step.terminal;
            x.behaviour = Behaviour::guide;
            buffer.push(std::move(x));
            s = (step.terminal || step.truncated) ? env.reset(env_rng) : step.next;
            ++steps;
            if (buffer.size() < cfg.loop.update_after) continue;
            for (std::size_t u = 0; u < cfg.loop.updates_per_step; ++u) {
                const auto raw = buffer.sample(agent.config().batch_size, buffer_rng);
                std::vector<UpdateSample<Action>> batch;
                batch.reserve(raw.size());
                for (const auto& r : raw) batch.push_back(to_update(r, r.task_reward, 1.0));
                agent.train_step(batch, update_rng);
            }
        }
        auto policy = episode_policy(agent, [&env](const auto& st) { return env.observe(st); });
        const auto eval = evaluate(env, policy, cfg.loop.eval_episodes, streams.seed("eval", epoch), true);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.env_steps = steps;
        rec.return_pib = rec.return_pi_target = eval.mean_return;
        rec.cost_return_pib = rec.cost_return_pi_target = eval.mean_cost_return;
        rec.episodic_cost_pib = rec.episodic_cost_pi_target = eval.mean_episodic_cost;
        rec.alpha = agent.alpha();
        rec.beta = agent.beta();
        rec.p_pi = 1.0;
        rec.coverage = static_cast<double>(coverage(eval.trajectories, cfg.loop.coverage_cell));
        log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return {std::move(agent), std::move(log)};
}

} // namespace sagui
