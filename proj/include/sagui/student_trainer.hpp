#pragma once

#include "sagui/composite_sampling.hpp"
#include "sagui/guide_trainer.hpp"

namespace sagui {

/// How the guide log-prob bonus is weighted in r'' = r + omega r^guide.
enum class Regularization { adaptive, fixed, decayed, none };

inline Regularization parse_regularization(const std::string& name) {
    if (name == "adaptive") return Regularization::adaptive;
    if (name == "fixreg") return Regularization::fixed;
    if (name == "decreg") return Regularization::decayed;
    if (name == "none") return Regularization::none;
    throw ConfigError("unknown regularization '" + name + "' (expected adaptive, fixreg, decreg, none)");
}

inline const char* to_string(Regularization r) {
    switch (r) {
    case Regularization::adaptive: return "adaptive";
    case Regularization::fixed: return "fixreg";
    case Regularization::decayed: return "decreg";
    case Regularization::none: return "none";
    }
    return "?";
}

struct IsBounds {
    double low = 0.1;
    double high = 2.0;
};

/// 1 when the student acted; otherwise clamp(pi_student / pi_b, low, high).
inline double is_ratio(double student_logprob, double behaviour_logprob, Behaviour b, IsBounds bounds = {}) {
    if (b == Behaviour::student) return 1.0;
    return std::clamp(std::exp(student_logprob - behaviour_logprob), bounds.low, bounds.high);
}

/// r'' = r + beta log pi_guide(a | Xi(s)).
inline double regularized_reward(double task_reward, double beta, double guide_logprob) {
    return task_reward + beta * guide_logprob;
}

struct KlIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double diff = 0.0;
};

/// omega log(g/s) + alpha (-log s) against omega log g + (omega + alpha)(-log s).
inline KlIdentity kl_identity_check(double omega, double alpha, double guide_prob, double student_prob) {
    if (!(guide_prob > 0.0 && guide_prob <= 1.0 && student_prob > 0.0 && student_prob <= 1.0))
        throw InvalidInput("kl_identity_check: probabilities must lie in (0, 1]");
    KlIdentity k;
    k.lhs = omega * std::log(guide_prob / student_prob) + alpha * -std::log(student_prob);
    k.rhs = omega * std::log(guide_prob) + (omega + alpha) * -std::log(student_prob);
    k.diff = std::abs(k.lhs - k.rhs);
    return k;
}

struct StudentConfig {
    SamplingMode sampling = SamplingMode::control_switch;
    Regularization regularization = Regularization::adaptive;
    /// Weight for fixreg, and the starting weight for decreg.
    double omega = 0.1;
    IsBounds is_bounds;
    double p_student_buffer = 0.75;
    /// Linear-decay step per epoch; unset means 1 / epochs.
    std::optional<double> upsilon;
    LoopConfig loop;
    SacConfig sac;
};

/// SAC-Lagrangian from scratch: student-only sampling and no guide bonus.
inline StudentConfig scratch_baseline(StudentConfig cfg) {
    cfg.sampling = SamplingMode::student_only;
    cfg.regularization = Regularization::none;
    return cfg;
}

/// Behaviour policy pi_b composed from student and guide for evaluation episodes.
template <class Student, class Guide, class Env> struct CompositeEpisodePolicy {
    const Student& student;
    const Guide& guide;
    const Env& env;
    BehaviourSelector selector;
    bool first = true;

    void begin_episode(Rng&) { first = true; }

    template <class State> typename Student::Action act(const State& s, double last_cost, Rng& rng) {
        const Behaviour b = first ? selector.episode_start(rng) : selector.next(last_cost, rng);
        first = false;
        if (b == Behaviour::guide) return guide.sample(env.guide_observe(s), rng).action;
        return student.sample(env.observe(s), rng).action;
    }
};

template <class Agent> struct StudentResult {
    Agent agent;
    std::vector<EpochRecord> log;
    std::size_t buffer_fallbacks = 0;
};

template <class Action> using SampleCallback = std::function<void(const TransitionSample<Action>&)>;

/// Guided safe exploration: collect with pi_b, store (s, a, r, r^guide, c, I, s'), and train
/// the student with IS-weighted SAC-Lagrangian steps on r'' composed at update time.
/// The guide is read-only and consumes Xi-mapped observations. `on_sample` sees every
/// transition as it enters the buffers.
template <class Agent, class TargetEnv, class Guide>
StudentResult<Agent> train_student(const TargetEnv& env, const Guide& guide, const StudentConfig& cfg,
                                   const EpochCallback& on_epoch = {},
                                   const SampleCallback<typename Agent::Action>& on_sample = {}) {
    using Action = typename Agent::Action;
    Agent agent = make_agent<Agent>(env, env.observation_dim(), cfg.sac);

    const SeedStreams streams(cfg.loop.seed);
    Rng init_rng = streams.rng("init");
    agent.initialize(init_rng);
    Rng env_rng = streams.rng("env"), action_rng = streams.rng("action");
    Rng buffer_rng = streams.rng("buffer"), update_rng = streams.rng("update");

    const double upsilon = cfg.upsilon.value_or(1.0 / static_cast<double>(std::max<std::size_t>(1, cfg.loop.epochs)));
    BehaviourSelector selector(cfg.sampling, upsilon);
    DualBuffers<TransitionSample<Action>> buffers(cfg.loop.buffer_capacity, cfg.p_student_buffer);

    auto omega = [&](std::size_t epoch) {
        switch (cfg.regularization) {
        case Regularization::adaptive: return agent.beta();
        case Regularization::fixed: return cfg.omega;
        case Regularization::decayed:
            return cfg.omega * std::max(0.0, 1.0 - static_cast<double>(epoch - 1) / static_cast<double>(cfg.loop.epochs));
        case Regularization::none: return 0.0;
        }
        return 0.0;
    };

    std::vector<EpochRecord> log;
    auto s = env.reset(env_rng);
    bool episode_start = true;
    double last_cost = 0.0;
    std::size_t steps = 0;
    for (std::size_t epoch = 1; epoch <= cfg.loop.epochs; ++epoch) {
        selector.iteration_start();
        std::size_t guide_steps = 0;
        for (std::size_t k = 0; k < cfg.loop.steps_per_epoch; ++k) {
            const Behaviour b = episode_start ? selector.episode_start(action_rng) : selector.next(last_cost, action_rng);
            episode_start = false;
            TransitionSample<Action> x;
            x.observation = env.observe(s);
            const auto guide_obs = env.guide_observe(s);
            if (b == Behaviour::guide) {
                auto ps = guide.sample(guide_obs, action_rng);
                x.action = std::move(ps.action);
                x.behaviour_logprob = x.guide_logprob = ps.log_prob;
                x.student_logprob = agent.log_prob(x.observation, x.action);
                ++guide_steps;
            } else {
                auto ps = agent.sample(x.observation, action_rng);
                x.action = std::move(ps.action);
                x.behaviour_logprob = x.student_logprob = ps.log_prob;
                x.guide_logprob = guide.log_prob(guide_obs, x.action);
            }
            x.behaviour = b;
            x.is_ratio = is_ratio(x.student_logprob, x.behaviour_logprob, b, cfg.is_bounds);
            const auto step = env.step(s, x.action, env_rng);
            x.task_reward = step.reward;
            x.cost = step.cost;
            x.next_observation = env.observe(step.next);
            x.terminal = step.terminal;
            if (on_sample) on_sample(x);
            buffers.push(std::move(x), b);
            last_cost = step.cost;
            if (step.terminal || step.truncated) {
                s = env.reset(env_rng);
                episode_start = true;
                last_cost = 0.0;
            } else {
                s = step.next;
            }
            ++steps;
            if (buffers.size() < cfg.loop.update_after) continue;
            for (std::size_t u = 0; u < cfg.loop.updates_per_step; ++u) {
                const auto raw = buffers.sample(agent.config().batch_size, buffer_rng);
                const double w = omega(epoch);
                std::vector<UpdateSample<Action>> batch;
                batch.reserve(raw.size());
                for (const auto& r : raw)
                    batch.push_back(to_update(r, r.task_reward + w * r.guide_logprob, r.is_ratio));
                agent.train_step(batch, update_rng);
            }
        }

        const std::uint64_t eval_seed = streams.seed("eval", epoch);
        CompositeEpisodePolicy<Agent, Guide, TargetEnv> behaviour{agent, guide, env, selector};
        const auto eval_b = evaluate(env, behaviour, cfg.loop.eval_episodes, eval_seed, true);
        auto student_policy = episode_policy(agent, [&env](const auto& st) { return env.observe(st); });
        const auto eval_s = evaluate(env, student_policy, cfg.loop.eval_episodes, eval_seed);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.env_steps = steps;
        rec.return_pib = eval_b.mean_return;
        rec.cost_return_pib = eval_b.mean_cost_return;
        rec.episodic_cost_pib = eval_b.mean_episodic_cost;
        rec.return_pi_target = eval_s.mean_return;
        rec.cost_return_pi_target = eval_s.mean_cost_return;
        rec.episodic_cost_pi_target = eval_s.mean_episodic_cost;
        rec.alpha = agent.alpha();
        rec.beta = agent.beta();
        rec.p_pi = cfg.sampling == SamplingMode::control_switch
                       ? static_cast<double>(guide_steps) / static_cast<double>(cfg.loop.steps_per_epoch)
                       : selector.guide_probability();
        rec.coverage = static_cast<double>(coverage(eval_b.trajectories, cfg.loop.coverage_cell));
        log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return {std::move(agent), std::move(log), buffers.fallbacks()};
}

} // namespace sagui
