#pragma once

#include "sagui/cmdp.hpp"
#include "sagui/optimizer.hpp"
#include "sagui/policies.hpp"

#include <optional>
#include <type_traits>

namespace sagui {

struct SacConfig {
    std::vector<std::size_t> hidden{32, 32};
    double discount = 0.99;
    double polyak = 0.005;
    OptimizerKind optimizer = OptimizerKind::adam;
    double lr_policy = 0.001;
    double lr_reward = 0.001;
    double lr_cost = 0.001;
    double lr_alpha = 0.001;
    double lr_beta = 0.001;
    /// H-bar; unset means -action_dim (continuous) or 0.2 nats (discrete).
    std::optional<double> target_entropy;
    double threshold = 0.0;
    bool fix_alpha = false;
    double init_alpha = 0.1;
    double init_beta = 0.1;
    std::size_t batch_size = 32;
};

/// One training record as seen by the losses. `reward` is whatever the caller composed
/// (r^delta for the guide, r + beta r^guide for the student); `weight` is the IS ratio.
template <class Action> struct UpdateSample {
    std::vector<double> observation;
    Action action{};
    double reward = 0.0;
    double cost = 0.0;
    std::vector<double> next_observation;
    bool terminal = false;
    double weight = 1.0;
};

/// Standard-normal draws for the reparameterized actions at s (current) and s' (next).
struct BatchNoise {
    std::vector<std::vector<double>> current;
    std::vector<std::vector<double>> next;
};

struct LossValues {
    double policy = 0.0;
    double reward_critic = 0.0;
    double cost_critic = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

struct Gradients {
    std::vector<double> policy;
    std::vector<double> reward_critic;
    std::vector<double> cost_critic;
    double alpha = 0.0;
    double beta = 0.0;
    LossValues losses;
    double mean_cost_q = 0.0;
    double mean_log_prob = 0.0;
};

struct TrainDiagnostics {
    LossValues losses;
    double alpha = 0.0;
    double beta = 0.0;
    double mean_cost_q = 0.0;
    double entropy = 0.0;
};

/// SAC-Lagrangian agent: policy, reward and cost critics with lagged targets, and the
/// softplus-parameterized multipliers alpha (entropy) and beta (safety).
///
/// With a SquashedGaussianPolicy the critics take [obs, action] and the losses use
/// reparameterized samples. With a CategoricalPolicy the critics output one value per
/// action and every expectation over actions is computed exactly.
template <class Policy> class SacAgent {
public:
    using Action = typename Policy::Action;
    static constexpr bool continuous = std::is_same_v<Policy, SquashedGaussianPolicy>;

    SacAgent() = default;

    /// Continuous agent.
    SacAgent(std::size_t obs_dim, std::size_t action_dim, double action_bound, SacConfig config)
        requires continuous
        : config_(std::move(config)), policy_(obs_dim, action_dim, config_.hidden, action_bound),
          qr_(layer_sizes(obs_dim + action_dim, config_.hidden, 1)), qc_(qr_) {
        if (!config_.target_entropy) config_.target_entropy = -static_cast<double>(action_dim);
        finish_construction();
    }

    /// Discrete agent.
    SacAgent(std::size_t obs_dim, std::size_t num_actions, SacConfig config)
        requires(!continuous)
        : config_(std::move(config)), policy_(obs_dim, num_actions, config_.hidden),
          qr_(layer_sizes(obs_dim, config_.hidden, num_actions)), qc_(qr_) {
        if (!config_.target_entropy) config_.target_entropy = 0.2;
        finish_construction();
    }

    void initialize(Rng& rng) {
        policy_.initialize(rng);
        qr_.initialize(rng);
        qc_.initialize(rng);
        qr_target_ = qr_;
        qc_target_ = qc_;
    }

    PolicySample<Action> sample(std::span<const double> obs, Rng& rng) const { return policy_.sample(obs, rng); }

    double log_prob(std::span<const double> obs, const Action& a) const {
        return policy_.log_prob(obs, a);
    }

    double alpha() const { return alpha_.value(); }
    double beta() const { return beta_.value(); }
    double target_entropy() const { return *config_.target_entropy; }

    BatchNoise draw_noise(std::size_t n, Rng& rng) const {
        BatchNoise noise;
        if constexpr (continuous) {
            const std::size_t k = policy_.action_dim();
            noise.current.assign(n, std::vector<double>(k));
            noise.next.assign(n, std::vector<double>(k));
            for (std::size_t i = 0; i < n; ++i) {
                for (auto& e : noise.current[i]) e = standard_normal(rng);
                for (auto& e : noise.next[i]) e = standard_normal(rng);
            }
        }
        return noise;
    }

    /// All five losses and their gradients at the current parameters.
    Gradients compute_gradients(const std::vector<UpdateSample<Action>>& batch, const BatchNoise& noise) const {
        if (batch.empty()) throw InvalidInput("compute_gradients: empty batch");
        Gradients g;
        g.policy.assign(policy_.net().num_params(), 0.0);
        g.reward_critic.assign(qr_.num_params(), 0.0);
        g.cost_critic.assign(qc_.num_params(), 0.0);
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if constexpr (continuous)
                accumulate_continuous(batch[i], noise.current.at(i), noise.next.at(i), inv, g);
            else
                accumulate_discrete(batch[i], inv, g);
        }
        g.alpha *= alpha_.slope();
        g.beta *= beta_.slope();
        return g;
    }

    LossValues losses(const std::vector<UpdateSample<Action>>& batch, const BatchNoise& noise) const {
        return compute_gradients(batch, noise).losses;
    }

    /// One descent step on every loss, then Polyak averaging of both critic targets.
    TrainDiagnostics train_step(const std::vector<UpdateSample<Action>>& batch, Rng& rng) {
        return apply(compute_gradients(batch, draw_noise(batch.size(), rng)));
    }

    TrainDiagnostics apply(const Gradients& g) {
        const auto& l = g.losses;
        for (double v : {l.policy, l.reward_critic, l.cost_critic, l.alpha, l.beta, g.alpha, g.beta})
            if (!std::isfinite(v)) throw DivergenceError("non-finite loss or gradient in SAC-Lagrangian step");
        for (const auto* grad : {&g.policy, &g.reward_critic, &g.cost_critic})
            for (double v : *grad)
                if (!std::isfinite(v)) throw DivergenceError("non-finite gradient in SAC-Lagrangian step");
        opt_policy_.step(policy_.net().params(), g.policy);
        opt_reward_.step(qr_.params(), g.reward_critic);
        opt_cost_.step(qc_.params(), g.cost_critic);
        if (!config_.fix_alpha) opt_alpha_.step(alpha_.raw, g.alpha);
        opt_beta_.step(beta_.raw, g.beta);
        polyak_update(qr_target_, qr_, config_.polyak);
        polyak_update(qc_target_, qc_, config_.polyak);
        if (!policy_.net().finite() || !qr_.finite() || !qc_.finite() || !std::isfinite(alpha_.raw) ||
            !std::isfinite(beta_.raw))
            throw DivergenceError("non-finite parameters after SAC-Lagrangian step");
        TrainDiagnostics d;
        d.losses = l;
        d.alpha = alpha();
        d.beta = beta();
        d.mean_cost_q = g.mean_cost_q;
        d.entropy = -g.mean_log_prob;
        return d;
    }

    /// Cost critic value Q^c(s, a) = softplus(net), nonnegative like the costs it estimates.
    double cost_value(std::span<const double> obs, const Action& a) const {
        return softplus(critic_value(qc_, obs, a));
    }
    double reward_value(std::span<const double> obs, const Action& a) const { return critic_value(qr_, obs, a); }

    const SacConfig& config() const { return config_; }
    Policy& policy() { return policy_; }
    const Policy& policy() const { return policy_; }
    DenseNet& reward_critic() { return qr_; }
    const DenseNet& reward_critic() const { return qr_; }
    DenseNet& cost_critic() { return qc_; }
    const DenseNet& cost_critic() const { return qc_; }
    DenseNet& reward_target() { return qr_target_; }
    const DenseNet& reward_target() const { return qr_target_; }
    DenseNet& cost_target() { return qc_target_; }
    const DenseNet& cost_target() const { return qc_target_; }
    DualVariable& alpha_param() { return alpha_; }
    const DualVariable& alpha_param() const { return alpha_; }
    DualVariable& beta_param() { return beta_; }
    const DualVariable& beta_param() const { return beta_; }

private:
    void finish_construction() {
        qr_target_ = qr_;
        qc_target_ = qc_;
        alpha_ = DualVariable::from_value(config_.init_alpha);
        beta_ = DualVariable::from_value(config_.init_beta);
        opt_policy_ = Optimizer(config_.optimizer, config_.lr_policy);
        opt_reward_ = Optimizer(config_.optimizer, config_.lr_reward);
        opt_cost_ = Optimizer(config_.optimizer, config_.lr_cost);
        opt_alpha_ = Optimizer(config_.optimizer, config_.lr_alpha);
        opt_beta_ = Optimizer(config_.optimizer, config_.lr_beta);
    }

    static std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
        std::vector<double> out(a.begin(), a.end());
        out.insert(out.end(), b.begin(), b.end());
        return out;
    }

    double critic_value(const DenseNet& net, std::span<const double> obs, const Action& a) const {
        if constexpr (continuous)
            return net.forward(concat(obs, a))[0];
        else
            return net.forward(obs).at(a);
    }

    void accumulate_continuous(const UpdateSample<Action>& x, std::span<const double> eps,
                               std::span<const double> eps_next, double inv, Gradients& g) const {
        const double a = alpha(), b = beta(), w = x.weight * inv;
        const double d = config_.threshold, h_bar = *config_.target_entropy, gamma = config_.discount;
        const std::size_t k = policy_.action_dim();

        // Actor, alpha and beta terms at a fresh action.
        DenseNet::Tape tp, tr, tc;
        const auto head = policy_.head(x.observation, &tp);
        const auto rp = policy_.reparameterize(head, eps);
        const auto xa = concat(x.observation, rp.action);
        const double qr = qr_.forward(xa, &tr)[0];
        const double zc = qc_.forward(xa, &tc)[0];
        const double qc = softplus(zc);
        g.losses.policy += w * (a * rp.log_prob - qr + b * qc);
        g.losses.alpha += w * (-a * (rp.log_prob + h_bar));
        g.losses.beta += w * b * (d - qc);
        g.alpha += w * -(rp.log_prob + h_bar);
        g.beta += w * (d - qc);
        g.mean_cost_q += inv * qc;
        g.mean_log_prob += inv * rp.log_prob;

        if (w != 0.0) {
            const double one = 1.0, slope = sigmoid(zc);
            const auto dqr = qr_.backward(tr, std::span<const double>(&one, 1), {});
            const auto dqc = qc_.backward(tc, std::span<const double>(&slope, 1), {});
            std::vector<double> dout(2 * k, 0.0);
            for (std::size_t j = 0; j < k; ++j) {
                const double t = std::tanh(rp.u[j]);
                const double dj_da = w * (-dqr[xa.size() - k + j] + b * dqc[xa.size() - k + j]);
                const double dj_du = dj_da * policy_.bound() * (1.0 - t * t) + w * a * 2.0 * t;
                const double sigma = std::exp(head.log_std[j]);
                dout[j] = dj_du;
                dout[k + j] = head.clamped[j] ? 0.0 : dj_du * sigma * eps[j] - w * a;
            }
            policy_.net().backward(tp, dout, g.policy);
        }

        // Critics against lagged targets at the next state.
        const auto head_next = policy_.head(x.next_observation);
        const auto rp_next = policy_.reparameterize(head_next, eps_next);
        const auto xn = concat(x.next_observation, rp_next.action);
        const double live = x.terminal ? 0.0 : 1.0;
        const double yc = x.cost + gamma * live * softplus(qc_target_.forward(xn)[0]);
        const double yr = x.reward + gamma * live * (qr_target_.forward(xn)[0] - a * rp_next.log_prob);
        const auto xs = concat(x.observation, x.action);
        regress(qc_, xs, 0, yc, w, g.cost_critic, g.losses.cost_critic, true);
        regress(qr_, xs, 0, yr, w, g.reward_critic, g.losses.reward_critic, false);
    }

    void accumulate_discrete(const UpdateSample<Action>& x, double inv, Gradients& g) const {
        const double a = alpha(), b = beta(), w = x.weight * inv;
        const double d = config_.threshold, h_bar = *config_.target_entropy, gamma = config_.discount;
        const std::size_t na = policy_.num_actions();

        DenseNet::Tape tp;
        const auto lp = policy_.log_probs(x.observation, &tp);
        const auto qr = qr_.forward(x.observation);
        auto qc = qc_.forward(x.observation);
        for (double& q : qc) q = softplus(q);
        std::vector<double> p(na), f(na);
        double loss = 0.0, neg_entropy = 0.0, expected_qc = 0.0;
        for (std::size_t j = 0; j < na; ++j) {
            p[j] = std::exp(lp[j]);
            f[j] = a * lp[j] - qr[j] + b * qc[j];
            loss += p[j] * f[j];
            neg_entropy += p[j] * lp[j];
            expected_qc += p[j] * qc[j];
        }
        g.losses.policy += w * loss;
        g.losses.alpha += w * (-a * (neg_entropy + h_bar));
        g.losses.beta += w * b * (d - expected_qc);
        g.alpha += w * -(neg_entropy + h_bar);
        g.beta += w * (d - expected_qc);
        g.mean_cost_q += inv * expected_qc;
        g.mean_log_prob += inv * neg_entropy;
        if (w != 0.0) {
            std::vector<double> dz(na);
            for (std::size_t j = 0; j < na; ++j) dz[j] = w * p[j] * (f[j] - loss);
            policy_.net().backward(tp, dz, g.policy);
        }

        const auto lp_next = policy_.log_probs(x.next_observation);
        const auto qr_next = qr_target_.forward(x.next_observation);
        const auto qc_next = qc_target_.forward(x.next_observation);
        double vc = 0.0, vr = 0.0;
        for (std::size_t j = 0; j < na; ++j) {
            const double pj = std::exp(lp_next[j]);
            vc += pj * softplus(qc_next[j]);
            vr += pj * (qr_next[j] - a * lp_next[j]);
        }
        const double live = x.terminal ? 0.0 : 1.0;
        regress(qc_, x.observation, x.action, x.cost + gamma * live * vc, w, g.cost_critic, g.losses.cost_critic,
                true);
        regress(qr_, x.observation, x.action, x.reward + gamma * live * vr, w, g.reward_critic,
                g.losses.reward_critic, false);
    }

    /// Adds w * 0.5 (Q(input)[index] - y)^2 to loss and its parameter gradient to grad.
    /// With nonneg, Q is softplus of the network output.
    static void regress(const DenseNet& net, std::span<const double> input, std::size_t index, double y, double w,
                        std::vector<double>& grad, double& loss, bool nonneg) {
        DenseNet::Tape t;
        const auto out = net.forward(input, &t);
        const double z = out[index];
        const double err = (nonneg ? softplus(z) : z) - y;
        loss += w * 0.5 * err * err;
        if (w == 0.0) return;
        std::vector<double> dout(out.size(), 0.0);
        dout[index] = w * err * (nonneg ? sigmoid(z) : 1.0);
        net.backward(t, dout, grad);
    }

    SacConfig config_;
    Policy policy_;
    DenseNet qr_, qc_, qr_target_, qc_target_;
    DualVariable alpha_, beta_;
    Optimizer opt_policy_, opt_reward_, opt_cost_, opt_alpha_, opt_beta_;
};

using ContinuousAgent = SacAgent<SquashedGaussianPolicy>;
using DiscreteAgent = SacAgent<CategoricalPolicy>;

/// Tabular view of a discrete agent whose observations are one-hot state indicators.
inline StochasticPolicy policy_table(const DiscreteAgent& agent, std::size_t num_states) {
    StochasticPolicy pi;
    pi.num_states = num_states;
    pi.num_actions = agent.policy().num_actions();
    pi.probs.resize(num_states * pi.num_actions);
    std::vector<double> obs(num_states, 0.0);
    for (std::size_t s = 0; s < num_states; ++s) {
        obs[s] = 1.0;
        const auto p = agent.policy().probs(obs);
        std::copy(p.begin(), p.end(), pi.probs.begin() + static_cast<std::ptrdiff_t>(s * pi.num_actions));
        obs[s] = 0.0;
    }
    return pi;
}

} // namespace sagui
