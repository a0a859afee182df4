#pragma once

#include "sagui/dense_net.hpp"

#include <algorithm>
#include <numbers>

namespace sagui {

/// log(1 + e^x) without overflow; strictly positive for every finite x.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Inverse of softplus, for initializing a dual variable at a chosen value.
inline double softplus_inverse(double y) {
    if (!(y > 0.0)) throw InvalidInput("softplus_inverse: value must be positive");
    return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

/// Positive multiplier value = softplus(raw).
struct DualVariable {
    double raw = 0.0;

    static DualVariable from_value(double value) { return {softplus_inverse(value)}; }
    double value() const { return softplus(raw); }
    /// d value / d raw.
    double slope() const { return sigmoid(raw); }
};

/// log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)).
inline double log1m_tanh2(double u) { return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u)); }

template <class Action> struct PolicySample {
    Action action{};
    double log_prob = 0.0;
};

/// Gaussian in pre-squash space, mapped into [-bound, bound]^k by bound * tanh.
class SquashedGaussianPolicy {
public:
    using Action = std::vector<double>;

    static constexpr double log_std_min = -20.0;
    static constexpr double log_std_max = 2.0;

    SquashedGaussianPolicy() = default;
    SquashedGaussianPolicy(std::size_t obs_dim, std::size_t action_dim, const std::vector<std::size_t>& hidden,
                           double bound)
        : net_(layer_sizes(obs_dim, hidden, 2 * action_dim)), action_dim_(action_dim), bound_(bound) {
        if (!(bound > 0.0)) throw InvalidInput("policy: action bound must be positive");
    }

    void initialize(Rng& rng) { net_.initialize(rng, 0.01); }

    struct Head {
        std::vector<double> mean;
        std::vector<double> log_std;
        std::vector<bool> clamped;
    };

    Head head(std::span<const double> obs, DenseNet::Tape* tape = nullptr) const {
        const auto out = net_.forward(obs, tape);
        Head h;
        h.mean.assign(out.begin(), out.begin() + action_dim_);
        h.log_std.resize(action_dim_);
        h.clamped.resize(action_dim_);
        for (std::size_t i = 0; i < action_dim_; ++i) {
            const double raw = out[action_dim_ + i];
            h.log_std[i] = std::clamp(raw, log_std_min, log_std_max);
            h.clamped[i] = raw < log_std_min || raw > log_std_max;
        }
        return h;
    }

    /// Pre-squash sample u = mean + std * eps and its squashed log-density.
    struct Reparam {
        std::vector<double> u;
        Action action;
        double log_prob = 0.0;
    };

    Reparam reparameterize(const Head& h, std::span<const double> eps) const {
        if (eps.size() != action_dim_) throw ShapeError("policy: noise size mismatch");
        Reparam r;
        r.u.resize(action_dim_);
        r.action.resize(action_dim_);
        for (std::size_t i = 0; i < action_dim_; ++i) {
            const double u = h.mean[i] + std::exp(h.log_std[i]) * eps[i];
            r.u[i] = u;
            r.action[i] = bound_ * std::tanh(u);
            r.log_prob += -0.5 * eps[i] * eps[i] - h.log_std[i] - 0.5 * std::log(2.0 * std::numbers::pi) -
                          log1m_tanh2(u) - std::log(bound_);
        }
        return r;
    }

    /// The reported log-density is that of the emitted (rounded) action, so it agrees with
    /// log_prob(obs, action) even where tanh saturates.
    PolicySample<Action> sample(std::span<const double> obs, Rng& rng) const {
        std::vector<double> eps(action_dim_);
        for (auto& e : eps) e = standard_normal(rng);
        const Head h = head(obs);
        auto r = reparameterize(h, eps);
        const double lp = log_prob_at(h, r.action);
        return {std::move(r.action), lp};
    }

    /// Deterministic action bound * tanh(mean).
    Action mode(std::span<const double> obs) const {
        const Head h = head(obs);
        Action a(action_dim_);
        for (std::size_t i = 0; i < action_dim_; ++i) a[i] = bound_ * std::tanh(h.mean[i]);
        return a;
    }

    double log_prob(std::span<const double> obs, std::span<const double> action) const {
        if (action.size() != action_dim_) throw ShapeError("policy: action size mismatch");
        return log_prob_at(head(obs), action);
    }

    DenseNet& net() { return net_; }
    const DenseNet& net() const { return net_; }
    std::size_t observation_dim() const { return net_.input_size(); }
    std::size_t action_dim() const { return action_dim_; }
    double bound() const { return bound_; }

private:
    double log_prob_at(const Head& h, std::span<const double> action) const {
        std::vector<double> eps(action_dim_);
        for (std::size_t i = 0; i < action_dim_; ++i) {
            const double y = std::clamp(action[i] / bound_, -1.0 + 1e-15, 1.0 - 1e-15);
            eps[i] = (std::atanh(y) - h.mean[i]) / std::exp(h.log_std[i]);
        }
        return reparameterize(h, eps).log_prob;
    }

    DenseNet net_;
    std::size_t action_dim_ = 0;
    double bound_ = 1.0;
};

/// Softmax policy over a finite action set.
class CategoricalPolicy {
public:
    using Action = std::size_t;

    CategoricalPolicy() = default;
    CategoricalPolicy(std::size_t obs_dim, std::size_t num_actions, const std::vector<std::size_t>& hidden)
        : net_(layer_sizes(obs_dim, hidden, num_actions)) {}

    void initialize(Rng& rng) { net_.initialize(rng, 0.01); }

    std::vector<double> log_probs(std::span<const double> obs, DenseNet::Tape* tape = nullptr) const {
        auto z = net_.forward(obs, tape);
        const double top = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - top);
        const double lse = top + std::log(sum);
        for (auto& v : z) v -= lse;
        return z;
    }

    std::vector<double> probs(std::span<const double> obs) const {
        auto lp = log_probs(obs);
        for (auto& v : lp) v = std::exp(v);
        return lp;
    }

    PolicySample<Action> sample(std::span<const double> obs, Rng& rng) const {
        const auto lp = log_probs(obs);
        std::vector<double> p(lp.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(lp[i]);
        const std::size_t a = sample_discrete(p, rng);
        return {a, lp[a]};
    }

    Action mode(std::span<const double> obs) const {
        const auto z = net_.forward(obs);
        return static_cast<Action>(std::max_element(z.begin(), z.end()) - z.begin());
    }

    double log_prob(std::span<const double> obs, Action a) const {
        const auto lp = log_probs(obs);
        if (a >= lp.size()) throw InvalidInput("policy: action out of range");
        return lp[a];
    }

    DenseNet& net() { return net_; }
    const DenseNet& net() const { return net_; }
    std::size_t observation_dim() const { return net_.input_size(); }
    std::size_t num_actions() const { return net_.output_size(); }

private:
    DenseNet net_;
};

} // namespace sagui
