#pragma once

#include "sagui/errors.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace sagui {

enum class OptimizerKind { sgd, adam };

inline OptimizerKind parse_optimizer_kind(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

/// Descent step on a flat parameter array. Plain gradient descent by default.
class Optimizer {
public:
    Optimizer() = default;
    Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}

    void step(std::span<double> params, std::span<const double> grad) {
        if (params.size() != grad.size()) throw ShapeError("optimizer: gradient size mismatch");
        if (kind_ == OptimizerKind::sgd) {
            for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
            return;
        }
        if (m_.size() != params.size()) {
            m_.assign(params.size(), 0.0);
            v_.assign(params.size(), 0.0);
            t_ = 0;
        }
        ++t_;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + epsilon);
        }
    }

    void step(double& param, double grad) { step(std::span<double>(&param, 1), std::span<const double>(&grad, 1)); }

    double learning_rate() const { return lr_; }
    OptimizerKind kind() const { return kind_; }

    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

private:
    OptimizerKind kind_ = OptimizerKind::sgd;
    double lr_ = 0.001;
    std::vector<double> m_, v_;
    long long t_ = 0;
};

} // namespace sagui
