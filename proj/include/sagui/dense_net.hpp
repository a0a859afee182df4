#pragma once

#include "sagui/errors.hpp"
#include "sagui/random.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace sagui {

/// Fully connected network with tanh hidden layers and a linear output layer.
///
/// Parameters are one flat array; layer l stores its n_out x n_in weight matrix
/// (row-major) followed by n_out biases.
class DenseNet {
public:
    /// Per-sample activations kept for the backward pass.
    struct Tape {
        std::vector<std::vector<double>> activations;
    };

    DenseNet() = default;

    explicit DenseNet(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.size() < 2) throw InvalidInput("DenseNet needs an input and an output size");
        for (auto n : sizes_)
            if (n == 0) throw InvalidInput("DenseNet layer sizes must be positive");
        params_.assign(count_params(sizes_), 0.0);
    }

    static std::size_t count_params(const std::vector<std::size_t>& sizes) {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += (sizes[l] + 1) * sizes[l + 1];
        return n;
    }

    /// Uniform fan-in initialization; the output layer is additionally scaled.
    void initialize(Rng& rng, double output_scale = 1.0) {
        std::size_t offset = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            const std::size_t n_in = sizes_[l], n_out = sizes_[l + 1];
            const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
            const double scale = (l + 2 == sizes_.size()) ? output_scale : 1.0;
            for (std::size_t i = 0; i < (n_in + 1) * n_out; ++i)
                params_[offset + i] = scale * bound * (2.0 * uniform01(rng) - 1.0);
            offset += (n_in + 1) * n_out;
        }
    }

    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t num_params() const { return params_.size(); }
    const std::vector<std::size_t>& sizes() const { return sizes_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::vector<double> forward(std::span<const double> x, Tape* tape = nullptr) const {
        if (x.size() != input_size()) throw ShapeError("DenseNet: input size mismatch");
        std::vector<double> cur(x.begin(), x.end());
        if (tape) {
            tape->activations.clear();
            tape->activations.push_back(cur);
        }
        std::size_t offset = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            const std::size_t n_in = sizes_[l], n_out = sizes_[l + 1];
            const double* w = params_.data() + offset;
            const double* b = w + n_in * n_out;
            std::vector<double> next(n_out);
            const bool hidden = l + 2 < sizes_.size();
            for (std::size_t o = 0; o < n_out; ++o) {
                double z = b[o];
                const double* row = w + o * n_in;
                for (std::size_t i = 0; i < n_in; ++i) z += row[i] * cur[i];
                next[o] = hidden ? std::tanh(z) : z;
            }
            offset += (n_in + 1) * n_out;
            cur = std::move(next);
            if (tape) tape->activations.push_back(cur);
        }
        return cur;
    }

    /// Adds dL/dparams into grad (when non-empty) and returns dL/dinput.
    std::vector<double> backward(const Tape& tape, std::span<const double> dout, std::span<double> grad) const {
        if (dout.size() != output_size()) throw ShapeError("DenseNet: output gradient size mismatch");
        if (!grad.empty() && grad.size() != num_params()) throw ShapeError("DenseNet: gradient buffer size mismatch");
        std::vector<double> delta(dout.begin(), dout.end());
        std::size_t offset = params_.size();
        for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
            const std::size_t n_in = sizes_[l], n_out = sizes_[l + 1];
            offset -= (n_in + 1) * n_out;
            const bool hidden = l + 2 < sizes_.size();
            if (hidden) {
                const auto& y = tape.activations[l + 1];
                for (std::size_t o = 0; o < n_out; ++o) delta[o] *= 1.0 - y[o] * y[o];
            }
            const auto& x = tape.activations[l];
            const double* w = params_.data() + offset;
            if (!grad.empty()) {
                double* gw = grad.data() + offset;
                double* gb = gw + n_in * n_out;
                for (std::size_t o = 0; o < n_out; ++o) {
                    if (delta[o] == 0.0) continue;
                    double* row = gw + o * n_in;
                    for (std::size_t i = 0; i < n_in; ++i) row[i] += delta[o] * x[i];
                    gb[o] += delta[o];
                }
            }
            std::vector<double> prev(n_in, 0.0);
            for (std::size_t o = 0; o < n_out; ++o) {
                if (delta[o] == 0.0) continue;
                const double* row = w + o * n_in;
                for (std::size_t i = 0; i < n_in; ++i) prev[i] += row[i] * delta[o];
            }
            delta = std::move(prev);
        }
        return delta;
    }

    bool finite() const {
        for (double p : params_)
            if (!std::isfinite(p)) return false;
        return true;
    }

private:
    std::vector<std::size_t> sizes_;
    std::vector<double> params_;
};

inline std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> sizes{in};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(out);
    return sizes;
}

/// target <- (1 - coeff) target + coeff online.
inline void polyak_update(std::vector<double>& target, const std::vector<double>& online, double coeff) {
    if (target.size() != online.size()) throw ShapeError("polyak_update: parameter size mismatch");
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = (1.0 - coeff) * target[i] + coeff * online[i];
}

inline void polyak_update(DenseNet& target, const DenseNet& online, double coeff) {
    if (target.sizes() != online.sizes()) throw ShapeError("polyak_update: layer sizes differ");
    polyak_update(target.params(), online.params(), coeff);
}

} // namespace sagui
