#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace sagui {

struct EuclideanDistance {
    template <class Point> double operator()(const Point& a, const Point& b) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < std::size(a); ++i) {
            const double d = a[i] - b[i];
            sum += d * d;
        }
        return std::sqrt(sum);
    }
};

/// r^delta_t = delta(f(s_t), f(s_{t+1})), the realized one-sample exploration reward.
template <class State, class FeatureMap, class Distance = EuclideanDistance>
double auxiliary_reward(const State& s, const State& next, FeatureMap&& f, Distance&& delta = {}) {
    return delta(f(s), f(next));
}

/// Default feature map: the position block.
inline double auxiliary_reward(const std::array<double, 2>& pos, const std::array<double, 2>& next_pos) {
    return EuclideanDistance{}(pos, next_pos);
}

} // namespace sagui
