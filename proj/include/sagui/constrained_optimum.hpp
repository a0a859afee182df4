#pragma once

#include "sagui/cmdp.hpp"

#include <cstdint>
#include <numeric>

namespace sagui {

/// Best deterministic stationary policy under the discounted cost budget, plus the
/// unconstrained optimum for reference. `feasible == false` when no deterministic policy
/// meets the budget (the constrained fields are then meaningless).
struct ConstrainedOptimum {
    bool feasible = false;
    std::vector<std::size_t> policy;
    double value = 0.0;
    double cost_value = 0.0;
    std::vector<std::size_t> unconstrained_policy;
    double unconstrained_value = 0.0;
    double unconstrained_cost = 0.0;
    std::uint64_t nodes = 0;
};

/// Expected initial (reward, cost) values of a deterministic policy via one LU solve.
inline std::pair<double, double> deterministic_returns(const Cmdp& m, const std::vector<std::size_t>& choice) {
    const auto ns = static_cast<Eigen::Index>(m.num_states);
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ns, ns);
    Eigen::MatrixXd rhs(ns, 2);
    for (std::size_t s = 0; s < m.num_states; ++s) {
        const double* pr = m.row(s, choice[s]);
        for (std::size_t n = 0; n < m.num_states; ++n)
            system(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n)) -= m.discount * pr[n];
        rhs(static_cast<Eigen::Index>(s), 0) = m.r(s, choice[s]);
        rhs(static_cast<Eigen::Index>(s), 1) = m.c(s, choice[s]);
    }
    const Eigen::MatrixXd v = system.partialPivLu().solve(rhs);
    double r = 0.0, c = 0.0;
    for (std::size_t s = 0; s < m.num_states; ++s) {
        r += m.initial[s] * v(static_cast<Eigen::Index>(s), 0);
        c += m.initial[s] * v(static_cast<Eigen::Index>(s), 1);
    }
    return {r, c};
}

/// Full enumeration of all |A|^|S| deterministic policies (bounded by 2^22).
inline ConstrainedOptimum brute_force_constrained_optimum(const Cmdp& m, double d, double tol = 1e-12) {
    m.validate();
    double count = std::pow(static_cast<double>(m.num_actions), static_cast<double>(m.num_states));
    if (count > static_cast<double>(1ULL << 22))
        throw SizeError("brute force: " + std::to_string(m.num_actions) + "^" + std::to_string(m.num_states) +
                        " policies exceeds the 2^22 enumeration bound");

    ConstrainedOptimum best;
    best.value = -std::numeric_limits<double>::infinity();
    best.unconstrained_value = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> choice(m.num_states, 0);
    while (true) {
        ++best.nodes;
        const auto [r, c] = deterministic_returns(m, choice);
        if (r > best.unconstrained_value + tol) {
            best.unconstrained_value = r;
            best.unconstrained_cost = c;
            best.unconstrained_policy = choice;
        }
        if (c <= d + tol && r > best.value + tol) {
            best.feasible = true;
            best.value = r;
            best.cost_value = c;
            best.policy = choice;
        }
        std::size_t i = 0;
        while (i < choice.size() && ++choice[i] == m.num_actions) choice[i++] = 0;
        if (i == choice.size()) break;
    }
    if (!best.feasible) best.value = 0.0;
    return best;
}

namespace detail {

/// Discounted state visitation of a deterministic policy from iota.
inline std::vector<double> occupancy(const Cmdp& m, const std::vector<std::size_t>& choice) {
    const auto ns = static_cast<Eigen::Index>(m.num_states);
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ns, ns);
    Eigen::VectorXd iota(ns);
    for (std::size_t s = 0; s < m.num_states; ++s) {
        iota(static_cast<Eigen::Index>(s)) = m.initial[s];
        const double* pr = m.row(s, choice[s]);
        for (std::size_t n = 0; n < m.num_states; ++n)
            system(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s)) -= m.discount * pr[n];
    }
    const Eigen::VectorXd mu = system.partialPivLu().solve(iota);
    return {mu.data(), mu.data() + ns};
}

struct BranchAndBound {
    const Cmdp& m;
    double d;
    double tol;
    ConstrainedOptimum& best;

    double initial_value(const std::vector<double>& v) const {
        double total = 0.0;
        for (std::size_t s = 0; s < m.num_states; ++s) total += m.initial[s] * v[s];
        return total;
    }

    void search(std::vector<std::size_t>& fixed) {
        ++best.nodes;
        const std::size_t free_mark = m.num_actions;
        const auto upper = restricted_optimal_values(m, Signal::reward, Extremum::max, fixed);
        if (best.feasible && initial_value(upper.v) <= best.value + tol) return;
        const auto lower = restricted_optimal_values(m, Signal::cost, Extremum::min, fixed);
        if (initial_value(lower.v) > d + 1e-9) return;

        const auto [r, c] = deterministic_returns(m, upper.policy);
        if (c <= d + tol) {
            if (!best.feasible || r > best.value + tol) {
                best.feasible = true;
                best.value = r;
                best.cost_value = c;
                best.policy = upper.policy;
            }
            return;
        }

        const auto mu = occupancy(m, upper.policy);
        std::size_t pick = m.num_states;
        double heaviest = 0.0;
        for (std::size_t s = 0; s < m.num_states; ++s)
            if (fixed[s] == free_mark && mu[s] > heaviest) {
                heaviest = mu[s];
                pick = s;
            }
        if (pick == m.num_states) return;

        // Most promising actions first so good incumbents appear early.
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t a = 0; a < m.num_actions; ++a) {
            const double* pr = m.row(pick, a);
            double q = m.r(pick, a);
            for (std::size_t n = 0; n < m.num_states; ++n) q += m.discount * pr[n] * upper.v[n];
            order.emplace_back(-q, a);
        }
        std::sort(order.begin(), order.end());
        for (const auto& [neg_q, a] : order) {
            fixed[pick] = a;
            search(fixed);
        }
        fixed[pick] = free_mark;
    }
};

} // namespace detail

/// Exact constrained optimum over deterministic policies by branch and bound.
///
/// Bounds: the reward-maximising completion of a partial policy upper-bounds the return
/// of every completion, the cost-minimising completion lower-bounds the cost. A subtree
/// closes as soon as its reward-maximising completion is itself within budget. Returns the
/// same optimum value as brute_force_constrained_optimum, without the size limit.
inline ConstrainedOptimum exact_constrained_optimum(const Cmdp& m, double d, double tol = 1e-12) {
    m.validate();
    ConstrainedOptimum best;
    std::vector<std::size_t> fixed(m.num_states, m.num_actions);
    const auto unconstrained = restricted_optimal_values(m, Signal::reward, Extremum::max, fixed);
    best.unconstrained_policy = unconstrained.policy;
    std::tie(best.unconstrained_value, best.unconstrained_cost) = deterministic_returns(m, unconstrained.policy);
    detail::BranchAndBound bnb{m, d, tol, best};
    bnb.search(fixed);
    return best;
}

} // namespace sagui
