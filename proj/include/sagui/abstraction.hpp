#pragma once

#include "sagui/cmdp.hpp"

#include <numeric>
#include <optional>
#include <ostream>
#include <string>

namespace sagui {

/// Map from target states onto source states together with a weighting over each
/// preimage class. Weights within a class sum to one.
struct StateAbstraction {
    std::vector<std::size_t> xi;
    std::size_t num_source = 0;
    std::vector<std::vector<std::size_t>> preimage;
    std::vector<double> weights;

    std::size_t num_target() const { return xi.size(); }

    void validate() const {
        if (preimage.size() != num_source || weights.size() != xi.size())
            throw InvalidInput("abstraction: inconsistent sizes");
        std::vector<std::size_t> seen(xi.size(), 0);
        for (std::size_t k = 0; k < num_source; ++k) {
            double total = 0.0;
            for (std::size_t s : preimage[k]) {
                if (s >= xi.size() || xi[s] != k) throw InvalidInput("abstraction: preimage is not the inverse of xi");
                ++seen[s];
                total += weights[s];
            }
            if (preimage[k].empty()) throw InvalidInput("abstraction: source state " + std::to_string(k) + " has no preimage");
            if (std::abs(total - 1.0) > 1e-12)
                throw InvalidInput("abstraction: weights over the preimage of source state " + std::to_string(k) +
                                   " do not sum to 1");
        }
        for (std::size_t s = 0; s < xi.size(); ++s)
            if (seen[s] != 1) throw InvalidInput("abstraction: xi is not total");
    }
};

/// Builds the abstraction from xi. Without explicit weights, each class is weighted uniformly.
inline StateAbstraction make_abstraction(std::vector<std::size_t> xi, std::size_t num_source,
                                         std::optional<std::vector<double>> weights = std::nullopt) {
    StateAbstraction abs;
    abs.num_source = num_source;
    abs.preimage.assign(num_source, {});
    for (std::size_t s = 0; s < xi.size(); ++s) {
        if (xi[s] >= num_source) throw InvalidInput("abstraction: xi maps outside the source state space");
        abs.preimage[xi[s]].push_back(s);
    }
    abs.xi = std::move(xi);
    if (weights) {
        if (weights->size() != abs.xi.size()) throw InvalidInput("abstraction: one weight per target state required");
        abs.weights = std::move(*weights);
    } else {
        abs.weights.assign(abs.xi.size(), 0.0);
        for (const auto& cls : abs.preimage)
            for (std::size_t s : cls) abs.weights[s] = 1.0 / static_cast<double>(cls.size());
    }
    abs.validate();
    return abs;
}

inline StateAbstraction identity_abstraction(std::size_t n) {
    std::vector<std::size_t> xi(n);
    std::iota(xi.begin(), xi.end(), std::size_t{0});
    return make_abstraction(std::move(xi), n);
}

/// Reward-free source task induced by the abstraction.
///
///   P'(k'|k,a) = sum_{s in Xi^-1(k)} sum_{s' in Xi^-1(k')} w(s) P(s'|s,a)
///   c'(k,a)    = sum_{s in Xi^-1(k)} w(s) c(s,a)
///   iota'(k)   = sum_{s in Xi^-1(k)} iota(s)          (pushforward, so iota' is a distribution)
inline Cmdp build_source_task(const Cmdp& target, const StateAbstraction& abs) {
    target.validate();
    if (abs.num_target() != target.num_states) throw InvalidInput("abstraction does not cover the target states");
    abs.validate();
    Cmdp source(abs.num_source, target.num_actions, target.discount, target.threshold, target.horizon_cap);
    for (std::size_t s = 0; s < target.num_states; ++s) {
        const std::size_t k = abs.xi[s];
        const double w = abs.weights[s];
        source.initial[k] += target.initial[s];
        for (std::size_t a = 0; a < target.num_actions; ++a) {
            source.c(k, a) += w * target.c(s, a);
            const double* pr = target.row(s, a);
            for (std::size_t n = 0; n < target.num_states; ++n)
                if (pr[n] != 0.0) source.p(k, a, abs.xi[n]) += w * pr[n];
        }
    }
    return source;
}

/// pi_lifted(.|s) = pi_source(.|Xi(s)).
inline StochasticPolicy lift_policy(const StochasticPolicy& source_policy, const StateAbstraction& abs) {
    if (source_policy.num_states != abs.num_source)
        throw InvalidInput("lift_policy: source policy does not cover every source state");
    StochasticPolicy lifted(abs.num_target(), source_policy.num_actions);
    for (std::size_t s = 0; s < abs.num_target(); ++s)
        for (std::size_t a = 0; a < source_policy.num_actions; ++a) lifted(s, a) = source_policy(abs.xi[s], a);
    return lifted;
}

struct IrrelevanceWitness {
    std::size_t state = 0;
    std::size_t other_state = 0;
    std::size_t action = 0;
    /// Index of the random policy that exposed the violation; empty for model-level witnesses.
    std::optional<std::size_t> policy_index;
    double gap = 0.0;
};

struct IrrelevanceReport {
    bool holds = true;
    std::optional<IrrelevanceWitness> witness;
    std::string reason;
    /// Largest |Q^c(s,a) - Q^c(s',a)| across the randomised literal checks.
    double max_literal_gap = 0.0;
};

/// Certifies that Xi preserves cost-returns.
///
/// Model level: all states in a class share c(.,a) and the class-aggregated successor
/// distribution for every action (a sufficient condition). Literal level: for
/// `num_policies` random class-constant policies, Q^c is compared across each class.
/// Policies range over class-constant (lifted) policies, the class the transfer argument
/// quantifies over; a goal-conditioned target policy can trivially break equality.
inline IrrelevanceReport check_qc_irrelevance(const Cmdp& target, const StateAbstraction& abs, double tol,
                                              std::uint64_t seed = 7, std::size_t num_policies = 50) {
    target.validate();
    abs.validate();
    if (abs.num_target() != target.num_states) throw InvalidInput("abstraction does not cover the target states");
    IrrelevanceReport report;
    const std::size_t na = target.num_actions;

    std::vector<double> aggregated(abs.num_source);
    std::vector<double> reference(abs.num_source);
    for (std::size_t k = 0; k < abs.num_source && report.holds; ++k) {
        const auto& cls = abs.preimage[k];
        const std::size_t rep = cls.front();
        for (std::size_t i = 1; i < cls.size() && report.holds; ++i) {
            const std::size_t s = cls[i];
            for (std::size_t a = 0; a < na; ++a) {
                const double cost_gap = std::abs(target.c(s, a) - target.c(rep, a));
                if (cost_gap > tol) {
                    report.holds = false;
                    report.witness = IrrelevanceWitness{rep, s, a, std::nullopt, cost_gap};
                    report.reason = "immediate cost differs within a class";
                    break;
                }
                std::fill(aggregated.begin(), aggregated.end(), 0.0);
                std::fill(reference.begin(), reference.end(), 0.0);
                for (std::size_t n = 0; n < target.num_states; ++n) {
                    aggregated[abs.xi[n]] += target.p(s, a, n);
                    reference[abs.xi[n]] += target.p(rep, a, n);
                }
                double gap = 0.0;
                for (std::size_t j = 0; j < abs.num_source; ++j) gap = std::max(gap, std::abs(aggregated[j] - reference[j]));
                if (gap > tol) {
                    report.holds = false;
                    report.witness = IrrelevanceWitness{rep, s, a, std::nullopt, gap};
                    report.reason = "class-aggregated transitions differ within a class";
                    break;
                }
            }
        }
    }

    Rng rng(seed);
    for (std::size_t p = 0; p < num_policies; ++p) {
        const auto lifted = lift_policy(StochasticPolicy::random(abs.num_source, na, rng), abs);
        const auto qc = exact_policy_evaluation(target, lifted, Signal::cost);
        for (const auto& cls : abs.preimage)
            for (std::size_t i = 1; i < cls.size(); ++i)
                for (std::size_t a = 0; a < na; ++a) {
                    const double gap = std::abs(qc(cls[i], a) - qc(cls.front(), a));
                    report.max_literal_gap = std::max(report.max_literal_gap, gap);
                    if (gap > tol && report.holds) {
                        report.holds = false;
                        report.witness = IrrelevanceWitness{cls.front(), cls[i], a, p, gap};
                        report.reason = "cost-returns differ within a class under a random policy";
                    }
                }
    }
    return report;
}

/// max_{s,a} |Q^c_source(Xi(s),a) - Q^c_target,lifted(s,a)| without checking the premise.
inline double lemma1_gap(const Cmdp& target, const StateAbstraction& abs, const StochasticPolicy& source_policy) {
    const Cmdp source = build_source_task(target, abs);
    const auto q_source = exact_policy_evaluation(source, source_policy, Signal::cost);
    const auto q_target = exact_policy_evaluation(target, lift_policy(source_policy, abs), Signal::cost);
    double worst = 0.0;
    for (std::size_t s = 0; s < target.num_states; ++s)
        for (std::size_t a = 0; a < target.num_actions; ++a)
            worst = std::max(worst, std::abs(q_source(abs.xi[s], a) - q_target(s, a)));
    return worst;
}

/// Equal cost-returns of a source policy in source and target; throws when the abstraction
/// fails the irrelevance check since the equality is then not guaranteed.
inline double verify_lemma1(const Cmdp& target, const StateAbstraction& abs, const StochasticPolicy& source_policy,
                            double irrelevance_tol = 1e-10) {
    const auto report = check_qc_irrelevance(target, abs, irrelevance_tol);
    if (!report.holds) throw PreconditionError("lemma does not apply: " + report.reason);
    return lemma1_gap(target, abs, source_policy);
}

enum class TheoremOutcome {
    holds,         ///< premise true and lifted policy safe on the target
    premise_false, ///< source policy is not safe on the source task; nothing to conclude
    violated       ///< premise true but the lifted policy is unsafe (must never happen)
};

struct Theorem1Report {
    TheoremOutcome outcome = TheoremOutcome::premise_false;
    double source_cost = 0.0;
    double target_cost = 0.0;
    /// Per target initial-support state: lifted V^c(s) and source V^c(Xi(s)).
    std::vector<std::size_t> initial_states;
    std::vector<double> target_state_cost;
    std::vector<double> source_state_cost;
};

inline Theorem1Report verify_theorem1(const Cmdp& target, const StateAbstraction& abs,
                                      const StochasticPolicy& source_policy, double d_source, double d_target,
                                      double tol = 1e-9) {
    if (d_source > d_target)
        throw PreconditionError("source threshold must not exceed the target threshold");
    const auto report = check_qc_irrelevance(target, abs, 1e-10);
    if (!report.holds) throw PreconditionError("theorem does not apply: " + report.reason);

    const Cmdp source = build_source_task(target, abs);
    const auto v_source = exact_policy_evaluation(source, source_policy, Signal::cost);
    const auto v_target = exact_policy_evaluation(target, lift_policy(source_policy, abs), Signal::cost);
    Theorem1Report out;
    out.source_cost = expected_initial_value(source, v_source);
    out.target_cost = expected_initial_value(target, v_target);
    for (std::size_t s = 0; s < target.num_states; ++s)
        if (target.initial[s] > 0.0) {
            out.initial_states.push_back(s);
            out.target_state_cost.push_back(v_target.v[s]);
            out.source_state_cost.push_back(v_source.v[abs.xi[s]]);
        }
    if (out.source_cost > d_source + tol)
        out.outcome = TheoremOutcome::premise_false;
    else
        out.outcome = out.target_cost <= d_target + tol ? TheoremOutcome::holds : TheoremOutcome::violated;
    return out;
}

/// One line per target state: "<target> -> <source>, <weight>".
inline void write_abstraction(std::ostream& out, const StateAbstraction& abs) {
    for (std::size_t s = 0; s < abs.num_target(); ++s)
        out << s << " -> " << abs.xi[s] << ", " << detail::format_double(abs.weights[s]) << '\n';
}

inline StateAbstraction read_abstraction(std::istream& in, std::size_t num_source) {
    std::vector<std::size_t> xi;
    std::vector<double> weights;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto arrow = line.find("->");
        const auto comma = line.find(',', arrow);
        if (arrow == std::string::npos || comma == std::string::npos) throw LoadError("bad abstraction line: " + line);
        const std::size_t s = std::stoul(line.substr(0, arrow));
        if (s != xi.size()) throw LoadError("abstraction lines must list target states in order");
        xi.push_back(std::stoul(line.substr(arrow + 2, comma - arrow - 2)));
        std::string w = line.substr(comma + 1);
        w.erase(0, w.find_first_not_of(' '));
        weights.push_back(detail::parse_double(w));
    }
    return make_abstraction(std::move(xi), num_source, std::move(weights));
}

} // namespace sagui
