#pragma once

#include "sagui/errors.hpp"
#include "sagui/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sagui {

enum class Signal { reward, cost };

/// Tabular constrained MDP with a dense transition tensor indexed [s][a][s'].
struct Cmdp {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> transition;
    std::vector<double> reward;
    std::vector<double> cost;
    double threshold = 0.0;
    double discount = 0.9;
    std::vector<double> initial;
    std::size_t horizon_cap = 100;

    Cmdp() = default;
    Cmdp(std::size_t states, std::size_t actions, double gamma, double d, std::size_t horizon = 100)
        : num_states(states), num_actions(actions), transition(states * actions * states, 0.0),
          reward(states * actions, 0.0), cost(states * actions, 0.0), threshold(d), discount(gamma),
          initial(states, 0.0), horizon_cap(horizon) {}

    double& p(std::size_t s, std::size_t a, std::size_t next) {
        return transition[(s * num_actions + a) * num_states + next];
    }
    double p(std::size_t s, std::size_t a, std::size_t next) const {
        return transition[(s * num_actions + a) * num_states + next];
    }
    const double* row(std::size_t s, std::size_t a) const {
        return transition.data() + (s * num_actions + a) * num_states;
    }
    double& r(std::size_t s, std::size_t a) { return reward[s * num_actions + a]; }
    double r(std::size_t s, std::size_t a) const { return reward[s * num_actions + a]; }
    double& c(std::size_t s, std::size_t a) { return cost[s * num_actions + a]; }
    double c(std::size_t s, std::size_t a) const { return cost[s * num_actions + a]; }

    double signal(Signal which, std::size_t s, std::size_t a) const {
        return which == Signal::reward ? r(s, a) : c(s, a);
    }

    void validate() const {
        if (num_states == 0 || num_actions == 0) throw InvalidInput("cmdp: empty state or action set");
        if (transition.size() != num_states * num_actions * num_states || reward.size() != num_states * num_actions ||
            cost.size() != num_states * num_actions || initial.size() != num_states)
            throw InvalidInput("cmdp: array sizes do not match counts");
        if (!(discount >= 0.0 && discount < 1.0)) throw InvalidInput("cmdp: discount must lie in [0,1)");
        if (!(threshold >= 0.0)) throw InvalidInput("cmdp: threshold must be >= 0");
        for (std::size_t s = 0; s < num_states; ++s)
            for (std::size_t a = 0; a < num_actions; ++a) {
                const double* pr = row(s, a);
                double total = 0.0;
                for (std::size_t n = 0; n < num_states; ++n) {
                    if (pr[n] < 0.0) throw InvalidInput("cmdp: negative transition probability");
                    total += pr[n];
                }
                if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("cmdp: transition row does not sum to 1");
                if (!(c(s, a) >= 0.0)) throw InvalidInput("cmdp: costs must be nonnegative");
            }
        double total = 0.0;
        for (double p0 : initial) {
            if (p0 < 0.0) throw InvalidInput("cmdp: negative initial probability");
            total += p0;
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("cmdp: initial distribution does not sum to 1");
    }
};

/// Row-stochastic policy table pi(a|s).
struct StochasticPolicy {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> probs;

    StochasticPolicy() = default;
    StochasticPolicy(std::size_t states, std::size_t actions)
        : num_states(states), num_actions(actions), probs(states * actions, 0.0) {}

    static StochasticPolicy uniform(std::size_t states, std::size_t actions) {
        StochasticPolicy pi(states, actions);
        std::fill(pi.probs.begin(), pi.probs.end(), 1.0 / static_cast<double>(actions));
        return pi;
    }

    static StochasticPolicy deterministic(const std::vector<std::size_t>& choice, std::size_t actions) {
        StochasticPolicy pi(choice.size(), actions);
        for (std::size_t s = 0; s < choice.size(); ++s) pi(s, choice[s]) = 1.0;
        return pi;
    }

    /// Dirichlet(1) rows: uniform over the simplex.
    static StochasticPolicy random(std::size_t states, std::size_t actions, Rng& rng) {
        StochasticPolicy pi(states, actions);
        std::exponential_distribution<double> expo(1.0);
        for (std::size_t s = 0; s < states; ++s) {
            double total = 0.0;
            for (std::size_t a = 0; a < actions; ++a) total += (pi(s, a) = expo(rng));
            for (std::size_t a = 0; a < actions; ++a) pi(s, a) /= total;
        }
        return pi;
    }

    double& operator()(std::size_t s, std::size_t a) { return probs[s * num_actions + a]; }
    double operator()(std::size_t s, std::size_t a) const { return probs[s * num_actions + a]; }
    const double* row(std::size_t s) const { return probs.data() + s * num_actions; }

    void validate(double tol = 1e-9) const {
        if (probs.size() != num_states * num_actions) throw InvalidInput("policy: table size mismatch");
        for (std::size_t s = 0; s < num_states; ++s) {
            double total = 0.0;
            for (std::size_t a = 0; a < num_actions; ++a) {
                const double p = (*this)(s, a);
                if (!(p >= 0.0)) throw InvalidInput("policy: negative or NaN probability in row " + std::to_string(s));
                total += p;
            }
            if (std::abs(total - 1.0) > tol)
                throw InvalidInput("policy: row " + std::to_string(s) + " does not sum to 1");
        }
    }
};

struct Step {
    std::size_t state = 0;
    std::size_t action = 0;
    double reward = 0.0;
    double cost = 0.0;
    std::size_t next_state = 0;
};

using Trajectory = std::vector<Step>;

inline double discounted_return(const Trajectory& tau, double gamma, Signal which) {
    double total = 0.0;
    double weight = 1.0;
    for (const Step& step : tau) {
        total += weight * (which == Signal::reward ? step.reward : step.cost);
        weight *= gamma;
    }
    return total;
}

/// Sum of the raw signal; logged next to the discounted cost-return.
inline double undiscounted_return(const Trajectory& tau, Signal which) {
    double total = 0.0;
    for (const Step& step : tau) total += which == Signal::reward ? step.reward : step.cost;
    return total;
}

/// Q-table together with the matching state values V(s) = sum_a pi(a|s) Q(s,a).
struct PolicyValues {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> q;
    std::vector<double> v;
    double residual = 0.0;

    double operator()(std::size_t s, std::size_t a) const { return q[s * num_actions + a]; }
};

namespace detail {

inline void check_policy_shape(const Cmdp& m, const StochasticPolicy& pi) {
    if (pi.num_states != m.num_states || pi.num_actions != m.num_actions)
        throw InvalidInput("policy shape does not match the cmdp");
    pi.validate();
}

inline void q_from_v(const Cmdp& m, Signal which, const std::vector<double>& v, std::vector<double>& q) {
    q.assign(m.num_states * m.num_actions, 0.0);
    for (std::size_t s = 0; s < m.num_states; ++s)
        for (std::size_t a = 0; a < m.num_actions; ++a) {
            const double* pr = m.row(s, a);
            double next = 0.0;
            for (std::size_t n = 0; n < m.num_states; ++n) next += pr[n] * v[n];
            q[s * m.num_actions + a] = m.signal(which, s, a) + m.discount * next;
        }
}

inline void v_from_q(const StochasticPolicy& pi, const std::vector<double>& q, std::vector<double>& v) {
    v.assign(pi.num_states, 0.0);
    for (std::size_t s = 0; s < pi.num_states; ++s) {
        double total = 0.0;
        for (std::size_t a = 0; a < pi.num_actions; ++a) total += pi(s, a) * q[s * pi.num_actions + a];
        v[s] = total;
    }
}

} // namespace detail

/// Largest |Q(s,a) - x(s,a) - gamma sum_s' P(s'|s,a) sum_a' pi(a'|s') Q(s',a')|.
inline double bellman_residual(const Cmdp& m, const StochasticPolicy& pi, Signal which, const std::vector<double>& q) {
    std::vector<double> v;
    std::vector<double> backup;
    detail::v_from_q(pi, q, v);
    detail::q_from_v(m, which, v, backup);
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) worst = std::max(worst, std::abs(q[i] - backup[i]));
    return worst;
}

/// Exact Q^pi for the chosen signal. Direct LU solve of the |S| system when
/// |S||A| <= 4096, fixed-point iteration otherwise; both stop at residual <= 1e-12.
inline PolicyValues exact_policy_evaluation(const Cmdp& m, const StochasticPolicy& pi, Signal which) {
    detail::check_policy_shape(m, pi);
    const std::size_t ns = m.num_states;
    const std::size_t na = m.num_actions;

    // Policy-averaged signal and transition matrix.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ns));
    Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns));
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t a = 0; a < na; ++a) {
            const double w = pi(s, a);
            if (w == 0.0) continue;
            x(static_cast<Eigen::Index>(s)) += w * m.signal(which, s, a);
            const double* pr = m.row(s, a);
            for (std::size_t n = 0; n < ns; ++n)
                p_pi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n)) += w * pr[n];
        }

    PolicyValues out;
    out.num_states = ns;
    out.num_actions = na;
    std::vector<double> v(ns, 0.0);
    constexpr double target = 1e-12;

    if (ns * na <= 4096) {
        const Eigen::MatrixXd system =
            Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns)) -
            m.discount * p_pi;
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
        Eigen::VectorXd sol = lu.solve(x);
        // A couple of refinement sweeps push the residual to rounding level.
        for (int k = 0; k < 3; ++k) {
            const Eigen::VectorXd err = x - system * sol;
            if (err.cwiseAbs().maxCoeff() <= 1e-15) break;
            sol += lu.solve(err);
        }
        for (std::size_t s = 0; s < ns; ++s) v[s] = sol(static_cast<Eigen::Index>(s));
        detail::q_from_v(m, which, v, out.q);
    } else {
        std::vector<double> q;
        detail::q_from_v(m, which, v, q);
        for (int it = 0; it < 1000000; ++it) {
            detail::v_from_q(pi, q, v);
            std::vector<double> next;
            detail::q_from_v(m, which, v, next);
            double delta = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) delta = std::max(delta, std::abs(next[i] - q[i]));
            q.swap(next);
            if (delta <= target * (1.0 - m.discount)) break;
        }
        out.q = std::move(q);
    }
    detail::v_from_q(pi, out.q, out.v);
    out.residual = bellman_residual(m, pi, which, out.q);
    return out;
}

/// sum_s iota(s) V(s): the expected discounted return from the initial distribution.
inline double expected_initial_value(const Cmdp& m, const PolicyValues& values) {
    double total = 0.0;
    for (std::size_t s = 0; s < m.num_states; ++s) total += m.initial[s] * values.v[s];
    return total;
}

inline double expected_return(const Cmdp& m, const StochasticPolicy& pi, Signal which) {
    return expected_initial_value(m, exact_policy_evaluation(m, pi, which));
}

inline bool is_safe(const Cmdp& m, const StochasticPolicy& pi, double d, double tol) {
    return expected_return(m, pi, Signal::cost) <= d + tol;
}

inline bool is_safe(const Cmdp& m, const StochasticPolicy& pi, double tol = 0.0) {
    return is_safe(m, pi, m.threshold, tol);
}

enum class Extremum { max, min };

/// Value iteration where states with fixed[s] < num_actions follow that action and the
/// remaining states optimise. Returns V and the greedy completion.
struct RestrictedOptimum {
    std::vector<double> v;
    std::vector<std::size_t> policy;
};

inline RestrictedOptimum restricted_optimal_values(const Cmdp& m, Signal which, Extremum dir,
                                                   const std::vector<std::size_t>& fixed, double tol = 1e-13) {
    const std::size_t ns = m.num_states;
    const std::size_t na = m.num_actions;
    RestrictedOptimum out{std::vector<double>(ns, 0.0), std::vector<std::size_t>(ns, 0)};
    std::vector<double> next(ns);
    const bool maximise = dir == Extremum::max;
    for (int it = 0; it < 100000; ++it) {
        double delta = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            const bool pinned = fixed[s] < na;
            double best = maximise ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
            std::size_t best_a = 0;
            for (std::size_t a = pinned ? fixed[s] : 0; a < (pinned ? fixed[s] + 1 : na); ++a) {
                const double* pr = m.row(s, a);
                double value = 0.0;
                for (std::size_t n = 0; n < ns; ++n) value += pr[n] * out.v[n];
                value = m.signal(which, s, a) + m.discount * value;
                if (maximise ? value > best : value < best) {
                    best = value;
                    best_a = a;
                }
            }
            next[s] = best;
            out.policy[s] = best_a;
            delta = std::max(delta, std::abs(best - out.v[s]));
        }
        out.v.swap(next);
        if (delta <= tol * (1.0 - m.discount)) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simulation

inline std::size_t sample_initial_state(const Cmdp& m, Rng& rng) { return sample_discrete(m.initial, rng); }

inline std::size_t sample_next_state(const Cmdp& m, std::size_t s, std::size_t a, Rng& rng) {
    const double* pr = m.row(s, a);
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t n = 0; n < m.num_states; ++n) {
        if (pr[n] > 0.0) last = n;
        acc += pr[n];
        if (u < acc) return n;
    }
    return last;
}

/// Rollout of `steps` transitions under a policy table, starting from iota.
inline Trajectory rollout(const Cmdp& m, const StochasticPolicy& pi, Rng& rng, std::size_t steps) {
    Trajectory tau;
    tau.reserve(steps);
    std::size_t s = sample_initial_state(m, rng);
    for (std::size_t t = 0; t < steps; ++t) {
        const std::size_t a = sample_discrete(std::vector<double>(pi.row(s), pi.row(s) + pi.num_actions), rng);
        const std::size_t n = sample_next_state(m, s, a, rng);
        tau.push_back({s, a, m.r(s, a), m.c(s, a), n});
        s = n;
    }
    return tau;
}

// ---------------------------------------------------------------------------
// Text format
//
//   cmdp 1
//   states <S> actions <A> gamma <g> threshold <d> horizon <H>
//   initial <k> <s>:<p> ...
//   <s> <a> <reward> <cost> <k> <s'>:<p> ...      (S*A lines)

namespace detail {

inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& token) {
    double x = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), x);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw LoadError("cannot parse number '" + token + "'");
    return x;
}

inline std::pair<std::size_t, double> parse_sparse_entry(const std::string& token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) throw LoadError("bad sparse entry '" + token + "'");
    return {std::stoul(token.substr(0, colon)), parse_double(token.substr(colon + 1))};
}

inline std::string expect_word(std::istream& in, const char* word) {
    std::string got;
    if (!(in >> got) || got != word) throw LoadError(std::string("expected '") + word + "' but read '" + got + "'");
    return got;
}

} // namespace detail

inline void write_cmdp(std::ostream& out, const Cmdp& m) {
    using detail::format_double;
    out << "cmdp 1\n";
    out << "states " << m.num_states << " actions " << m.num_actions << " gamma " << format_double(m.discount)
        << " threshold " << format_double(m.threshold) << " horizon " << m.horizon_cap << "\n";
    std::size_t nonzero = 0;
    for (double p : m.initial) nonzero += p != 0.0;
    out << "initial " << nonzero;
    for (std::size_t s = 0; s < m.num_states; ++s)
        if (m.initial[s] != 0.0) out << ' ' << s << ':' << format_double(m.initial[s]);
    out << '\n';
    for (std::size_t s = 0; s < m.num_states; ++s)
        for (std::size_t a = 0; a < m.num_actions; ++a) {
            const double* pr = m.row(s, a);
            std::size_t k = 0;
            for (std::size_t n = 0; n < m.num_states; ++n) k += pr[n] != 0.0;
            out << s << ' ' << a << ' ' << format_double(m.r(s, a)) << ' ' << format_double(m.c(s, a)) << ' ' << k;
            for (std::size_t n = 0; n < m.num_states; ++n)
                if (pr[n] != 0.0) out << ' ' << n << ':' << format_double(pr[n]);
            out << '\n';
        }
}

inline Cmdp read_cmdp(std::istream& in) {
    using detail::expect_word;
    using detail::parse_double;
    expect_word(in, "cmdp");
    int version = 0;
    if (!(in >> version) || version != 1) throw LoadError("unsupported cmdp format version");
    std::size_t ns = 0, na = 0, horizon = 0;
    std::string gamma, d;
    expect_word(in, "states");
    in >> ns;
    expect_word(in, "actions");
    in >> na;
    expect_word(in, "gamma");
    in >> gamma;
    expect_word(in, "threshold");
    in >> d;
    expect_word(in, "horizon");
    in >> horizon;
    if (!in) throw LoadError("truncated cmdp header");
    Cmdp m(ns, na, parse_double(gamma), parse_double(d), horizon);
    expect_word(in, "initial");
    std::size_t k = 0;
    in >> k;
    for (std::size_t i = 0; i < k; ++i) {
        std::string tok;
        in >> tok;
        const auto [s, p] = detail::parse_sparse_entry(tok);
        if (s >= ns) throw LoadError("initial state out of range");
        m.initial[s] = p;
    }
    for (std::size_t line = 0; line < ns * na; ++line) {
        std::size_t s = 0, a = 0;
        std::string r, c;
        if (!(in >> s >> a >> r >> c >> k)) throw LoadError("truncated cmdp body");
        if (s >= ns || a >= na) throw LoadError("state/action index out of range");
        m.r(s, a) = parse_double(r);
        m.c(s, a) = parse_double(c);
        for (std::size_t i = 0; i < k; ++i) {
            std::string tok;
            in >> tok;
            const auto [n, p] = detail::parse_sparse_entry(tok);
            if (n >= ns) throw LoadError("successor out of range");
            m.p(s, a, n) = p;
        }
    }
    m.validate();
    return m;
}

inline std::string to_text(const Cmdp& m) {
    std::ostringstream out;
    write_cmdp(out, m);
    return out.str();
}

} // namespace sagui
