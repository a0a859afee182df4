#pragma once

#include "sagui/grid.hpp"
#include "sagui/point_nav.hpp"

namespace sagui {

/// Result of a target-task step. Source tasks return SourceStep, which has no reward field.
template <class State> struct TargetStep {
    State next;
    double reward = 0.0;
    double cost = 0.0;
    bool terminal = false;
    bool truncated = false;
};

template <class State> struct SourceStep {
    State next;
    double cost = 0.0;
    bool terminal = false;
    bool truncated = false;
};

struct GridState {
    std::size_t state = 0;
    std::size_t t = 0;
};

inline std::vector<double> one_hot(std::size_t index, std::size_t size) {
    std::vector<double> v(size, 0.0);
    v[index] = 1.0;
    return v;
}

/// Goal-augmented grid as a sampled environment over the exact target CMDP.
class GridTargetEnv {
public:
    using State = GridState;
    using Action = std::size_t;

    explicit GridTargetEnv(GridHazardSpec spec)
        : spec_(std::move(spec)), cmdp_(grid_target(spec_)), abs_(grid_abstraction(spec_)),
          positions_(grid_positions(spec_)) {}

    State reset(Rng& rng) const { return {sample_initial_state(cmdp_, rng), 0}; }

    TargetStep<State> step(const State& s, Action a, Rng& rng) const {
        if (a >= cmdp_.num_actions) throw InvalidInput("grid: action out of range");
        TargetStep<State> out;
        out.reward = cmdp_.r(s.state, a);
        out.cost = cmdp_.c(s.state, a);
        out.next = {sample_next_state(cmdp_, s.state, a, rng), s.t + 1};
        out.truncated = out.next.t >= horizon();
        return out;
    }

    std::vector<double> observe(const State& s) const { return one_hot(s.state, cmdp_.num_states); }
    std::vector<double> guide_observe(const State& s) const { return one_hot(abs_.xi[s.state], abs_.num_source); }
    Vec2 position(const State& s) const { return positions_[abs_.xi[s.state]]; }

    std::size_t observation_dim() const { return cmdp_.num_states; }
    std::size_t guide_observation_dim() const { return abs_.num_source; }
    std::size_t num_actions() const { return cmdp_.num_actions; }
    double discount() const { return cmdp_.discount; }
    std::size_t horizon() const { return cmdp_.horizon_cap; }
    double threshold() const { return cmdp_.threshold; }

    const Cmdp& cmdp() const { return cmdp_; }
    const StateAbstraction& abstraction() const { return abs_; }
    const GridHazardSpec& spec() const { return spec_; }

private:
    GridHazardSpec spec_;
    Cmdp cmdp_;
    StateAbstraction abs_;
    std::vector<Vec2> positions_;
};

/// Reward-free source grid built from the target by the abstraction.
class GridSourceEnv {
public:
    using State = GridState;
    using Action = std::size_t;

    explicit GridSourceEnv(GridHazardSpec spec)
        : spec_(std::move(spec)), cmdp_(grid_source(spec_).source), positions_(grid_positions(spec_)) {}

    State reset(Rng& rng) const { return {sample_initial_state(cmdp_, rng), 0}; }

    SourceStep<State> step(const State& s, Action a, Rng& rng) const {
        if (a >= cmdp_.num_actions) throw InvalidInput("grid: action out of range");
        SourceStep<State> out;
        out.cost = cmdp_.c(s.state, a);
        out.next = {sample_next_state(cmdp_, s.state, a, rng), s.t + 1};
        out.truncated = out.next.t >= horizon();
        return out;
    }

    std::vector<double> observe(const State& s) const { return one_hot(s.state, cmdp_.num_states); }
    Vec2 position(const State& s) const { return positions_[s.state]; }

    std::size_t observation_dim() const { return cmdp_.num_states; }
    std::size_t num_actions() const { return cmdp_.num_actions; }
    double discount() const { return cmdp_.discount; }
    std::size_t horizon() const { return cmdp_.horizon_cap; }
    double threshold() const { return cmdp_.threshold; }

    const Cmdp& cmdp() const { return cmdp_; }

private:
    GridHazardSpec spec_;
    Cmdp cmdp_;
    std::vector<Vec2> positions_;
};

class PointNavTargetEnv {
public:
    using State = PointNavState;
    using Action = std::vector<double>;

    explicit PointNavTargetEnv(PointNavSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

    State reset(Rng& rng) const { return point_nav_reset(spec_, rng); }

    TargetStep<State> step(const State& s, const Action& a, Rng& rng) const {
        const auto r = point_nav_step(spec_, s, a, rng, true);
        return {r.next, r.reward, r.cost, r.terminal, r.truncated};
    }

    std::vector<double> observe(const State& s) const { return observe_obs(s).flat(); }
    std::vector<double> guide_observe(const State& s) const { return safety_map(observe_obs(s)).flat(); }
    Observation observe_obs(const State& s) const { return sagui::observe(spec_, s, true); }
    Vec2 position(const State& s) const { return s.pos; }

    std::size_t observation_dim() const { return spec_.safety_dim() + spec_.task_dim(); }
    std::size_t guide_observation_dim() const { return spec_.safety_dim(); }
    std::size_t action_dim() const { return PointNavSpec::action_dim; }
    double action_bound() const { return spec_.action_bound; }
    double discount() const { return spec_.discount; }
    std::size_t horizon() const { return spec_.horizon_cap; }
    double threshold() const { return spec_.target_threshold; }

    const PointNavSpec& spec() const { return spec_; }

private:
    PointNavSpec spec_;
};

/// Goal-free version: observations carry only the safety block and steps carry no reward.
class PointNavSourceEnv {
public:
    using State = PointNavState;
    using Action = std::vector<double>;

    explicit PointNavSourceEnv(PointNavSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

    State reset(Rng& rng) const {
        PointNavState s;
        if (uniform01(rng) < spec_.source_uniform_start) {
            const double w = spec_.half_width;
            s.pos = {-w + 2.0 * w * uniform01(rng), -w + 2.0 * w * uniform01(rng)};
        } else {
            s.pos = sample_in_disc(spec_.start, rng);
        }
        return s;
    }

    SourceStep<State> step(const State& s, const Action& a, Rng& rng) const {
        const auto r = point_nav_step(spec_, s, a, rng, false);
        return {r.next, r.cost, false, r.truncated};
    }

    std::vector<double> observe(const State& s) const { return sagui::observe(spec_, s, false).safety; }
    Vec2 position(const State& s) const { return s.pos; }

    std::size_t observation_dim() const { return spec_.safety_dim(); }
    std::size_t action_dim() const { return PointNavSpec::action_dim; }
    double action_bound() const { return spec_.action_bound; }
    double discount() const { return spec_.discount; }
    std::size_t horizon() const { return spec_.horizon_cap; }
    double threshold() const { return spec_.source_threshold; }

    const PointNavSpec& spec() const { return spec_; }

private:
    PointNavSpec spec_;
};

} // namespace sagui
