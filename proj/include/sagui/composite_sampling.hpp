#pragma once

#include "sagui/replay_buffer.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace sagui {

enum class SamplingMode { linear_decay, control_switch, guide_only, student_only };

inline SamplingMode parse_sampling_mode(const std::string& name) {
    if (name == "linear-decay") return SamplingMode::linear_decay;
    if (name == "control-switch") return SamplingMode::control_switch;
    if (name == "guisam") return SamplingMode::guide_only;
    if (name == "stusam") return SamplingMode::student_only;
    throw ConfigError("unknown sampling mode '" + name + "' (expected linear-decay, control-switch, guisam, stusam)");
}

inline const char* to_string(SamplingMode m) {
    switch (m) {
    case SamplingMode::linear_decay: return "linear-decay";
    case SamplingMode::control_switch: return "control-switch";
    case SamplingMode::guide_only: return "guisam";
    case SamplingMode::student_only: return "stusam";
    }
    return "?";
}

/// Linearly annealed guide probability with a step-wise/trajectory-wise mode mix.
struct LinearDecayState {
    double p_pi = 1.0;
    double p_wise = 1.0;
    double upsilon = 0.01;
    std::size_t iterations = 0;
    bool step_wise = true;
    Behaviour b = Behaviour::guide;

    explicit LinearDecayState(double decay = 0.01) : upsilon(decay) {
        if (!(decay > 0.0)) throw InvalidInput("linear decay: upsilon must be positive");
    }

    /// Both probabilities are 1 - k upsilon after k iterations (computed from k, so
    /// upsilon = 1/N lands on exactly 0 after N iterations), clamped at 0.
    void iteration_start() {
        ++iterations;
        p_pi = std::max(0.0, 1.0 - static_cast<double>(iterations) * upsilon);
        p_wise = p_pi;
    }

    Behaviour draw(Rng& rng) const { return uniform01(rng) < p_pi ? Behaviour::guide : Behaviour::student; }

    Behaviour episode_start(Rng& rng) {
        step_wise = uniform01(rng) < p_wise;
        b = draw(rng);
        return b;
    }

    /// Called before every action after the first; redraws b only in step-wise episodes.
    Behaviour env_step(Rng& rng) {
        if (step_wise) b = draw(rng);
        return b;
    }
};

/// Student acts until the first positive cost; the guide acts for the rest of the episode.
struct ControlSwitchState {
    Behaviour b = Behaviour::student;
    bool switched = false;

    void episode_start() {
        b = Behaviour::student;
        switched = false;
    }

    /// last_cost is c_{t-1} (0 at the first step of an episode).
    Behaviour select(double last_cost) {
        if (!switched && last_cost > 0.0) {
            switched = true;
            b = Behaviour::guide;
        }
        return b;
    }
};

/// Behaviour-policy selection for one of the four sampling modes.
class BehaviourSelector {
public:
    BehaviourSelector(SamplingMode mode, double upsilon) : mode_(mode), decay_(upsilon) {}

    SamplingMode mode() const { return mode_; }

    void iteration_start() {
        if (mode_ == SamplingMode::linear_decay) decay_.iteration_start();
    }

    Behaviour episode_start(Rng& rng) {
        switch (mode_) {
        case SamplingMode::linear_decay: return decay_.episode_start(rng);
        case SamplingMode::control_switch: switch_.episode_start(); return switch_.b;
        case SamplingMode::guide_only: return Behaviour::guide;
        case SamplingMode::student_only: return Behaviour::student;
        }
        return Behaviour::student;
    }

    /// Behaviour for step t > 0 given the cost observed at step t - 1.
    Behaviour next(double last_cost, Rng& rng) {
        switch (mode_) {
        case SamplingMode::linear_decay: return decay_.env_step(rng);
        case SamplingMode::control_switch: return switch_.select(last_cost);
        case SamplingMode::guide_only: return Behaviour::guide;
        case SamplingMode::student_only: return Behaviour::student;
        }
        return Behaviour::student;
    }

    /// Current probability of acting with the guide; NaN for control-switch (event driven).
    double guide_probability() const {
        switch (mode_) {
        case SamplingMode::linear_decay: return decay_.p_pi;
        case SamplingMode::guide_only: return 1.0;
        case SamplingMode::student_only: return 0.0;
        default: return std::numeric_limits<double>::quiet_NaN();
        }
    }

    const LinearDecayState& decay() const { return decay_; }

private:
    SamplingMode mode_;
    LinearDecayState decay_;
    ControlSwitchState switch_;
};

/// Separate guide and student buffers; each batch element comes from the student buffer
/// with probability p_student, falling back to whichever buffer is non-empty.
template <class T> class DualBuffers {
public:
    DualBuffers(std::size_t capacity, double p_student = 0.75)
        : guide_(capacity), student_(capacity), p_student_(p_student) {
        if (!(p_student >= 0.0 && p_student <= 1.0)) throw InvalidInput("dual buffers: p_student not a probability");
    }

    void push(T sample, Behaviour b) { (b == Behaviour::guide ? guide_ : student_).push(std::move(sample)); }

    std::vector<T> sample(std::size_t batch_size, Rng& rng) {
        if (guide_.empty() && student_.empty()) throw EmptyBufferError("dual buffers: both buffers are empty");
        std::vector<T> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < batch_size; ++i) {
            bool from_student = uniform01(rng) < p_student_;
            if (from_student && student_.empty()) {
                from_student = false;
                ++fallbacks_;
            } else if (!from_student && guide_.empty()) {
                from_student = true;
                ++fallbacks_;
            }
            batch.push_back((from_student ? student_ : guide_).sample_one(rng));
        }
        return batch;
    }

    const ReplayBuffer<T>& guide() const { return guide_; }
    const ReplayBuffer<T>& student() const { return student_; }
    std::size_t size() const { return guide_.size() + student_.size(); }
    std::size_t fallbacks() const { return fallbacks_; }
    double p_student() const { return p_student_; }

private:
    ReplayBuffer<T> guide_, student_;
    double p_student_;
    std::size_t fallbacks_ = 0;
};

} // namespace sagui
