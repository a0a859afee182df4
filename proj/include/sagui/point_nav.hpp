#pragma once

#include "sagui/errors.hpp"
#include "sagui/keyvalue.hpp"
#include "sagui/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <span>
#include <vector>

namespace sagui {

using Vec2 = std::array<double, 2>;

inline double distance(const Vec2& a, const Vec2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

struct Circle {
    Vec2 center{0.0, 0.0};
    double radius = 0.1;
    bool contains(const Vec2& p) const { return distance(center, p) < radius; }
};

/// Continuous 2D point navigation with circular hazards.
///
/// Dynamics per step: vel <- (1 - damping*dt) vel + max_accel*dt*action, pos <- pos + dt*vel,
/// clamped to the square arena [-half_width, half_width]^2 (the velocity component into a wall
/// is zeroed). Cost is 1 when the new position lies inside a hazard; the target reward is the
/// decrease in goal distance plus goal_bonus on entering the goal, which ends the episode.
struct PointNavSpec {
    double half_width = 2.0;
    std::vector<Circle> hazards{{{0.0, 0.0}, 0.5}};
    Circle goal{{1.2, 1.2}, 0.3};
    bool randomize_goal = false;
    Circle start{{-1.1, -1.1}, 0.3};
    /// Probability that a source episode starts uniformly over the arena (hazards included)
    /// rather than in the start disc.
    double source_uniform_start = 0.5;
    double action_bound = 1.0;
    double dt = 0.1;
    double damping = 5.0;
    double max_accel = 5.0;
    double goal_bonus = 1.0;
    double process_noise = 0.0;
    std::size_t horizon_cap = 1000;
    double discount = 0.99;
    double target_threshold = 5.0;
    double source_threshold = 0.05;

    static constexpr std::size_t action_dim = 2;

    std::size_t safety_dim() const { return 2 * hazards.size() + 2; }
    std::size_t task_dim() const { return 2; }

    void validate() const {
        if (!(half_width > 0.0)) throw InvalidInput("point nav: half_width must be positive");
        for (const auto& h : hazards)
            if (!(h.radius > 0.0)) throw InvalidInput("point nav: hazard radius must be positive");
        if (!(goal.radius > 0.0) || !(start.radius > 0.0)) throw InvalidInput("point nav: radii must be positive");
        if (!(dt > 0.0) || !(action_bound > 0.0)) throw InvalidInput("point nav: dt and action_bound must be positive");
        if (!(source_uniform_start >= 0.0 && source_uniform_start <= 1.0))
            throw InvalidInput("point nav: source_uniform_start must be a probability");
    }
};

struct PointNavState {
    Vec2 pos{0.0, 0.0};
    Vec2 vel{0.0, 0.0};
    Vec2 goal{0.0, 0.0};
    std::size_t t = 0;
};

/// Safety block x_c (hazard offsets, own velocity) and task block x_r (goal offset).
struct Observation {
    std::vector<double> safety;
    std::vector<double> task;
    bool has_task = false;

    std::vector<double> flat() const {
        std::vector<double> out = safety;
        out.insert(out.end(), task.begin(), task.end());
        return out;
    }
};

/// Xi([x_c, x_r]) = [x_c].
inline Observation safety_map(const Observation& obs) {
    if (!obs.has_task) throw ShapeError("safety_map expects a target observation with a task block");
    return Observation{obs.safety, {}, false};
}

inline Observation observe(const PointNavSpec& spec, const PointNavState& s, bool with_task) {
    Observation obs;
    obs.safety.reserve(spec.safety_dim());
    for (const auto& h : spec.hazards) {
        obs.safety.push_back(h.center[0] - s.pos[0]);
        obs.safety.push_back(h.center[1] - s.pos[1]);
    }
    obs.safety.push_back(s.vel[0]);
    obs.safety.push_back(s.vel[1]);
    if (with_task) {
        obs.task = {s.goal[0] - s.pos[0], s.goal[1] - s.pos[1]};
        obs.has_task = true;
    }
    return obs;
}

inline Vec2 sample_in_disc(const Circle& c, Rng& rng) {
    const double angle = 2.0 * M_PI * uniform01(rng);
    const double radius = c.radius * std::sqrt(uniform01(rng));
    return {c.center[0] + radius * std::cos(angle), c.center[1] + radius * std::sin(angle)};
}

/// Start inside the start disc; with randomize_goal, the goal is redrawn uniformly in the
/// arena (away from hazards and the start) each episode.
inline PointNavState point_nav_reset(const PointNavSpec& spec, Rng& rng) {
    PointNavState s;
    s.pos = sample_in_disc(spec.start, rng);
    s.goal = spec.goal.center;
    if (spec.randomize_goal) {
        const double margin = spec.goal.radius;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const double lo = -spec.half_width + margin, hi = spec.half_width - margin;
            const Vec2 g{lo + (hi - lo) * uniform01(rng), lo + (hi - lo) * uniform01(rng)};
            bool clear = distance(g, s.pos) > 1.0;
            for (const auto& h : spec.hazards) clear = clear && distance(g, h.center) > h.radius + margin;
            if (clear) {
                s.goal = g;
                break;
            }
        }
    }
    return s;
}

struct PointNavStep {
    PointNavState next;
    double reward = 0.0;
    double cost = 0.0;
    bool goal_reached = false;
    bool terminal = false;  ///< goal reached (true termination)
    bool truncated = false; ///< horizon hit
};

inline double hazard_cost(const PointNavSpec& spec, const Vec2& p) {
    for (const auto& h : spec.hazards)
        if (h.contains(p)) return 1.0;
    return 0.0;
}

inline PointNavStep point_nav_step(const PointNavSpec& spec, const PointNavState& s, std::span<const double> action,
                                   Rng& rng, bool with_goal = true) {
    if (action.size() != PointNavSpec::action_dim) throw ShapeError("point nav: action must be 2-dimensional");
    PointNavStep out;
    PointNavState n = s;
    const double keep = 1.0 - spec.damping * spec.dt;
    for (int i = 0; i < 2; ++i) {
        double a = std::isfinite(action[i]) ? std::clamp(action[i], -spec.action_bound, spec.action_bound) : 0.0;
        a /= spec.action_bound;
        if (spec.process_noise > 0.0) a += spec.process_noise * standard_normal(rng);
        n.vel[i] = keep * s.vel[i] + spec.max_accel * spec.dt * a;
        n.pos[i] = s.pos[i] + spec.dt * n.vel[i];
        if (n.pos[i] > spec.half_width) {
            n.pos[i] = spec.half_width;
            n.vel[i] = 0.0;
        } else if (n.pos[i] < -spec.half_width) {
            n.pos[i] = -spec.half_width;
            n.vel[i] = 0.0;
        }
    }
    n.t = s.t + 1;
    out.cost = hazard_cost(spec, n.pos);
    if (with_goal) {
        const double before = distance(s.pos, s.goal);
        const double after = distance(n.pos, n.goal);
        out.goal_reached = after < spec.goal.radius;
        out.reward = before - after + (out.goal_reached ? spec.goal_bonus : 0.0);
        out.terminal = out.goal_reached;
    }
    out.truncated = !out.terminal && n.t >= spec.horizon_cap;
    out.next = n;
    return out;
}

namespace detail {

inline Circle parse_circle(const std::vector<double>& g) {
    if (g.size() != 3) throw ConfigError("circles are 'x,y,r'");
    return {{g[0], g[1]}, g[2]};
}

} // namespace detail

inline PointNavSpec point_nav_spec_from(const KeyValues& kv, const std::string& prefix = "") {
    PointNavSpec spec;
    spec.half_width = kv.number_or(prefix + "half_width", spec.half_width);
    if (kv.has(prefix + "hazards")) {
        spec.hazards.clear();
        for (const auto& g : KeyValues::parse_groups(kv.get(prefix + "hazards")))
            spec.hazards.push_back(detail::parse_circle(g));
    }
    if (kv.has(prefix + "goal")) {
        const auto groups = KeyValues::parse_groups(kv.get(prefix + "goal"));
        if (groups.size() != 1) throw ConfigError("goal expects exactly one circle");
        spec.goal = detail::parse_circle(groups.front());
    }
    if (kv.has(prefix + "start")) {
        const auto groups = KeyValues::parse_groups(kv.get(prefix + "start"));
        if (groups.size() != 1) throw ConfigError("start expects exactly one circle");
        spec.start = detail::parse_circle(groups.front());
    }
    spec.randomize_goal = kv.flag_or(prefix + "randomize_goal", spec.randomize_goal);
    spec.source_uniform_start = kv.number_or(prefix + "source_uniform_start", spec.source_uniform_start);
    spec.action_bound = kv.number_or(prefix + "action_bound", spec.action_bound);
    spec.dt = kv.number_or(prefix + "dt", spec.dt);
    spec.damping = kv.number_or(prefix + "damping", spec.damping);
    spec.max_accel = kv.number_or(prefix + "max_accel", spec.max_accel);
    spec.goal_bonus = kv.number_or(prefix + "goal_bonus", spec.goal_bonus);
    spec.process_noise = kv.number_or(prefix + "process_noise", spec.process_noise);
    spec.horizon_cap =
        static_cast<std::size_t>(kv.integer_or(prefix + "horizon_cap", static_cast<long long>(spec.horizon_cap)));
    spec.discount = kv.number_or(prefix + "discount", spec.discount);
    spec.target_threshold = kv.number_or(prefix + "target_threshold", spec.target_threshold);
    spec.source_threshold = kv.number_or(prefix + "source_threshold", spec.source_threshold);
    spec.validate();
    return spec;
}

inline void write_point_nav_layout(std::ostream& out, const PointNavSpec& spec) {
    out << "kind,x,y,radius\n";
    for (const auto& h : spec.hazards) out << "hazard," << h.center[0] << ',' << h.center[1] << ',' << h.radius << '\n';
    out << "goal," << spec.goal.center[0] << ',' << spec.goal.center[1] << ',' << spec.goal.radius << '\n';
    out << "start," << spec.start.center[0] << ',' << spec.start.center[1] << ',' << spec.start.radius << '\n';
}

} // namespace sagui
