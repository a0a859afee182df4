#pragma once

#include "sagui/abstraction.hpp"
#include "sagui/keyvalue.hpp"

#include <array>
#include <ostream>
#include <utility>

namespace sagui {

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Hazard gridworld. Target states are (cell, goal index); the source drops the goal.
///
/// Actions: 0 up, 1 down, 2 left, 3 right, 4 stay. With probability slip_prob the
/// intended action is replaced by a uniformly random one; moves into walls stay put.
/// Costs are 1 for every step spent on a hazard cell, rewards goal_reward for every
/// step spent on the active goal. Neither ends the episode.
struct GridHazardSpec {
    int width = 4;
    int height = 4;
    std::vector<Cell> hazards;
    std::vector<Cell> goals;
    std::vector<Cell> starts{{0, 0}};
    double slip_prob = 0.1;
    double goal_reward = 1.0;
    std::size_t horizon_cap = 100;
    double discount = 0.9;
    double target_threshold = 2.0;
    double source_threshold = 1.0;

    static constexpr std::size_t num_actions = 5;

    std::size_t num_cells() const { return static_cast<std::size_t>(width * height); }
    std::size_t num_goal_slots() const { return std::max<std::size_t>(1, goals.size()); }
    std::size_t cell_index(Cell c) const { return static_cast<std::size_t>(c.y * width + c.x); }
    Cell cell_at(std::size_t index) const {
        return {static_cast<int>(index % static_cast<std::size_t>(width)),
                static_cast<int>(index / static_cast<std::size_t>(width))};
    }
    bool inside(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
    bool is_hazard(Cell c) const { return std::find(hazards.begin(), hazards.end(), c) != hazards.end(); }

    void validate() const {
        if (width <= 0 || height <= 0) throw InvalidInput("grid: dimensions must be positive");
        if (!(slip_prob >= 0.0 && slip_prob <= 1.0)) throw InvalidInput("grid: slip_prob must be a probability");
        if (starts.empty()) throw InvalidInput("grid: at least one start cell required");
        for (const auto& h : hazards)
            if (!inside(h)) throw InvalidInput("grid: hazard outside the grid");
        for (const auto& s : starts)
            if (!inside(s)) throw InvalidInput("grid: start outside the grid");
        for (const auto& g : goals) {
            if (!inside(g)) throw InvalidInput("grid: goal outside the grid");
            if (is_hazard(g)) throw InvalidInput("grid: goal placed on a hazard cell");
        }
    }
};

/// The shipped goal-augmented 4x4 layout: 2 hazards, 3 goals, start in a corner.
inline GridHazardSpec default_grid_spec() {
    GridHazardSpec spec;
    spec.hazards = {{1, 2}, {2, 1}};
    spec.goals = {{3, 3}, {3, 0}, {0, 3}};
    return spec;
}

inline Cell grid_move(const GridHazardSpec& spec, Cell c, std::size_t action) {
    static constexpr std::array<std::pair<int, int>, 5> delta{{{0, 1}, {0, -1}, {-1, 0}, {1, 0}, {0, 0}}};
    const Cell next{c.x + delta[action].first, c.y + delta[action].second};
    return spec.inside(next) ? next : c;
}

inline Cmdp grid_target(const GridHazardSpec& spec) {
    spec.validate();
    const std::size_t cells = spec.num_cells();
    const std::size_t slots = spec.num_goal_slots();
    const std::size_t na = GridHazardSpec::num_actions;
    Cmdp m(cells * slots, na, spec.discount, spec.target_threshold, spec.horizon_cap);
    for (std::size_t g = 0; g < slots; ++g)
        for (std::size_t ci = 0; ci < cells; ++ci) {
            const std::size_t s = g * cells + ci;
            const Cell c = spec.cell_at(ci);
            for (std::size_t a = 0; a < na; ++a) {
                for (std::size_t actual = 0; actual < na; ++actual) {
                    const double prob = (actual == a ? 1.0 - spec.slip_prob : 0.0) + spec.slip_prob / na;
                    if (prob == 0.0) continue;
                    m.p(s, a, g * cells + spec.cell_index(grid_move(spec, c, actual))) += prob;
                }
                m.c(s, a) = spec.is_hazard(c) ? 1.0 : 0.0;
                m.r(s, a) = !spec.goals.empty() && spec.goals[g] == c ? spec.goal_reward : 0.0;
            }
        }
    const double mass = 1.0 / static_cast<double>(spec.starts.size() * slots);
    for (std::size_t g = 0; g < slots; ++g)
        for (const auto& start : spec.starts) m.initial[g * cells + spec.cell_index(start)] += mass;
    return m;
}

/// Xi((cell, goal)) = cell.
inline StateAbstraction grid_abstraction(const GridHazardSpec& spec) {
    const std::size_t cells = spec.num_cells();
    std::vector<std::size_t> xi(cells * spec.num_goal_slots());
    for (std::size_t s = 0; s < xi.size(); ++s) xi[s] = s % cells;
    return make_abstraction(std::move(xi), cells);
}

struct GridSourceTask {
    Cmdp source;
    StateAbstraction abstraction;
};

inline GridSourceTask grid_source(const GridHazardSpec& spec) {
    auto abs = grid_abstraction(spec);
    Cmdp source = build_source_task(grid_target(spec), abs);
    source.threshold = spec.source_threshold;
    std::fill(source.reward.begin(), source.reward.end(), 0.0);
    return {std::move(source), std::move(abs)};
}

/// Cell coordinates per source state; the feature map for the displacement reward.
inline std::vector<std::array<double, 2>> grid_positions(const GridHazardSpec& spec) {
    std::vector<std::array<double, 2>> out(spec.num_cells());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Cell c = spec.cell_at(i);
        out[i] = {static_cast<double>(c.x), static_cast<double>(c.y)};
    }
    return out;
}

namespace detail {

inline std::vector<Cell> parse_cells(const std::string& text) {
    std::vector<Cell> cells;
    for (const auto& g : KeyValues::parse_groups(text)) {
        if (g.size() != 2) throw ConfigError("cell lists are 'x,y;x,y;...'");
        cells.push_back({static_cast<int>(g[0]), static_cast<int>(g[1])});
    }
    return cells;
}

inline std::string format_cells(const std::vector<Cell>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(cells[i].x) + "," + std::to_string(cells[i].y);
    }
    return out;
}

} // namespace detail

/// Reads a grid spec from key=value text; unspecified keys keep the shipped layout.
inline GridHazardSpec grid_spec_from(const KeyValues& kv, const std::string& prefix = "") {
    GridHazardSpec spec = default_grid_spec();
    spec.width = static_cast<int>(kv.integer_or(prefix + "width", spec.width));
    spec.height = static_cast<int>(kv.integer_or(prefix + "height", spec.height));
    if (kv.has(prefix + "hazards")) spec.hazards = detail::parse_cells(kv.get(prefix + "hazards"));
    if (kv.has(prefix + "goals")) spec.goals = detail::parse_cells(kv.get(prefix + "goals"));
    if (kv.has(prefix + "starts")) spec.starts = detail::parse_cells(kv.get(prefix + "starts"));
    spec.slip_prob = kv.number_or(prefix + "slip_prob", spec.slip_prob);
    spec.goal_reward = kv.number_or(prefix + "goal_reward", spec.goal_reward);
    spec.horizon_cap = static_cast<std::size_t>(kv.integer_or(prefix + "horizon_cap", static_cast<long long>(spec.horizon_cap)));
    spec.discount = kv.number_or(prefix + "discount", spec.discount);
    spec.target_threshold = kv.number_or(prefix + "target_threshold", spec.target_threshold);
    spec.source_threshold = kv.number_or(prefix + "source_threshold", spec.source_threshold);
    spec.validate();
    return spec;
}

/// CSV of object positions: kind,x,y,radius (radius 0.5 = one cell).
inline void write_grid_layout(std::ostream& out, const GridHazardSpec& spec) {
    out << "kind,x,y,radius\n";
    for (const auto& h : spec.hazards) out << "hazard," << h.x << ',' << h.y << ",0.5\n";
    for (const auto& g : spec.goals) out << "goal," << g.x << ',' << g.y << ",0.5\n";
    for (const auto& s : spec.starts) out << "start," << s.x << ',' << s.y << ",0.5\n";
}

} // namespace sagui
