#include "sagui/abstraction.hpp"
#include "sagui/auxiliary_reward.hpp"
#include "sagui/envs.hpp"
#include "sagui/sac_lagrangian.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

namespace {

using namespace sagui;

TEST(GridEnv, NoHazardSourceIsTargetWithoutGoal) {
    GridHazardSpec spec;
    spec.width = 2;
    spec.height = 1;
    spec.goals = {{1, 0}};
    spec.starts = {{0, 0}};
    const Cmdp target = grid_target(spec);
    const auto task = grid_source(spec);
    ASSERT_EQ(target.num_states, 2u);
    EXPECT_EQ(task.source.transition, target.transition);
    EXPECT_EQ(task.source.cost, target.cost);
    EXPECT_EQ(task.source.initial, target.initial);
    for (double r : task.source.reward) EXPECT_EQ(r, 0.0);
    EXPECT_EQ(target.r(1, 4), spec.goal_reward);
}

TEST(GridEnv, ShippedLayoutPassesIrrelevanceCheck) {
    const auto spec = default_grid_spec();
    EXPECT_EQ(spec.width, 4);
    EXPECT_EQ(spec.hazards.size(), 2u);
    EXPECT_EQ(spec.goals.size(), 3u);
    const auto report = check_qc_irrelevance(grid_target(spec), grid_abstraction(spec), 1e-10);
    EXPECT_TRUE(report.holds);
}

TEST(GridEnv, DeterministicPathThroughOneHazard) {
    // 4x1 corridor, hazard at x = 2, always move right: the hazard is occupied at step 2 only.
    GridHazardSpec spec;
    spec.width = 4;
    spec.height = 1;
    spec.hazards = {{2, 0}};
    spec.slip_prob = 0.0;
    const Cmdp m = grid_target(spec);
    const auto right = StochasticPolicy::deterministic(std::vector<std::size_t>(m.num_states, 3), 5);
    EXPECT_NEAR(expected_return(m, right, Signal::cost), m.discount * m.discount, 1e-14);
}

TEST(GridEnv, SlipDistribution) {
    const auto spec = default_grid_spec();
    const Cmdp m = grid_target(spec);
    // From (0,0) "up": up with 0.9 + 0.02, the two blocked moves and "stay" keep the agent put.
    const std::size_t s = spec.cell_index({0, 0});
    EXPECT_NEAR(m.p(s, 0, spec.cell_index({0, 1})), 0.92, 1e-15);
    EXPECT_NEAR(m.p(s, 0, spec.cell_index({1, 0})), 0.02, 1e-15);
    EXPECT_NEAR(m.p(s, 0, s), 0.06, 1e-15);
}

TEST(GridEnv, SpecValidation) {
    auto spec = default_grid_spec();
    spec.goals.push_back(spec.hazards.front());
    EXPECT_THROW(grid_target(spec), InvalidInput);
    spec = default_grid_spec();
    spec.slip_prob = 1.5;
    EXPECT_THROW(spec.validate(), InvalidInput);
    spec = default_grid_spec();
    spec.hazards.push_back({7, 7});
    EXPECT_THROW(spec.validate(), InvalidInput);
}

TEST(GridEnv, ParseCells) {
    const auto cells = detail::parse_cells("1,2;2,1");
    ASSERT_EQ(cells.size(), 2u);
    EXPECT_EQ(cells[0], (Cell{1, 2}));
    EXPECT_EQ(cells[1], (Cell{2, 1}));
    EXPECT_EQ(detail::format_cells(cells), "1,2;2,1");
    EXPECT_ANY_THROW(detail::parse_cells("1;2"));
}

TEST(GridEnv, GuideObservationDropsGoal) {
    const auto spec = default_grid_spec();
    GridTargetEnv target(spec);
    GridSourceEnv source(spec);
    const std::size_t cells = spec.num_cells();
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const GridState with_goal0{cell, 0}, with_goal2{2 * cells + cell, 0};
        EXPECT_EQ(target.guide_observe(with_goal0), target.guide_observe(with_goal2));
        EXPECT_EQ(target.guide_observe(with_goal2), source.observe(GridState{cell, 0}));
        EXPECT_NE(target.observe(with_goal0), target.observe(with_goal2));
    }
    EXPECT_EQ(target.num_actions(), source.num_actions());
}

TEST(GridEnv, SameSeedSameTrajectory) {
    GridTargetEnv env(default_grid_spec());
    auto run = [&](std::uint64_t seed) {
        Rng rng(seed);
        std::vector<std::size_t> states;
        auto s = env.reset(rng);
        for (int t = 0; t < 50; ++t) {
            s = env.step(s, uniform_index(rng, 5), rng).next;
            states.push_back(s.state);
        }
        return states;
    };
    EXPECT_EQ(run(4), run(4));
    EXPECT_NE(run(4), run(5));
}

PointNavSpec open_arena() {
    PointNavSpec spec;
    spec.hazards = {{{1.0, -1.0}, 0.4}};
    spec.goal = {{1.0, 0.0}, 0.3};
    return spec;
}

TEST(PointNav, ZeroActionAtRestStaysPut) {
    const auto spec = open_arena();
    Rng rng(1);
    for (const Vec2 pos : {Vec2{-1.0, 1.0}, Vec2{1.1, -1.1}}) {
        PointNavState s;
        s.pos = pos;
        s.goal = spec.goal.center;
        const auto step = point_nav_step(spec, s, std::vector<double>{0.0, 0.0}, rng);
        EXPECT_EQ(step.next.pos, pos);
        EXPECT_EQ(step.cost, hazard_cost(spec, pos));
    }
    PointNavState inside;
    inside.pos = {1.1, -1.1};
    EXPECT_EQ(point_nav_step(spec, inside, std::vector<double>{0.0, 0.0}, rng).cost, 1.0);
}

TEST(PointNav, StraightApproachRewardIsDistanceDecrease) {
    auto spec = open_arena();
    spec.hazards.clear();
    Rng rng(2);
    PointNavState s;
    s.pos = {-1.0, 0.0};
    s.goal = spec.goal.center;
    // keep = 1 - damping dt = 0.5, so velocity 6 becomes 3 and the step covers 0.3.
    s.vel = {6.0, 0.0};
    auto step = point_nav_step(spec, s, std::vector<double>{0.0, 0.0}, rng);
    EXPECT_NEAR(step.reward, 0.3, 1e-12);
    EXPECT_FALSE(step.goal_reached);
    EXPECT_FALSE(step.terminal);

    s.pos = {0.5, 0.0};
    step = point_nav_step(spec, s, std::vector<double>{0.0, 0.0}, rng);
    EXPECT_TRUE(step.goal_reached);
    EXPECT_TRUE(step.terminal);
    EXPECT_NEAR(step.reward, 0.3 + spec.goal_bonus, 1e-12);
}

TEST(PointNav, ActionsAreClampedAndSanitized) {
    const auto spec = open_arena();
    Rng rng(3);
    PointNavState s;
    s.pos = {-1.5, 1.5};
    const auto big = point_nav_step(spec, s, std::vector<double>{50.0, -50.0}, rng);
    const auto unit = point_nav_step(spec, s, std::vector<double>{1.0, -1.0}, rng);
    EXPECT_EQ(big.next.pos, unit.next.pos);
    const auto nan = point_nav_step(spec, s, std::vector<double>{std::nan(""), 0.0}, rng);
    EXPECT_EQ(nan.next.pos, s.pos);
    EXPECT_THROW(point_nav_step(spec, s, std::vector<double>{1.0}, rng), ShapeError);
}

TEST(PointNav, RandomRolloutsTelescope) {
    const auto spec = PointNavSpec{};
    PointNavTargetEnv env(spec);
    Rng rng(4);
    std::size_t reached = 0;
    for (int episode = 0; episode < 10000; ++episode) {
        auto s = env.reset(rng);
        const double d0 = distance(s.pos, s.goal);
        double total = 0.0;
        bool goal = false;
        for (int t = 0; t < 100; ++t) {
            // Noisy drift toward the goal so that some episodes end there.
            const double dx = s.goal[0] - s.pos[0], dy = s.goal[1] - s.pos[1], norm = std::hypot(dx, dy);
            const std::vector<double> a{0.5 * dx / norm + uniform01(rng) - 0.5, 0.5 * dy / norm + uniform01(rng) - 0.5};
            const auto step = env.step(s, a, rng);
            ASSERT_TRUE(step.cost == 0.0 || step.cost == 1.0);
            total += step.reward;
            s = step.next;
            if (step.terminal) {
                goal = true;
                break;
            }
        }
        reached += goal;
        EXPECT_NEAR(total, d0 - distance(s.pos, s.goal) + (goal ? spec.goal_bonus : 0.0), 1e-9);
    }
    EXPECT_GT(reached, 0u);
}

TEST(PointNav, ArenaBoundsHold) {
    const auto spec = PointNavSpec{};
    Rng rng(5);
    PointNavState s;
    s.pos = {1.9, 1.9};
    for (int t = 0; t < 200; ++t) {
        s = point_nav_step(spec, s, std::vector<double>{1.0, 1.0}, rng).next;
        EXPECT_LE(std::abs(s.pos[0]), spec.half_width);
        EXPECT_LE(std::abs(s.pos[1]), spec.half_width);
    }
}

TEST(PointNav, SameSeedSameTrajectory) {
    auto spec = PointNavSpec{};
    spec.process_noise = 0.1;
    spec.randomize_goal = true;
    PointNavTargetEnv env(spec);
    auto run = [&](std::uint64_t seed) {
        Rng rng(seed);
        auto s = env.reset(rng);
        std::vector<double> xs;
        for (int t = 0; t < 30; ++t) {
            s = env.step(s, std::vector<double>{0.3, -0.2}, rng).next;
            xs.push_back(s.pos[0]);
            xs.push_back(s.pos[1]);
        }
        return xs;
    };
    EXPECT_EQ(run(9), run(9));
    EXPECT_NE(run(9), run(10));
}

TEST(PointNav, SourceEnvHasNoTaskBlockAndNoReward) {
    const auto spec = PointNavSpec{};
    PointNavSourceEnv source(spec);
    PointNavTargetEnv target(spec);
    Rng rng(6);
    auto s = target.reset(rng);
    s.vel = {0.2, -0.1};
    EXPECT_EQ(source.observe(s), target.guide_observe(s));
    EXPECT_EQ(source.observation_dim() + 2, target.observation_dim());
    EXPECT_EQ(source.threshold(), spec.source_threshold);
    EXPECT_EQ(target.threshold(), spec.target_threshold);
}

TEST(PointNav, SourceStartsMixUniformAndDisc) {
    auto spec = PointNavSpec{};
    spec.source_uniform_start = 0.0;
    PointNavSourceEnv disc_only(spec);
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) EXPECT_TRUE(spec.start.contains(disc_only.reset(rng).pos));
    spec.source_uniform_start = 1.0;
    PointNavSourceEnv uniform(spec);
    int outside = 0;
    for (int i = 0; i < 1000; ++i) outside += !spec.start.contains(uniform.reset(rng).pos);
    EXPECT_GT(outside, 900);
    spec.source_uniform_start = 1.5;
    EXPECT_THROW(spec.validate(), InvalidInput);
}

TEST(SafetyMap, DropsTaskBlockBitExactly) {
    const auto spec = PointNavSpec{};
    PointNavState s;
    s.pos = {0.123456789, -1.5};
    s.vel = {0.3, 0.7};
    s.goal = {1.2, 1.2};
    const auto obs = observe(spec, s, true);
    ASSERT_TRUE(obs.has_task);
    EXPECT_EQ(obs.task.size(), 2u);
    const auto mapped = safety_map(obs);
    EXPECT_FALSE(mapped.has_task);
    EXPECT_TRUE(mapped.task.empty());
    EXPECT_EQ(std::memcmp(mapped.safety.data(), obs.safety.data(), obs.safety.size() * sizeof(double)), 0);
    EXPECT_THROW(safety_map(mapped), ShapeError);
}

TEST(SafetyMap, LiftedGuideIgnoresTaskBlock) {
    const auto spec = PointNavSpec{};
    PointNavTargetEnv env(spec);
    ContinuousAgent guide(spec.safety_dim(), 2, 1.0, SacConfig{});
    Rng rng(8);
    guide.initialize(rng);
    PointNavState a, b;
    a.pos = b.pos = {-0.7, 0.4};
    a.vel = b.vel = {0.1, 0.2};
    a.goal = {1.2, 1.2};
    b.goal = {-1.5, 0.5};
    ASSERT_NE(env.observe(a), env.observe(b));
    const auto ha = guide.policy().head(env.guide_observe(a));
    const auto hb = guide.policy().head(env.guide_observe(b));
    EXPECT_EQ(ha.mean, hb.mean);
    EXPECT_EQ(ha.log_std, hb.log_std);
}

TEST(AuxiliaryReward, EuclideanDisplacement) {
    EXPECT_DOUBLE_EQ(auxiliary_reward(Vec2{0.0, 0.0}, Vec2{3.0, 4.0}), 5.0);
    EXPECT_EQ(auxiliary_reward(Vec2{1.5, -2.0}, Vec2{1.5, -2.0}), 0.0);
}

TEST(AuxiliaryReward, MetricAxioms) {
    Rng rng(9);
    auto point = [&] { return Vec2{4.0 * uniform01(rng) - 2.0, 4.0 * uniform01(rng) - 2.0}; };
    for (int i = 0; i < 100; ++i) {
        const Vec2 a = point(), b = point(), c = point();
        EXPECT_GE(auxiliary_reward(a, b), 0.0);
        EXPECT_EQ(auxiliary_reward(a, b), auxiliary_reward(b, a));
        EXPECT_LE(auxiliary_reward(a, c), auxiliary_reward(a, b) + auxiliary_reward(b, c) + 1e-15);
    }
}

TEST(AuxiliaryReward, CustomFeatureMap) {
    const auto spec = default_grid_spec();
    GridSourceEnv env(spec);
    const GridState s{spec.cell_index({0, 0}), 0}, n{spec.cell_index({3, 3}), 0};
    const double r = auxiliary_reward(s, n, [&](const GridState& x) { return env.position(x); });
    EXPECT_NEAR(r, std::sqrt(18.0), 1e-15);
}

TEST(Layouts, WritersEmitEveryObject) {
    std::ostringstream grid, nav;
    write_grid_layout(grid, default_grid_spec());
    write_point_nav_layout(nav, PointNavSpec{});
    EXPECT_NE(grid.str().find("hazard"), std::string::npos);
    EXPECT_NE(nav.str().find("goal,1.2,1.2,0.3"), std::string::npos);
}

} // namespace
