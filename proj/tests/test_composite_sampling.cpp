#include "sagui/composite_sampling.hpp"

#include <gtest/gtest.h>

#include <regex>
#include <string>

namespace {

using namespace sagui;

char symbol(Behaviour b) { return b == Behaviour::guide ? 'G' : 'S'; }

/// Behaviour trace of one control-switch episode driven by a fixed cost sequence.
std::string switch_trace(BehaviourSelector& sel, const std::vector<double>& costs, Rng& rng) {
    std::string trace(1, symbol(sel.episode_start(rng)));
    for (std::size_t t = 1; t < costs.size(); ++t) trace += symbol(sel.next(costs[t - 1], rng));
    return trace;
}

TEST(LinearDecay, FullGuideProbabilityAlwaysPicksGuide) {
    LinearDecayState s(0.1);
    Rng rng(1);
    for (int e = 0; e < 100; ++e) {
        EXPECT_EQ(s.episode_start(rng), Behaviour::guide);
        for (int t = 0; t < 20; ++t) EXPECT_EQ(s.env_step(rng), Behaviour::guide);
    }
}

TEST(LinearDecay, ThreeIterationsAtPointOne) {
    LinearDecayState s(0.1);
    for (int i = 0; i < 3; ++i) s.iteration_start();
    EXPECT_NEAR(s.p_pi, 0.7, 1e-15);
    EXPECT_NEAR(s.p_wise, 0.7, 1e-15);
}

TEST(LinearDecay, ReachesExactlyZeroAndClamps) {
    const std::size_t n = 37;
    LinearDecayState s(1.0 / n);
    for (std::size_t i = 0; i < n; ++i) s.iteration_start();
    EXPECT_EQ(s.p_pi, 0.0);
    s.iteration_start();
    EXPECT_EQ(s.p_pi, 0.0);
    EXPECT_EQ(s.p_wise, 0.0);
    Rng rng(2);
    for (int e = 0; e < 100; ++e) EXPECT_EQ(s.episode_start(rng), Behaviour::student);
}

TEST(LinearDecay, TrajectoryWiseEpisodesKeepBehaviour) {
    LinearDecayState s(0.5);
    s.iteration_start();
    s.p_wise = 0.0;
    Rng rng(3);
    std::size_t guide_episodes = 0;
    const int episodes = 4000;
    for (int e = 0; e < episodes; ++e) {
        const Behaviour b = s.episode_start(rng);
        EXPECT_FALSE(s.step_wise);
        for (int t = 0; t < 30; ++t) ASSERT_EQ(s.env_step(rng), b);
        guide_episodes += b == Behaviour::guide;
    }
    EXPECT_NEAR(static_cast<double>(guide_episodes) / episodes, 0.5, 0.03);
}

TEST(LinearDecay, StepWiseEpisodesRedraw) {
    LinearDecayState s(0.5);
    s.iteration_start();
    s.p_wise = 1.0;
    Rng rng(4);
    s.episode_start(rng);
    ASSERT_TRUE(s.step_wise);
    std::size_t guide = 0;
    const int steps = 100000;
    for (int t = 0; t < steps; ++t) guide += s.env_step(rng) == Behaviour::guide;
    EXPECT_NEAR(static_cast<double>(guide) / steps, 0.5, 0.01);
}

TEST(LinearDecay, RejectsNonPositiveDecay) {
    EXPECT_THROW(LinearDecayState(0.0), InvalidInput);
    EXPECT_THROW(LinearDecayState(-0.1), InvalidInput);
}

TEST(ControlSwitch, CostAtStepTwoSwitchesFromStepThree) {
    BehaviourSelector sel(SamplingMode::control_switch, 0.01);
    Rng rng(5);
    EXPECT_EQ(switch_trace(sel, {0, 0, 1, 0, 0}, rng), "SSSGG");
}

TEST(ControlSwitch, NoCostStaysWithStudent) {
    BehaviourSelector sel(SamplingMode::control_switch, 0.01);
    Rng rng(6);
    EXPECT_EQ(switch_trace(sel, std::vector<double>(8, 0.0), rng), "SSSSSSSS");
}

TEST(ControlSwitch, CostAtFirstStepAndResetBetweenEpisodes) {
    BehaviourSelector sel(SamplingMode::control_switch, 0.01);
    Rng rng(7);
    EXPECT_EQ(switch_trace(sel, {1, 0, 0, 0}, rng), "SGGG");
    EXPECT_EQ(switch_trace(sel, {0, 0, 0, 0}, rng), "SSSS");
}

TEST(ControlSwitch, GuideProbabilityIsUndefined) {
    EXPECT_TRUE(std::isnan(BehaviourSelector(SamplingMode::control_switch, 0.1).guide_probability()));
}

TEST(ControlSwitch, ThousandRandomEpisodesMatchShape) {
    BehaviourSelector sel(SamplingMode::control_switch, 0.01);
    Rng rng(8);
    const std::regex shape("S*G*");
    for (int e = 0; e < 1000; ++e) {
        const std::size_t len = 1 + static_cast<std::size_t>(uniform01(rng) * 60);
        const double p_cost = uniform01(rng) * 0.2;
        std::vector<double> costs(len);
        for (double& c : costs) c = uniform01(rng) < p_cost ? uniform01(rng) : 0.0;
        const std::string trace = switch_trace(sel, costs, rng);
        ASSERT_TRUE(std::regex_match(trace, shape)) << trace;
        std::size_t first_cost = len;
        for (std::size_t t = 0; t < len; ++t)
            if (costs[t] > 0.0) {
                first_cost = t;
                break;
            }
        const std::size_t switch_at = std::min(first_cost + 1, len);
        EXPECT_EQ(trace.find('G') == std::string::npos ? len : trace.find('G'), switch_at) << trace;
    }
}

TEST(SamplingModes, FixedModes) {
    Rng rng(9);
    BehaviourSelector gui(SamplingMode::guide_only, 0.5), stu(SamplingMode::student_only, 0.5);
    for (int i = 0; i < 10; ++i) {
        gui.iteration_start();
        stu.iteration_start();
    }
    EXPECT_EQ(gui.episode_start(rng), Behaviour::guide);
    EXPECT_EQ(gui.next(1.0, rng), Behaviour::guide);
    EXPECT_EQ(stu.episode_start(rng), Behaviour::student);
    EXPECT_EQ(stu.next(1.0, rng), Behaviour::student);
    EXPECT_EQ(gui.guide_probability(), 1.0);
    EXPECT_EQ(stu.guide_probability(), 0.0);
}

TEST(SamplingModes, NamesRoundTrip) {
    for (auto m : {SamplingMode::linear_decay, SamplingMode::control_switch, SamplingMode::guide_only,
                   SamplingMode::student_only})
        EXPECT_EQ(parse_sampling_mode(to_string(m)), m);
    EXPECT_THROW(parse_sampling_mode("switch"), ConfigError);
}

TEST(DualBuffers, EmpiricalSplit) {
    DualBuffers<int> buffers(100);
    for (int i = 0; i < 50; ++i) {
        buffers.push(0, Behaviour::guide);
        buffers.push(1, Behaviour::student);
    }
    Rng rng(10);
    const auto batch = buffers.sample(100000, rng);
    double student = 0.0;
    for (int x : batch) student += x;
    EXPECT_NEAR(student / batch.size(), 0.75, 0.01);
    EXPECT_EQ(buffers.fallbacks(), 0u);
}

TEST(DualBuffers, StudentProbabilityOne) {
    DualBuffers<int> buffers(10, 1.0);
    buffers.push(0, Behaviour::guide);
    buffers.push(1, Behaviour::student);
    Rng rng(11);
    for (int x : buffers.sample(1000, rng)) EXPECT_EQ(x, 1);
}

TEST(DualBuffers, EmptyGuideBufferFallsBack) {
    DualBuffers<int> buffers(10);
    buffers.push(1, Behaviour::student);
    Rng rng(12);
    const auto batch = buffers.sample(4000, rng);
    for (int x : batch) EXPECT_EQ(x, 1);
    EXPECT_GT(buffers.fallbacks(), 800u);
    EXPECT_LT(buffers.fallbacks(), 1200u);
}

TEST(DualBuffers, RoutingIsLossless) {
    DualBuffers<int> buffers(1000);
    for (int i = 0; i < 300; ++i) buffers.push(i, i % 3 == 0 ? Behaviour::guide : Behaviour::student);
    EXPECT_EQ(buffers.guide().size(), 100u);
    EXPECT_EQ(buffers.student().size(), 200u);
    EXPECT_EQ(buffers.size(), 300u);
    for (std::size_t i = 0; i < buffers.guide().size(); ++i) EXPECT_EQ(buffers.guide()[i] % 3, 0);
    for (std::size_t i = 0; i < buffers.student().size(); ++i) EXPECT_NE(buffers.student()[i] % 3, 0);
}

TEST(DualBuffers, Errors) {
    DualBuffers<int> buffers(10);
    Rng rng(13);
    EXPECT_THROW(buffers.sample(1, rng), EmptyBufferError);
    EXPECT_THROW(DualBuffers<int>(10, 1.5), InvalidInput);
}

} // namespace
