#include "gradient_check.hpp"

#include "sagui/envs.hpp"

#include <gtest/gtest.h>

using namespace sagui;
using namespace sagui::testing;

TEST(GradientAudit, ContinuousAllLosses) {
    for (int trial = 0; trial < 5; ++trial) {
        Rng rng(100 + trial);
        SacConfig cfg;
        cfg.hidden = {6, 5};
        cfg.threshold = 0.7;
        cfg.init_alpha = 0.3;
        cfg.init_beta = 0.8;
        cfg.discount = 0.9;
        ContinuousAgent agent(4, 2, 1.5, cfg);
        agent.initialize(rng);
        // Larger output weights so the policy is far from its near-uniform start.
        for (auto& p : agent.policy().net().params()) p *= 8.0;
        for (auto& p : agent.reward_target().params()) p += 0.1 * standard_normal(rng);
        auto batch = random_batch(agent, 6, rng, 4);
        auto noise = agent.draw_noise(batch.size(), rng);
        const auto r = audit_all_losses(agent, batch, noise);
        EXPECT_GT(r.checked, 100u);
        EXPECT_LE(r.worst_relative, 1e-4) << "trial " << trial;
    }
}

TEST(GradientAudit, DiscreteAllLosses) {
    for (int trial = 0; trial < 5; ++trial) {
        Rng rng(200 + trial);
        SacConfig cfg;
        cfg.hidden = {7};
        cfg.threshold = 1.3;
        cfg.init_alpha = 0.2;
        cfg.init_beta = 0.5;
        DiscreteAgent agent(5, 4, cfg);
        agent.initialize(rng);
        for (auto& p : agent.policy().net().params()) p *= 8.0;
        auto batch = random_batch(agent, 6, rng, 5);
        const auto r = audit_all_losses(agent, batch, agent.draw_noise(batch.size(), rng));
        EXPECT_GT(r.checked, 50u);
        EXPECT_LE(r.worst_relative, 1e-4) << "trial " << trial;
    }
}

namespace {

/// Zeroes a network and sets its output biases, making it constant in the input.
void make_constant(DenseNet& net, const std::vector<double>& outputs) {
    auto& p = net.params();
    std::fill(p.begin(), p.end(), 0.0);
    ASSERT_EQ(outputs.size(), net.output_size());
    std::copy(outputs.begin(), outputs.end(), p.end() - static_cast<std::ptrdiff_t>(outputs.size()));
}

ContinuousAgent small_continuous(SacConfig cfg, std::uint64_t seed) {
    ContinuousAgent agent(3, 2, 1.0, std::move(cfg));
    Rng rng(seed);
    agent.initialize(rng);
    return agent;
}

std::vector<UpdateSample<std::vector<double>>> continuous_batch(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    ContinuousAgent shape(3, 2, 1.0, SacConfig{});
    return random_batch(shape, n, rng, 3);
}

} // namespace

TEST(SacLosses, BetaRisesWhenCostCriticAboveThreshold) {
    for (double q : {10.0, 1.0}) {
        SacConfig cfg;
        cfg.hidden = {5};
        cfg.threshold = 5.0;
        cfg.optimizer = OptimizerKind::sgd;
        cfg.lr_beta = 0.01;
        auto agent = small_continuous(cfg, 1);
        make_constant(agent.cost_critic(), {softplus_inverse(q)});
        const double before = agent.beta();
        Rng rng(2);
        const auto d = agent.train_step(continuous_batch(16, 3), rng);
        EXPECT_NEAR(d.mean_cost_q, q, 1e-12);
        if (q > cfg.threshold)
            EXPECT_GT(agent.beta(), before);
        else
            EXPECT_LT(agent.beta(), before);
    }
}

TEST(SacLosses, AlphaGradientVanishesAtTargetEntropy) {
    SacConfig cfg;
    cfg.hidden = {4};
    auto agent = small_continuous(cfg, 5);
    auto batch = continuous_batch(12, 6);
    for (auto& x : batch) x.weight = 1.0;
    Rng rng(7);
    const auto noise = agent.draw_noise(batch.size(), rng);
    const double entropy = -agent.compute_gradients(batch, noise).mean_log_prob;
    cfg.target_entropy = entropy;
    auto matched = small_continuous(cfg, 5);
    EXPECT_LE(std::abs(matched.compute_gradients(batch, noise).alpha), 1e-12);
    cfg.target_entropy = entropy + 1.0;
    EXPECT_LT(small_continuous(cfg, 5).compute_gradients(batch, noise).alpha, 0.0);
}

TEST(SacLosses, PureEntropyObjectiveRaisesLogStd) {
    SacConfig cfg;
    cfg.hidden = {};
    cfg.init_beta = 1e-12;
    auto agent = small_continuous(cfg, 9);
    make_constant(agent.reward_critic(), {0.0});
    make_constant(agent.cost_critic(), {0.0});
    auto& p = agent.policy().net().params();
    std::fill(p.begin(), p.end(), 0.0);
    // Linear head on 3 inputs: 4 x 3 weights, then biases [mean0, mean1, logstd0, logstd1].
    p[14] = p[15] = -1.0;
    const auto batch = continuous_batch(64, 10);
    Rng rng(11);
    const auto g = agent.compute_gradients(batch, agent.draw_noise(batch.size(), rng));
    EXPECT_LT(g.policy[14], 0.0);
    EXPECT_LT(g.policy[15], 0.0);
}

TEST(SacLosses, OneStateTwoActionsPolicyMovesTowardBetterAction) {
    SacConfig cfg;
    cfg.hidden = {};
    cfg.optimizer = OptimizerKind::sgd;
    cfg.lr_policy = 0.1;
    cfg.init_alpha = 0.01;
    cfg.init_beta = 1.0;
    DiscreteAgent agent(1, 2, cfg);
    Rng rng(1);
    agent.initialize(rng);
    // Action 0 pays 1.0 but costs 0.2, action 1 pays 0.3 at no cost: action 0 wins by 0.5.
    make_constant(agent.reward_critic(), {1.0, 0.3});
    make_constant(agent.cost_critic(), {softplus_inverse(0.2), softplus_inverse(1e-9)});
    std::vector<UpdateSample<std::size_t>> batch(4);
    for (auto& x : batch) x.observation = x.next_observation = {1.0};
    const double before = agent.policy().probs(std::vector<double>{1.0})[0];
    agent.train_step(batch, rng);
    EXPECT_GT(agent.policy().probs(std::vector<double>{1.0})[0], before);
}

TEST(SacLosses, ZeroDiscountRegressesOntoImmediateSignals) {
    SacConfig cfg;
    cfg.hidden = {4};
    cfg.discount = 0.0;
    auto agent = small_continuous(cfg, 13);
    const auto batch = continuous_batch(10, 14);
    Rng rng(15);
    const auto losses = agent.losses(batch, agent.draw_noise(batch.size(), rng));
    double cost_loss = 0.0, reward_loss = 0.0;
    for (const auto& x : batch) {
        const double ec = agent.cost_value(x.observation, x.action) - x.cost;
        const double er = agent.reward_value(x.observation, x.action) - x.reward;
        cost_loss += x.weight * 0.5 * ec * ec / batch.size();
        reward_loss += x.weight * 0.5 * er * er / batch.size();
    }
    EXPECT_NEAR(losses.cost_critic, cost_loss, 1e-12);
    EXPECT_NEAR(losses.reward_critic, reward_loss, 1e-12);
}

TEST(SacLosses, CriticsConvergeToExactValuesOnTabularChain) {
    // Deterministic 4-state ring, two actions, frozen near-uniform policy, one-hot features.
    Cmdp m(4, 2, 0.5, 1.0);
    for (std::size_t s = 0; s < 4; ++s) {
        m.p(s, 0, (s + 1) % 4) = 1.0;
        m.p(s, 1, s) = 1.0;
        m.r(s, 0) = 0.25 * static_cast<double>(s);
        m.c(s, 0) = 0.2;
        m.c(s, 1) = s == 2 ? 1.0 : 0.0;
    }
    m.initial[0] = 1.0;
    SacConfig cfg;
    cfg.hidden = {};
    cfg.discount = m.discount;
    cfg.lr_policy = 0.0;
    cfg.lr_beta = 0.0;
    cfg.optimizer = OptimizerKind::sgd;
    cfg.lr_reward = cfg.lr_cost = 0.5;
    cfg.polyak = 0.05;
    cfg.fix_alpha = true;
    cfg.init_alpha = 1e-12;
    DiscreteAgent agent(4, 2, cfg);
    Rng rng(3);
    agent.initialize(rng);
    for (int step = 0; step < 20000; ++step) {
        std::vector<UpdateSample<std::size_t>> batch(8);
        for (auto& x : batch) {
            const std::size_t s = uniform_index(rng, 4), a = uniform_index(rng, 2);
            const std::size_t n = sample_next_state(m, s, a, rng);
            x.observation = one_hot(s, 4);
            x.next_observation = one_hot(n, 4);
            x.action = a;
            x.reward = m.r(s, a);
            x.cost = m.c(s, a);
        }
        agent.train_step(batch, rng);
    }
    const auto pi = policy_table(agent, 4);
    const auto qc = exact_policy_evaluation(m, pi, Signal::cost);
    const auto qr = exact_policy_evaluation(m, pi, Signal::reward);
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
            EXPECT_NEAR(agent.cost_value(one_hot(s, 4), a), qc(s, a), 1e-3) << s << ' ' << a;
            EXPECT_NEAR(agent.reward_value(one_hot(s, 4), a), qr(s, a), 1e-3) << s << ' ' << a;
        }
}

TEST(SacTrainStep, ImportanceWeightsScaleGradientsLinearly) {
    SacConfig cfg;
    cfg.hidden = {5};
    auto agent = small_continuous(cfg, 17);
    auto batch = continuous_batch(8, 18);
    Rng rng(19);
    const auto noise = agent.draw_noise(batch.size(), rng);
    for (auto& x : batch) x.weight = 1.0;
    const auto ones = agent.compute_gradients(batch, noise);
    auto doubled = batch;
    for (auto& x : doubled) x.weight = 2.0;
    const auto twice = agent.compute_gradients(doubled, noise);
    for (std::size_t i = 0; i < ones.policy.size(); ++i) EXPECT_DOUBLE_EQ(twice.policy[i], 2.0 * ones.policy[i]);
    for (std::size_t i = 0; i < ones.cost_critic.size(); ++i)
        EXPECT_DOUBLE_EQ(twice.cost_critic[i], 2.0 * ones.cost_critic[i]);
    for (std::size_t i = 0; i < ones.reward_critic.size(); ++i)
        EXPECT_DOUBLE_EQ(twice.reward_critic[i], 2.0 * ones.reward_critic[i]);
    EXPECT_DOUBLE_EQ(twice.alpha, 2.0 * ones.alpha);
    EXPECT_DOUBLE_EQ(twice.beta, 2.0 * ones.beta);
}

TEST(SacTrainStep, ZeroWeightsLeaveOnlineParametersUnchanged) {
    SacConfig cfg;
    cfg.hidden = {5};
    auto agent = small_continuous(cfg, 21);
    auto batch = continuous_batch(8, 22);
    for (auto& x : batch) x.weight = 0.0;
    const auto before = agent;
    Rng rng(23);
    agent.train_step(batch, rng);
    EXPECT_EQ(agent.policy().net().params(), before.policy().net().params());
    EXPECT_EQ(agent.reward_critic().params(), before.reward_critic().params());
    EXPECT_EQ(agent.cost_critic().params(), before.cost_critic().params());
    EXPECT_EQ(agent.alpha(), before.alpha());
    EXPECT_EQ(agent.beta(), before.beta());
}

TEST(SacTrainStep, FixedAlphaStaysConstant) {
    SacConfig cfg;
    cfg.hidden = {5};
    cfg.fix_alpha = true;
    cfg.init_alpha = 0.37;
    auto agent = small_continuous(cfg, 25);
    Rng rng(26);
    for (int i = 0; i < 20; ++i) {
        const auto d = agent.train_step(continuous_batch(8, 100 + i), rng);
        EXPECT_DOUBLE_EQ(d.alpha, agent.alpha());
    }
    EXPECT_NEAR(agent.alpha(), 0.37, 1e-15);
}

TEST(SacTrainStep, DeterministicGivenStreams) {
    SacConfig cfg;
    cfg.hidden = {6};
    auto a = small_continuous(cfg, 31);
    auto b = small_continuous(cfg, 31);
    Rng ra(32), rb(32);
    for (int i = 0; i < 10; ++i) {
        const auto batch = continuous_batch(8, 200 + i);
        a.train_step(batch, ra);
        b.train_step(batch, rb);
    }
    EXPECT_EQ(a.policy().net().params(), b.policy().net().params());
    EXPECT_EQ(a.cost_target().params(), b.cost_target().params());
    EXPECT_EQ(a.beta(), b.beta());
}

TEST(SacTrainStep, TargetsTrackOnlineByPolyak) {
    SacConfig cfg;
    cfg.hidden = {4};
    cfg.polyak = 0.005;
    auto agent = small_continuous(cfg, 41);
    const auto old_target = agent.cost_target().params();
    Rng rng(42);
    agent.train_step(continuous_batch(8, 43), rng);
    const auto& online = agent.cost_critic().params();
    const auto& target = agent.cost_target().params();
    for (std::size_t i = 0; i < target.size(); ++i)
        EXPECT_NEAR(target[i], 0.995 * old_target[i] + 0.005 * online[i], 1e-15);
}

TEST(SacTrainStep, NonFiniteLossRaisesDivergence) {
    auto agent = small_continuous(SacConfig{}, 51);
    auto batch = continuous_batch(4, 52);
    batch[1].reward = std::numeric_limits<double>::quiet_NaN();
    const auto before = agent.policy().net().params();
    Rng rng(53);
    EXPECT_THROW(agent.train_step(batch, rng), DivergenceError);
    EXPECT_EQ(agent.policy().net().params(), before);
}
