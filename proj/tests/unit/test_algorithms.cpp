#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "qvi/algorithms.hpp"
#include "qvi/analysis.hpp"
#include "qvi/environments.hpp"
#include "qvi/policy.hpp"
#include "qvi/tabular_simulator.hpp"

using namespace qvi;

namespace {

// Ends every episode one step early.
class ShortSimulator : public EpisodicSimulator {
public:
    int horizon() const override { return 3; }
    int num_actions() const override { return 2; }
    std::unique_ptr<EpisodicSimulator> clone() const override { return std::make_unique<ShortSimulator>(); }

protected:
    int do_reset(Rng&) override {
        t_ = 0;
        return 0;
    }
    StepResult do_step(int, Rng&) override { return {0, 0.0, ++t_ == 2}; }

private:
    int t_ = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Algorithms, LearnersNeverSeeTheModel) {
    const std::string root = QVI_SOURCE_DIR;
    for (const char* f : {"/src/algorithms.cpp", "/include/qvi/algorithms.hpp", "/src/oracles.cpp",
                          "/include/qvi/oracles.hpp", "/include/qvi/simulator.hpp"}) {
        const auto text = slurp(root + f);
        ASSERT_FALSE(text.empty()) << f;
        EXPECT_EQ(text.find("qvi/mdp.hpp"), std::string::npos) << f;
        EXPECT_EQ(text.find("qvi/analysis.hpp"), std::string::npos) << f;
        EXPECT_EQ(text.find("TabularMdp"), std::string::npos) << f;
    }
}

TEST(CollectBatch, CountsAndPrefix) {
    TabularSimulator sim(make_random_mdp(4, 3, 3, 0.5, 1));
    LearnedPolicy learned(3, 3);
    learned.freeze(QEstimate(4, 3, std::vector<double>{0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1}));
    SampleLedger ledger;
    const auto batch = collect_batch(sim, learned, 1, 50, 7, ledger);
    EXPECT_EQ(batch.size(), 50);
    EXPECT_EQ(ledger.training_timesteps, 150);
    EXPECT_EQ(ledger.training_episodes, 50);
    for (const auto& ep : batch.episodes) {
        EXPECT_EQ(ep.length(), 3);
        EXPECT_EQ(ep.actions[0], 2);
    }
    SampleLedger again;
    EXPECT_EQ(collect_batch(sim, learned, 1, 50, 7, again), batch);
    EXPECT_THROW(collect_batch(sim, learned, 2, 5, 7, again), std::logic_error);
}

TEST(CollectBatch, RejectsWrongEpisodeLength) {
    ShortSimulator sim;
    LearnedPolicy learned(3, 2);
    SampleLedger ledger;
    EXPECT_THROW(collect_batch(sim, learned, 0, 1, 0, ledger), std::runtime_error);
}

TEST(Sqirl, LedgerIsTmT) {
    const auto mdp = make_random_mdp(5, 2, 4, 0.5, 2);
    TabularSimulator sim(mdp);
    const TabularMeanOracle oracle(5, 2);
    const auto result = sqirl_train(sim, 4, 5, 2, 2, 30, oracle, 0);
    EXPECT_EQ(result.ledger.training_timesteps, 4 * 30 * 4);
    EXPECT_EQ(result.ledger.evaluation_timesteps, 0);
    EXPECT_EQ(sim.steps_served(), 4 * 30 * 4);
}

TEST(Sqirl, FrozenDecidersNeverChange) {
    TabularSimulator sim(make_random_mdp(4, 2, 4, 0.5, 3));
    const TabularMeanOracle oracle(4, 2);
    SqirlLearner learner(sim, 4, oracle, {2, 20, 5});
    std::vector<std::vector<double>> snapshots;
    while (!learner.done()) {
        learner.step();
        snapshots.push_back(learner.policy().decider(learner.iteration() - 1).values());
        for (int t = 0; t < learner.iteration(); ++t) EXPECT_EQ(learner.policy().decider(t).values(), snapshots[t]);
    }
    EXPECT_THROW(learner.step(), std::logic_error);
}

TEST(Sqirl, SameSeedSamePolicy) {
    const auto mdp = make_random_mdp(5, 3, 3, 0.5, 9);
    const TabularMeanOracle oracle(5, 3);
    TabularSimulator a(mdp), b(mdp);
    const auto ra = sqirl_train(a, 3, 5, 3, 2, 40, oracle, 11);
    const auto rb = sqirl_train(b, 3, 5, 3, 2, 40, oracle, 11);
    EXPECT_EQ(ra.policy.to_timed_policy(5).prob(0, 0, 0), rb.policy.to_timed_policy(5).prob(0, 0, 0));
    for (int t = 0; t < 3; ++t) EXPECT_EQ(ra.policy.decider(t).values(), rb.policy.decider(t).values());
}

// With infinite data SQIRL acts greedily on Q^k, so it is optimal exactly when the MDP is k-QVI-solvable.
TEST(Sqirl, ExactOracleIsOptimalWhenSolvable) {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto mdp = make_random_mdp(4, 2, 4, 0.6, seed);
        const double j_star = optimal_return(mdp);
        for (int k = 1; k <= 4; ++k) {
            TabularSimulator sim(mdp);
            const ExactQOracle oracle(q_sequence(mdp, k));
            const auto result = sqirl_train(sim, 4, 4, 2, k, 1, oracle, seed);
            const double j = exact_return(mdp, result.policy.to_timed_policy(4));
            if (is_k_qvi_solvable(mdp, k)) {
                EXPECT_NEAR(j, j_star, 1e-9) << "seed " << seed << " k " << k;
                ++checked;
            }
            EXPECT_LE(j, j_star + 1e-9);
        }
    }
    EXPECT_GT(checked, 40);
}

TEST(Sqirl, TruncatesLookaheadAtHorizon) {
    const auto mdp = make_needle(3, 2);
    TabularSimulator sim(mdp);
    const ExactQOracle oracle(q_sequence(mdp, 3));
    const auto result = sqirl_train(sim, 3, 2, 2, 3, 1, oracle, 0);
    EXPECT_EQ(result.policy.decider(2).depth, 1);
    EXPECT_EQ(result.policy.decider(1).depth, 2);
    EXPECT_NEAR(exact_return(mdp, result.policy.to_timed_policy(2)), 1.0, 1e-12);
}

TEST(Sqirl, RejectsBadConfig) {
    TabularSimulator sim(make_reference_mdp());
    const TabularMeanOracle oracle(3, 2), wrong(4, 2);
    EXPECT_THROW(SqirlLearner(sim, 3, oracle, {3, 1, 0}), std::out_of_range);
    EXPECT_THROW(SqirlLearner(sim, 3, oracle, {1, 0, 0}), std::invalid_argument);
    EXPECT_THROW(SqirlLearner(sim, 3, wrong, {1, 1, 0}), std::invalid_argument);
}

TEST(Gorp, FullLookaheadSolvesDeterministicMdps) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto mdp = make_random_deterministic_mdp(5, 2, 4, 0.5, seed);
        TabularSimulator sim(mdp);
        const auto result = gorp_train(sim, 4, 2, 4, 1, seed);
        EXPECT_FALSE(result.stochastic_warning);
        const auto policy = TimedPolicy::open_loop(result.actions, 4, 5, 2);
        EXPECT_NEAR(exact_return(mdp, policy), optimal_return(mdp), 1e-12) << "seed " << seed;
    }
}

TEST(Gorp, LedgerCountsEverySequence) {
    TabularSimulator sim(make_random_deterministic_mdp(3, 3, 3, 0.5, 1));
    GorpLearner learner(sim, {2, 4, 0});
    std::int64_t expected = 0;
    while (!learner.done()) {
        expected += learner.timesteps_next_iteration();
        learner.step();
    }
    // L = 2, 2, 1: (9 + 9 + 3) sequences * 4 episodes * 3 steps.
    EXPECT_EQ(learner.ledger().training_timesteps, (9 + 9 + 3) * 4 * 3);
    EXPECT_EQ(learner.ledger().training_timesteps, expected);
}

TEST(Gorp, TiesGoToLowestSequence) {
    // All rewards zero: every sequence ties, so action 0 is always chosen.
    const auto base = make_reference_mdp();
    auto rewards = base.rewards();
    for (auto& r : rewards) std::fill(r.begin(), r.end(), 0.0);
    TabularSimulator sim(TabularMdp(2, 3, 2, base.initial_dist(), base.transitions(), rewards));
    EXPECT_EQ(gorp_train(sim, 2, 2, 2, 3, 0).actions, (std::vector<int>{0, 0}));
}

TEST(Gorp, WarnsOnStochasticEnvironments) {
    TabularSimulator sim(sticky_transform(make_random_deterministic_mdp(4, 2, 4, 0.5, 2), 0.5));
    EXPECT_TRUE(gorp_train(sim, 4, 2, 1, 20, 0).stochastic_warning);
}

TEST(Gorp, ShortLookaheadFallsForTrap) {
    // Q^1 prefers a1 at s0 on this variant; k = 1 with many rollouts follows it.
    TabularSimulator sim(make_reference_mdp(0.6, 0.6));
    EXPECT_EQ(gorp_train(sim, 2, 2, 1, 200, 0).actions[0], 1);
    EXPECT_EQ(gorp_train(sim, 2, 2, 2, 1, 0).actions[0], 0);
}

TEST(Evaluation, SeparateLedgerAndReproducible) {
    const auto mdp = make_reference_mdp();
    TabularSimulator sim(mdp);
    SampleLedger ledger;
    const Controller first = [](int, int, Rng&) { return 0; };
    const auto r = evaluate_controller(sim, first, 10, 0, ledger);
    EXPECT_NEAR(r.mean, 0.8, 1e-12);
    EXPECT_EQ(r.stddev, 0.0);
    EXPECT_EQ(ledger.training_timesteps, 0);
    EXPECT_EQ(ledger.evaluation_timesteps, 20);

    const Controller random = [](int, int, Rng& rng) { return rng.uniform_int(2); };
    SampleLedger l1, l2;
    EXPECT_EQ(evaluate_controller(sim, random, 50, 3, l1).mean, evaluate_controller(sim, random, 50, 3, l2).mean);
}
