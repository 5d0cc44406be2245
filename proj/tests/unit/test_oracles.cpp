#include <gtest/gtest.h>

#include "qvi/analysis.hpp"
#include "qvi/environments.hpp"
#include "qvi/oracles.hpp"

using namespace qvi;

namespace {

RegressionDataset dataset(std::vector<RegressionSample> samples) {
    RegressionDataset d;
    d.samples = std::move(samples);
    return d;
}

}  // namespace

TEST(TabularOracle, CellMeansAndUnseenDefault) {
    const auto q = tabular_mean_regress(dataset({{0, 0, 0.2}, {0, 0, 0.4}, {1, 1, 0.9}}), 2, 2);
    EXPECT_NEAR(q.value(0, 0), 0.3, 1e-15);
    EXPECT_EQ(q.value(0, 1), 0.0);
    EXPECT_EQ(q.value(1, 0), 0.0);
    EXPECT_NEAR(q.value(1, 1), 0.9, 1e-15);
    EXPECT_FALSE(q.empty_data);
    EXPECT_TRUE(tabular_mean_regress(dataset({}), 2, 2).empty_data);
    EXPECT_EQ(tabular_mean_regress(dataset({}), 2, 2, 0.5).value(1, 1), 0.5);
}

TEST(TabularOracle, OutputsClipped) {
    const auto q = tabular_mean_regress(dataset({{0, 0, 1.5}, {0, 1, -0.5}}), 1, 2);
    EXPECT_EQ(q.value(0, 0), 1.0);
    EXPECT_EQ(q.value(0, 1), 0.0);
}

TEST(LinearOracle, SolvesSmallLeastSquaresExactly) {
    // phi(s, 0) = (1, s); targets on a line y = 0.3 s.
    std::vector<double> table;
    for (int s = 0; s < 3; ++s) table.insert(table.end(), {1.0, double(s), 1.0, 0.0});
    const FeatureMap phi(3, 2, 2, table);
    const auto q = linear_lsq_regress(dataset({{0, 0, 0.0}, {1, 0, 0.3}, {2, 0, 0.6}}), phi, 0.0);
    ASSERT_EQ(q.weights.size(), 2u);
    EXPECT_NEAR(q.weights[0], 0.0, 1e-12);
    EXPECT_NEAR(q.weights[1], 0.3, 1e-12);
    EXPECT_NEAR(q.value(2, 0), 0.6, 1e-12);
    EXPECT_FALSE(q.used_pseudo_inverse);
}

TEST(LinearOracle, RidgeShrinksWeights) {
    std::vector<double> table;
    for (int s = 0; s < 3; ++s) table.insert(table.end(), {1.0, double(s), 1.0, 0.0});
    const FeatureMap phi(3, 2, 2, table);
    const auto data = dataset({{0, 0, 0.0}, {1, 0, 0.3}, {2, 0, 0.6}});
    const auto free = linear_lsq_regress(data, phi, 0.0);
    const auto ridge = linear_lsq_regress(data, phi, 1.0);
    EXPECT_LT(ridge.weights[1], free.weights[1]);
}

TEST(LinearOracle, OneHotMatchesTabular) {
    std::vector<RegressionSample> samples;
    for (int i = 0; i < 60; ++i) samples.push_back({i % 3, (i / 3) % 2, 0.01 * (i % 17)});
    const auto data = dataset(samples);
    const auto lin = linear_lsq_regress(data, FeatureMap::one_hot(3, 2), 0.0);
    const auto tab = tabular_mean_regress(data, 3, 2);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) EXPECT_NEAR(lin.value(s, a), tab.value(s, a), 1e-10);
}

TEST(LinearOracle, RankDeficientFallsBackToMinimumNorm) {
    // Only (0, 0) observed: one-hot normal equations are singular without ridge.
    const auto q = linear_lsq_regress(dataset({{0, 0, 0.4}, {0, 0, 0.6}}), FeatureMap::one_hot(2, 2), 0.0);
    EXPECT_TRUE(q.used_pseudo_inverse);
    EXPECT_NEAR(q.value(0, 0), 0.5, 1e-12);
    EXPECT_NEAR(q.value(1, 1), 0.0, 1e-12);
}

TEST(LinearOracle, PredictionsClipped) {
    std::vector<double> table{1.0, 0.0, 2.0, 0.0};
    const FeatureMap phi(1, 2, 2, table);
    const auto q = linear_lsq_regress(dataset({{0, 0, 0.9}}), phi, 0.0);
    EXPECT_LE(q.value(0, 1), 1.0);
}

TEST(FeatureMap, JsonRoundTripAndValidation) {
    const auto phi = FeatureMap::state_and_action(3, 2);
    EXPECT_EQ(phi.dim(), 5);
    const auto back = FeatureMap::from_json(phi.to_json());
    EXPECT_EQ(back.to_json(), phi.to_json());
    auto bad = phi.to_json();
    bad["dim"] = 4;
    EXPECT_ANY_THROW(FeatureMap::from_json(bad));
}

TEST(Targets, MonteCarloIsRewardToGo) {
    EpisodeBatch batch;
    batch.episodes.push_back({{0, 1, 0}, {1, 0, 1}, {0.1, 0.2, 0.3}});
    const auto d = monte_carlo_targets(batch, 1);
    ASSERT_EQ(d.size(), 1);
    EXPECT_EQ(d.samples[0].state, 1);
    EXPECT_EQ(d.samples[0].action, 0);
    EXPECT_NEAR(d.samples[0].target, 0.5, 1e-15);
    EXPECT_EQ(d.depth, 1);
}

TEST(Targets, FqiBootstrapsAndClips) {
    EpisodeBatch batch;
    batch.episodes.push_back({{0, 1}, {0, 1}, {0.9, 0.0}});
    batch.episodes.push_back({{1, 0}, {1, 0}, {0.1, 0.0}});
    QEstimate next(2, 2, {0.0, 0.5, 0.9, 0.3});
    next.depth = 1;
    const auto d = fqi_targets(batch, 0, next);
    EXPECT_EQ(d.depth, 2);
    EXPECT_EQ(d.samples[0].target, 1.0);  // 0.9 + 0.9 clipped
    EXPECT_NEAR(d.samples[1].target, 0.6, 1e-15);
    EXPECT_THROW(fqi_targets(batch, 1, next), std::invalid_argument);
}

TEST(ExactOracle, ReturnsRequestedDepth) {
    const auto mdp = make_reference_mdp();
    const ExactQOracle oracle(q_sequence(mdp, 2));
    RegressionDataset d;
    d.timestep = 0;
    d.depth = 2;
    const auto q = oracle.fit(d);
    EXPECT_NEAR(q.value(0, 0), 0.8, 1e-12);
    EXPECT_NEAR(q.value(0, 1), 0.4, 1e-12);
}
