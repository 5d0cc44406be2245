#include <gtest/gtest.h>

#include <filesystem>

#include "brute_force.hpp"
#include "qvi/environments.hpp"
#include "qvi/mdp.hpp"
#include "qvi/mdp_io.hpp"
#include "qvi/policy.hpp"
#include "qvi/rng.hpp"

using namespace qvi;

namespace {

TabularMdp tiny(std::vector<double> initial, std::vector<double> row, std::vector<double> r0, std::vector<double> r1) {
    // S = 2, A = 2, T = 2; every (s, a) shares `row`.
    std::vector<double> tr;
    for (int i = 0; i < 4; ++i) tr.insert(tr.end(), row.begin(), row.end());
    return TabularMdp(2, 2, 2, std::move(initial), {tr}, {std::move(r0), std::move(r1)});
}

}  // namespace

TEST(Mdp, ShapeMismatchIsStructural) {
    EXPECT_THROW(TabularMdp(2, 2, 2, {1.0}, {std::vector<double>(8, 0.5)}, {std::vector<double>(4), std::vector<double>(4)}),
                 StructuralError);
    EXPECT_THROW(TabularMdp(2, 2, 2, {1.0, 0.0}, {}, {std::vector<double>(4), std::vector<double>(4)}), StructuralError);
    EXPECT_THROW(TabularMdp(1, 2, 1, {1.0, 0.0}, {}, {std::vector<double>(2)}), StructuralError);
}

TEST(Mdp, ValidationNamesEachViolationClass) {
    EXPECT_TRUE(validate_mdp(tiny({0.5, 0.5}, {0.5, 0.5}, {0, 0, 0, 0}, {0, 0, 0, 0})).ok());

    auto bad_initial = validate_mdp(tiny({0.5, 0.4}, {0.5, 0.5}, {0, 0, 0, 0}, {0, 0, 0, 0}));
    ASSERT_EQ(bad_initial.violations.size(), 1u);
    EXPECT_EQ(bad_initial.violations[0].kind, ViolationKind::InitialDistribution);

    auto bad_row = validate_mdp(tiny({1, 0}, {0.7, 0.7}, {0, 0, 0, 0}, {0, 0, 0, 0}));
    ASSERT_FALSE(bad_row.ok());
    EXPECT_EQ(bad_row.violations[0].kind, ViolationKind::TransitionRow);
    EXPECT_EQ(bad_row.violations[0].index, (std::vector<int>{0, 0, 0}));

    auto too_big = validate_mdp(tiny({1, 0}, {0.5, 0.5}, {0.6, 0, 0, 0}, {0.6, 0, 0, 0}));
    ASSERT_EQ(too_big.violations.size(), 1u);
    EXPECT_EQ(too_big.violations[0].kind, ViolationKind::RewardUpperBound);

    auto negative = validate_mdp(tiny({1, 0}, {0.5, 0.5}, {-0.1, 0, 0, 0}, {0, 0, 0, 0}));
    ASSERT_FALSE(negative.ok());
    EXPECT_EQ(negative.violations[0].kind, ViolationKind::RewardLowerBound);
}

TEST(Mdp, BoundsAreAlmostSureNotExpected) {
    // Expected return is 0.55 but the path through s0 twice pays 1.1.
    auto report = validate_mdp(tiny({1, 0}, {0.5, 0.5}, {0.6, 0, 0, 0}, {0.5, 0, 0, 0}));
    EXPECT_FALSE(report.ok());
}

TEST(Mdp, ReferenceValuesMatchEnumeration) {
    const auto mdp = make_reference_mdp();
    const auto q1 = exact_policy_q(mdp, TimedPolicy::uniform(2, 2));
    EXPECT_NEAR(q1(0, 0, 0), 0.5, 1e-12);
    EXPECT_NEAR(q1(0, 0, 1), 0.25, 1e-12);
    EXPECT_NEAR(exact_return(mdp, TimedPolicy::uniform(2, 2)), 0.375, 1e-12);

    const auto ext = return_extremes(mdp);
    EXPECT_NEAR(ext.best_policy, 0.8, 1e-12);
    EXPECT_NEAR(ext.worst_policy, 0.1, 1e-12);
    EXPECT_NEAR(ext.best_policy, bf::optimal_return(mdp), 1e-12);
    EXPECT_NEAR(ext.worst_policy, bf::worst_return(mdp), 1e-12);
    EXPECT_NEAR(ext.almost_sure_max, 0.8, 1e-12);
    EXPECT_NEAR(ext.almost_sure_min, 0.1, 1e-12);
}

TEST(Mdp, PolicyReturnMatchesEnumerationOnRandomMdps) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto mdp = make_random_mdp(3, 2, 3, 0.6, seed);
        auto policy = TimedPolicy::uniform(3, 2);
        policy.set_deterministic(1, {1, 0, 1});
        const double lib = exact_return(mdp, policy);
        const double brute = bf::policy_return(mdp, [](int t, int s) { return t == 1 ? (s == 1 ? 0 : 1) : -1; });
        EXPECT_NEAR(lib, brute, 1e-12) << "seed " << seed;
    }
}

TEST(Mdp, SampledReturnsAverageToExactReturn) {
    const auto mdp = make_random_mdp(4, 2, 3, 0.5, 11);
    const auto policy = TimedPolicy::uniform(3, 2);
    Rng rng(1);
    double total = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const auto ep = sample_episode(mdp, policy, rng);
        ASSERT_EQ(ep.length(), 3);
        total += ep.total_reward();
    }
    EXPECT_NEAR(total / n, exact_return(mdp, policy), 0.01);
}

TEST(MdpIo, RoundTripPreservesEverything) {
    const auto mdp = sticky_transform(make_random_mdp(3, 2, 3, 0.5, 4), 0.25);
    const auto doc = mdp_to_json(mdp);
    const auto back = mdp_from_json(doc);
    EXPECT_EQ(back.initial_dist(), mdp.initial_dist());
    EXPECT_EQ(back.transitions(), mdp.transitions());
    EXPECT_EQ(back.rewards(), mdp.rewards());
    EXPECT_EQ(back.metadata().name, mdp.metadata().name);
    EXPECT_EQ(mdp_to_json(back), doc);

    const auto path = std::filesystem::temp_directory_path() / "qvi_roundtrip.json";
    save_mdp(mdp, path);
    EXPECT_EQ(mdp_to_json(load_mdp(path)), doc);
    std::filesystem::remove(path);
}

TEST(MdpIo, RejectsMalformedDocuments) {
    auto doc = mdp_to_json(make_reference_mdp());
    auto missing = doc;
    missing.erase("rewards");
    EXPECT_THROW(mdp_from_json(missing), StructuralError);
    auto ragged = doc;
    ragged["rewards"][0].erase(0);
    EXPECT_THROW(mdp_from_json(ragged), StructuralError);
    auto huge = doc;
    huge["num_states"] = 100000;
    EXPECT_THROW(mdp_from_json(huge), StructuralError);
}
