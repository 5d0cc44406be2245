#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <numeric>

#include "qvi/environments.hpp"
#include "qvi/harness.hpp"
#include "qvi/mdp_io.hpp"
#include "qvi/results_io.hpp"

using namespace qvi;
using nlohmann::json;

namespace {

ExperimentSpec spec_for(json generator, Algo algo, int k, int m, int seeds = 5) {
    ExperimentSpec spec;
    spec.env.generator = std::move(generator);
    spec.algo.algo = algo;
    spec.algo.k = k;
    spec.algo.m = m;
    spec.seeds.resize(seeds);
    std::iota(spec.seeds.begin(), spec.seeds.end(), 0);
    return spec;
}

const json kOneSolvable{{"kind", "reference"}, {"b0", 0.1}, {"b1", 0.2}};
const json kNeedle{{"kind", "needle"}, {"horizon", 3}};

int count_solved(const std::vector<RunRecord>& records) {
    int n = 0;
    for (const auto& r : records) n += r.solved ? 1 : 0;
    return n;
}

}  // namespace

TEST(Harness, OneSolvableReferenceSolvesAfterFirstIteration) {
    auto spec = spec_for(kOneSolvable, Algo::Sqirl, 1, 200, 20);
    spec.budget = 100000;
    const auto records = run_experiment(spec);
    ASSERT_EQ(records.size(), 20u);
    EXPECT_GE(count_solved(records), 18);
    for (const auto& r : records) {
        if (r.solved) EXPECT_LE(*r.sample_complexity, 800);
        EXPECT_EQ(r.training_timesteps, 2 * 200 * 2);
        EXPECT_EQ(r.evaluation_timesteps, static_cast<std::int64_t>(r.evaluations.size()) * 100 * 2);
    }
}

TEST(Harness, NeedleResistsShortLookahead) {
    auto spec = spec_for(kNeedle, Algo::Sqirl, 1, 100, 20);
    spec.budget = 10000;
    EXPECT_LE(count_solved(run_experiment(spec)), 2);
}

TEST(Harness, BudgetBelowOneIteration) {
    auto spec = spec_for(kOneSolvable, Algo::Sqirl, 1, 200, 2);
    spec.budget = 100;
    for (const auto& r : run_experiment(spec)) {
        EXPECT_FALSE(r.solved);
        EXPECT_TRUE(r.budget_exhausted);
        EXPECT_EQ(r.evaluations.size(), 1u);
        EXPECT_EQ(r.training_timesteps, 0);
    }
}

TEST(Harness, EvaluationTimelineInvariants) {
    auto spec = spec_for(json{{"kind", "random"}, {"num_states", 6}, {"num_actions", 2}, {"horizon", 4}, {"seed", 3}},
                         Algo::Sqirl, 2, 50, 4);
    spec.eval.interval = 1000;
    for (const auto& r : run_experiment(spec)) {
        EXPECT_EQ(r.evaluations.front().timesteps, 0);
        for (std::size_t i = 1; i < r.evaluations.size(); ++i)
            EXPECT_GT(r.evaluations[i].timesteps, r.evaluations[i - 1].timesteps);
        EXPECT_EQ(r.training_timesteps, 4 * 50 * 4);
        if (r.solved) {
            for (const auto& e : r.evaluations) {
                if (!e.solved) continue;
                EXPECT_EQ(*r.sample_complexity, e.timesteps);
                break;
            }
        } else {
            EXPECT_FALSE(r.sample_complexity);
        }
    }
}

TEST(Harness, SeedsAreIndependentOfWorkerCount) {
    auto spec = spec_for(kNeedle, Algo::Gorp, 2, 3, 6);
    spec.workers = 1;
    auto serial = run_experiment(spec);
    spec.workers = 4;
    auto parallel = run_experiment(spec);
    for (auto* v : {&serial, &parallel})
        for (auto& r : *v) r.wall_clock_seconds = 0.0;
    for (auto& r : serial) r.spec["workers"] = 0;
    for (auto& r : parallel) r.spec["workers"] = 0;
    EXPECT_EQ(serial, parallel);
}

TEST(Harness, RunRecordsRoundTripExactly) {
    auto spec = spec_for(json{{"kind", "random"}, {"num_states", 4}, {"num_actions", 3}, {"horizon", 3}, {"seed", 1}},
                         Algo::Sqirl, 1, 20, 3);
    spec.algo.oracle = {"linear", "state-action", 1e-3};
    for (const auto& r : run_experiment(spec)) {
        const auto text = to_json(r).dump();
        EXPECT_EQ(run_record_from_json(json::parse(text)), r);
    }
    EXPECT_EQ(spec_from_json(to_json(spec)), spec);
}

TEST(Harness, GorpRunsRecordStochasticity) {
    auto spec = spec_for(json{{"kind", "random-deterministic"}, {"num_states", 4}, {"num_actions", 2}, {"horizon", 3},
                              {"seed", 5}, {"sticky", 0.25}},
                         Algo::Gorp, 1, 10, 1);
    EXPECT_TRUE(run_experiment(spec)[0].stochastic_warning);
}

TEST(Harness, ValidationErrors) {
    auto spec = spec_for(kNeedle, Algo::Sqirl, 1, 1);
    spec.budget = 0;
    EXPECT_THROW(run_experiment(spec), ValidationError);
    spec = spec_for(kNeedle, Algo::Sqirl, 4, 1);
    EXPECT_THROW(run_experiment(spec), ValidationError);
    spec = spec_for(json{{"kind", "nope"}}, Algo::Sqirl, 1, 1);
    EXPECT_THROW(run_experiment(spec), ValidationError);
    spec = spec_for(kNeedle, Algo::Sqirl, 1, 1);
    spec.eval.interval = 500;
    spec.budget = 100;
    EXPECT_THROW(run_experiment(spec), ValidationError);
    spec = spec_for(kNeedle, Algo::Sqirl, 1, 1);
    spec.seeds.clear();
    EXPECT_THROW(run_experiment(spec), ValidationError);
}

TEST(Harness, InvalidMdpFileIsRejected) {
    const auto base = make_reference_mdp();
    auto doc = mdp_to_json(base);
    doc["initial_dist"] = {0.5, 0.0, 0.0};
    const auto path = std::filesystem::temp_directory_path() / "qvi_bad_mdp.json";
    std::ofstream(path) << doc.dump();
    ExperimentSpec spec;
    spec.env.path = path.string();
    EXPECT_THROW(run_experiment(spec), ValidationError);
    std::filesystem::remove(path);
}

TEST(Tune, SuccessAtLowerBoundTakesOneProbe) {
    auto spec = spec_for(kOneSolvable, Algo::Sqirl, 1, 1);
    spec.eval.rule = SolveRule::ExactReturn;
    const auto tune = tune_m(spec, 1, 200, 512, 0.6);
    ASSERT_TRUE(tune.m_star);
    EXPECT_EQ(*tune.m_star, 200);
    EXPECT_EQ(tune.probes.size(), 1u);
}

TEST(Tune, ProbeCountIsLogarithmic) {
    auto spec = spec_for(json{{"kind", "reference"}}, Algo::Sqirl, 2, 1);
    spec.eval.rule = SolveRule::ExactReturn;
    const auto tune = tune_m(spec, 2, 1, 512, 0.6);
    EXPECT_LE(tune.probes.size(), 10u);
    ASSERT_TRUE(tune.m_star);
    for (const auto& p : tune.probes)
        if (p.m == *tune.m_star) EXPECT_TRUE(p.success);
}

TEST(Tune, NeedleWithShortLookaheadFails) {
    auto spec = spec_for(kNeedle, Algo::Sqirl, 1, 1);
    spec.eval.rule = SolveRule::ExactReturn;
    const auto tune = tune_m(spec, 1, 1, 64, 0.6);
    EXPECT_FALSE(tune.m_star);
    EXPECT_FALSE(tune.note.empty());
    EXPECT_EQ(tune.probes.back().m, 64);
    EXPECT_THROW(tune_m(spec, 1, 0, 64, 0.6), ValidationError);
    EXPECT_THROW(tune_m(spec, 1, 8, 4, 0.6), ValidationError);
}

TEST(Sweep, NeedleOnlyFullLookaheadSucceeds) {
    auto spec = spec_for(kNeedle, Algo::Sqirl, 1, 1);
    spec.eval.rule = SolveRule::ExactReturn;
    spec.budget = 10000;
    const auto result = sweep(spec, {1, 2, 3, 4}, 1, 64, 0.6);
    ASSERT_EQ(result.tunes.size(), 4u);
    EXPECT_FALSE(result.tunes[0].m_star);
    EXPECT_FALSE(result.tunes[1].m_star);
    EXPECT_TRUE(result.tunes[2].m_star);
    EXPECT_TRUE(result.tunes[3].skipped);
    EXPECT_EQ(result.summary.best_k, 3);
    EXPECT_FALSE(result.summary.total_failure);
}

TEST(Sweep, OneSolvablePrefersShortLookahead) {
    auto spec = spec_for(kOneSolvable, Algo::Sqirl, 1, 1);
    spec.eval.rule = SolveRule::ExactReturn;
    const auto result = sweep(spec, {1, 2}, 1, 512, 0.6);
    EXPECT_EQ(result.summary.best_k, 1);
}

TEST(Sweep, EmptyKsAndTotalFailure) {
    auto spec = spec_for(kNeedle, Algo::Sqirl, 1, 1);
    EXPECT_THROW(sweep(spec, {}, 1, 8, 0.6), ValidationError);
    spec.eval.rule = SolveRule::ExactReturn;
    const auto result = sweep(spec, {1}, 1, 8, 0.6);
    EXPECT_TRUE(result.summary.total_failure);
    EXPECT_FALSE(result.summary.best_k);
}

TEST(Sweep, ReproducibleDigestAndRoundTrip) {
    auto spec = spec_for(json{{"kind", "reference"}}, Algo::Sqirl, 1, 1, 3);
    const auto a = sweep(spec, {1, 2}, 1, 64, 0.6);
    const auto b = sweep(spec, {1, 2}, 1, 64, 0.6);
    EXPECT_EQ(results_digest(to_json(a)), results_digest(to_json(b)));
    auto changed = to_json(a);
    changed["tunes"][0]["probes"][0]["records"][0]["wall_clock_seconds"] = 123.0;
    EXPECT_EQ(results_digest(changed), results_digest(to_json(a)));
    changed["tunes"][0]["k"] = 9;
    EXPECT_NE(results_digest(changed), results_digest(to_json(a)));
    EXPECT_EQ(sweep_result_from_json(json::parse(to_json(a).dump())), a);
}

TEST(ResultsIo, CsvColumnsInDocumentedOrder) {
    auto spec = spec_for(kOneSolvable, Algo::Sqirl, 1, 50, 2);
    const auto records = run_experiment(spec);
    std::ostringstream runs, curves;
    write_runs_csv(records, runs);
    write_curves_csv(records, curves);
    std::string header;
    std::istringstream(runs.str()) >> header;
    EXPECT_EQ(header, "env,algo,k,m,seed,solved,sample_complexity,final_return,optimal_return,training_timesteps,"
                      "num_evaluations,suspicious,budget_exhausted");
    int lines = 0;
    for (char c : runs.str()) lines += c == '\n';
    EXPECT_EQ(lines, 3);
    std::istringstream(curves.str()) >> header;
    EXPECT_EQ(header, "env,algo,k,m,seed,timesteps,mean_return,std_return,exact_return,optimal_return,solved");
}

TEST(Cli, ExitCodes) {
    const std::string cli = QVI_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    EXPECT_EQ(run("analyze --kind reference"), 0);
    EXPECT_EQ(run("train --kind needle --horizon 3 --budget 0"), 2);
    EXPECT_EQ(run("train --kind bogus"), 2);
    EXPECT_EQ(run("train --kind needle --horizon 3 -k 1 -m 200 --budget 100 --seeds 0"), 3);
    EXPECT_EQ(run("train --kind reference --b1 0.2 -k 1 -m 200 --seeds 0 1"), 0);
    EXPECT_EQ(run("tune --kind needle --horizon 3 -k 1 --m-hi 8 --rule exact --seeds 0 1 2"), 3);
}
