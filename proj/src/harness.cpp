#include "qvi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <thread>

#include "qvi/algorithms.hpp"
#include "qvi/analysis.hpp"
#include "qvi/environments.hpp"
#include "qvi/mdp_io.hpp"
#include "qvi/results_io.hpp"
#include "qvi/tabular_simulator.hpp"

namespace qvi {

std::string to_string(Algo algo) { return algo == Algo::Sqirl ? "sqirl" : "gorp"; }

Algo algo_from_string(const std::string& name) {
    if (name == "sqirl") return Algo::Sqirl;
    if (name == "gorp") return Algo::Gorp;
    throw ValidationError("unknown algorithm '" + name + "'");
}

std::string to_string(SolveRule rule) { return rule == SolveRule::MeanReturn ? "mean" : "exact"; }

SolveRule solve_rule_from_string(const std::string& name) {
    if (name == "mean") return SolveRule::MeanReturn;
    if (name == "exact") return SolveRule::ExactReturn;
    throw ValidationError("unknown solve rule '" + name + "'");
}

void validate_spec(const ExperimentSpec& spec) {
    if (spec.env.path.empty() == spec.env.generator.is_null())
        throw ValidationError("environment needs exactly one of a path or a generator");
    if (spec.algo.k < 1) throw ValidationError("k must be >= 1");
    if (spec.algo.m < 1) throw ValidationError("m must be >= 1");
    if (spec.eval.interval < 0) throw ValidationError("evaluation interval must be positive (or 0 for per-iteration)");
    if (spec.eval.episodes < 1) throw ValidationError("evaluation episodes must be >= 1");
    if (spec.budget < 1) throw ValidationError("budget must be positive");
    if (spec.eval.interval > 0 && spec.budget < spec.eval.interval)
        throw ValidationError("budget must be at least one evaluation interval");
    if (spec.seeds.empty()) throw ValidationError("at least one seed is required");
    if (spec.algo.oracle.kind != "tabular" && spec.algo.oracle.kind != "linear")
        throw ValidationError("unknown oracle kind '" + spec.algo.oracle.kind + "'");
    if (spec.algo.oracle.lambda < 0.0) throw ValidationError("ridge lambda must be nonnegative");
}

TabularMdp make_environment(const nlohmann::json& g) {
    try {
        const auto kind = g.at("kind").get<std::string>();
        TabularMdp mdp;
        if (kind == "chain") {
            mdp = make_chain(g.at("length").get<int>(), g.value("slip", 0.0), g.value("terminal_reward", 1.0),
                             g.value("decoys", std::vector<double>{}));
        } else if (kind == "random") {
            mdp = make_random_mdp(g.at("num_states").get<int>(), g.at("num_actions").get<int>(),
                                  g.at("horizon").get<int>(), g.value("reward_fraction", 0.5),
                                  g.value("seed", std::uint64_t{0}));
        } else if (kind == "random-deterministic") {
            mdp = make_random_deterministic_mdp(g.at("num_states").get<int>(), g.at("num_actions").get<int>(),
                                                g.at("horizon").get<int>(), g.value("reward_fraction", 0.5),
                                                g.value("seed", std::uint64_t{0}));
        } else if (kind == "needle") {
            mdp = make_needle(g.at("horizon").get<int>(), g.value("num_actions", 2));
        } else if (kind == "reference") {
            mdp = make_reference_mdp(g.value("b0", 0.1), g.value("b1", 0.4));
        } else {
            throw ValidationError("unknown generator kind '" + kind + "'");
        }
        if (g.contains("sticky")) mdp = sticky_transform(mdp, g["sticky"].get<double>());
        if (g.contains("name")) mdp.metadata().name = g["name"].get<std::string>();
        return mdp;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("generator: ") + e.what());
    } catch (const ValidationError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("generator: ") + e.what());
    }
}

TabularMdp load_environment(const EnvironmentSource& source) {
    TabularMdp mdp;
    try {
        mdp = source.path.empty() ? make_environment(source.generator) : load_mdp(source.path);
    } catch (const StructuralError& e) {
        throw ValidationError(std::string("environment: ") + e.what());
    }
    if (auto report = validate_mdp(mdp); !report.ok())
        throw ValidationError("environment fails validation:\n" + report.summary());
    return mdp;
}

namespace {

std::unique_ptr<RegressionOracle> make_oracle(const OracleConfig& config, int S, int A) {
    if (config.kind == "tabular") return std::make_unique<TabularMeanOracle>(S, A);
    if (config.features == "one-hot") return std::make_unique<LinearLsqOracle>(FeatureMap::one_hot(S, A), config.lambda);
    if (config.features == "state-action")
        return std::make_unique<LinearLsqOracle>(FeatureMap::state_and_action(S, A), config.lambda);
    std::ifstream in(config.features);
    if (!in) throw ValidationError("cannot read feature document " + config.features);
    auto features = FeatureMap::from_json(nlohmann::json::parse(in));
    if (features.num_states() != S || features.num_actions() != A)
        throw ValidationError("feature document grid does not match the environment");
    return std::make_unique<LinearLsqOracle>(std::move(features), config.lambda);
}

// Drives a learner with evaluations at the configured cadence.
struct RunDriver {
    const ExperimentSpec& spec;
    const TabularMdp& mdp;
    RunRecord& rec;
    TabularSimulator eval_sim;
    SampleLedger eval_ledger;
    int eval_index = 0;

    RunDriver(const ExperimentSpec& s, const TabularMdp& model, RunRecord& r)
        : spec(s), mdp(model), rec(r), eval_sim(model) {}

    void evaluate(std::int64_t timesteps, const Controller& controller, const TimedPolicy& exact_policy) {
        EvaluationPoint pt;
        pt.timesteps = timesteps;
        const auto stats = evaluate_controller(eval_sim, controller, spec.eval.episodes,
                                               Rng::derive(rec.seed, {0xE7A1, static_cast<std::uint64_t>(eval_index++)}),
                                               eval_ledger);
        pt.mean_return = stats.mean;
        pt.std_return = stats.stddev;
        pt.exact_return = exact_return(mdp, exact_policy);
        const double sem = stats.stddev / std::sqrt(static_cast<double>(stats.episodes));
        pt.suspicious = stats.mean > rec.optimal_return + std::max(5.0 * sem, rec.solve_epsilon);
        if (spec.eval.rule == SolveRule::MeanReturn)
            pt.solved = !pt.suspicious && stats.mean >= rec.optimal_return - rec.solve_epsilon;
        else
            pt.solved = pt.exact_return >= rec.optimal_return - rec.solve_epsilon;
        rec.suspicious = rec.suspicious || pt.suspicious;
        if (pt.solved && !rec.solved) {
            rec.solved = true;
            rec.sample_complexity = timesteps;
        }
        rec.evaluations.push_back(pt);
    }

    // Learner: done(), step(), cost(), training(), controller(), exact_policy().
    template <class Learner>
    void drive(Learner& learner) {
        evaluate(0, learner.controller(), learner.exact_policy());
        const std::int64_t interval = spec.eval.interval;
        std::int64_t next_eval = interval;
        std::int64_t last_eval = 0;
        while (!learner.done()) {
            if (learner.training() + learner.cost() > spec.budget) {
                rec.budget_exhausted = true;
                break;
            }
            learner.step();
            const auto ts = learner.training();
            if (interval == 0 || ts >= next_eval) {
                evaluate(ts, learner.controller(), learner.exact_policy());
                last_eval = ts;
                if (interval > 0)
                    while (next_eval <= ts) next_eval += interval;
            }
        }
        if (learner.training() != last_eval && !rec.budget_exhausted)
            evaluate(learner.training(), learner.controller(), learner.exact_policy());
        rec.final_return = exact_return(mdp, learner.exact_policy());
        rec.training_timesteps = learner.training();
        rec.evaluation_timesteps = eval_ledger.evaluation_timesteps;
    }
};

struct SqirlAdapter {
    SqirlLearner& learner;
    int num_states;
    bool done() const { return learner.done(); }
    void step() { learner.step(); }
    std::int64_t cost() const { return learner.timesteps_per_iteration(); }
    std::int64_t training() const { return learner.ledger().training_timesteps; }
    Controller controller() const {
        const auto& policy = learner.policy();
        return [&policy](int t, int s, Rng& rng) { return policy.act(t, s, rng); };
    }
    TimedPolicy exact_policy() const { return learner.policy().to_timed_policy(num_states); }
};

struct GorpAdapter {
    GorpLearner& learner;
    int num_states;
    int horizon;
    int num_actions;
    bool done() const { return learner.done(); }
    void step() { learner.step(); }
    std::int64_t cost() const { return learner.timesteps_next_iteration(); }
    std::int64_t training() const { return learner.ledger().training_timesteps; }
    Controller controller() const {
        return [this](int t, int, Rng& rng) { return learner.act(t, rng); };
    }
    TimedPolicy exact_policy() const {
        return TimedPolicy::open_loop(learner.actions(), horizon, num_states, num_actions);
    }
};

}  // namespace

RunRecord run_single(const ExperimentSpec& spec, const TabularMdp& mdp, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    if (spec.algo.k > mdp.horizon())
        throw ValidationError("k = " + std::to_string(spec.algo.k) + " exceeds the horizon " +
                              std::to_string(mdp.horizon()));
    RunRecord rec;
    auto echo = spec;
    echo.algo.seed = seed;
    echo.seeds = {seed};
    rec.spec = to_json(echo);
    rec.env = mdp.metadata().name.empty() ? (spec.env.path.empty() ? "generated" : spec.env.path) : mdp.metadata().name;
    rec.algo = spec.algo.algo;
    rec.k = spec.algo.k;
    rec.m = spec.algo.m;
    rec.seed = seed;
    rec.optimal_return = optimal_return(mdp);
    rec.solve_epsilon = spec.eval.epsilon >= 0.0 ? spec.eval.epsilon : 1e-6 * std::max(1.0, rec.optimal_return);

    RunDriver driver(spec, mdp, rec);
    TabularSimulator sim(mdp);
    if (spec.algo.algo == Algo::Sqirl) {
        const auto oracle = make_oracle(spec.algo.oracle, mdp.num_states(), mdp.num_actions());
        SqirlLearner learner(sim, mdp.num_states(), *oracle, {spec.algo.k, spec.algo.m, seed});
        SqirlAdapter adapter{learner, mdp.num_states()};
        driver.drive(adapter);
    } else {
        GorpLearner learner(sim, {spec.algo.k, spec.algo.m, seed});
        GorpAdapter adapter{learner, mdp.num_states(), mdp.horizon(), mdp.num_actions()};
        driver.drive(adapter);
        rec.stochastic_warning = learner.stochastic_warning();
    }
    rec.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
    validate_spec(spec);
    const auto mdp = load_environment(spec.env);
    if (spec.algo.k > mdp.horizon())
        throw ValidationError("k = " + std::to_string(spec.algo.k) + " exceeds the horizon");

    auto seeds = spec.seeds;
    std::sort(seeds.begin(), seeds.end());
    std::vector<RunRecord> records(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    unsigned workers = spec.workers > 0 ? static_cast<unsigned>(spec.workers) : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(seeds.size()));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                records[i] = run_single(spec, mdp, seeds[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return records;
}

std::optional<double> TuneResult::sample_complexity() const {
    if (!m_star) return std::nullopt;
    for (const auto& p : probes) {
        if (p.m != *m_star) continue;
        std::vector<double> xs;
        for (const auto& r : p.records)
            if (r.sample_complexity) xs.push_back(static_cast<double>(*r.sample_complexity));
        if (xs.empty()) return std::nullopt;
        std::sort(xs.begin(), xs.end());
        const auto n = xs.size();
        return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    }
    return std::nullopt;
}

TuneResult tune_m(const ExperimentSpec& spec_template, int k, int m_lo, int m_hi, double threshold) {
    if (m_lo < 1) throw ValidationError("m_lo must be >= 1");
    if (m_hi < m_lo) throw ValidationError("m_hi must be >= m_lo");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("success threshold must lie in (0, 1]");

    TuneResult result;
    result.k = k;
    result.m_lo = m_lo;
    result.m_hi = m_hi;
    result.threshold = threshold;

    auto probe = [&](int m) {
        auto spec = spec_template;
        spec.algo.k = k;
        spec.algo.m = m;
        Probe p;
        p.m = m;
        p.records = run_experiment(spec);
        int solved = 0;
        for (const auto& r : p.records) solved += r.solved ? 1 : 0;
        p.solved_fraction = static_cast<double>(solved) / p.records.size();
        p.success = p.solved_fraction >= threshold;
        result.probes.push_back(std::move(p));
        return result.probes.back().success;
    };

    if (probe(m_lo)) {
        result.m_star = m_lo;
    } else {
        int left = m_lo + 1, right = m_hi;
        while (left <= right) {
            const int mid = left + (right - left) / 2;
            if (probe(mid)) {
                result.m_star = mid;
                right = mid - 1;
            } else {
                left = mid + 1;
            }
        }
    }
    for (const auto& small : result.probes)
        for (const auto& large : result.probes)
            if (small.m < large.m && small.success && !large.success) result.anomaly = true;
    if (!result.m_star) result.note = "no probed m in [" + std::to_string(m_lo) + ", " + std::to_string(m_hi) + "] met the success rule";
    return result;
}

SweepResult sweep(const ExperimentSpec& spec_template, const std::vector<int>& ks, int m_lo, int m_hi,
                  double threshold) {
    if (ks.empty()) throw ValidationError("sweep needs at least one k");
    validate_spec(spec_template);
    const auto mdp = load_environment(spec_template.env);

    SweepResult out;
    out.spec = to_json(spec_template);
    for (int k : ks) {
        if (k < 1) throw ValidationError("k must be >= 1");
        if (k > mdp.horizon()) {
            TuneResult skipped;
            skipped.k = k;
            skipped.m_lo = m_lo;
            skipped.m_hi = m_hi;
            skipped.threshold = threshold;
            skipped.skipped = true;
            skipped.note = "k exceeds the horizon " + std::to_string(mdp.horizon());
            out.tunes.push_back(std::move(skipped));
            continue;
        }
        out.tunes.push_back(tune_m(spec_template, k, m_lo, m_hi, threshold));
    }
    for (const auto& t : out.tunes) {
        if (!t.m_star) continue;
        out.summary.total_failure = false;
        const auto sc = t.sample_complexity();
        if (!sc) continue;
        if (!out.summary.best_sample_complexity || *sc < *out.summary.best_sample_complexity) {
            out.summary.best_sample_complexity = sc;
            out.summary.best_k = t.k;
            out.summary.best_m = t.m_star;
        }
    }
    return out;
}

}  // namespace qvi
