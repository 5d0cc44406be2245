// qvi: generate MDPs, analyze them exactly, and run SQIRL/GORP experiments.
//
// Exit codes: 0 success, 2 validation error, 3 budget failure (a run ran out
// of budget unsolved, tune found no m, or every k of a sweep failed).

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qvi/analysis.hpp"
#include "qvi/harness.hpp"
#include "qvi/mdp_io.hpp"
#include "qvi/results_io.hpp"

using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;

struct GenOptions {
    std::string kind = "random";
    int num_states = 5;
    int num_actions = 2;
    int horizon = 3;
    double reward_fraction = 0.5;
    std::uint64_t seed = 0;
    int length = 3;
    double slip = 0.0;
    double terminal_reward = 1.0;
    std::vector<double> decoys;
    double b0 = 0.1;
    double b1 = 0.4;
    std::optional<double> sticky;
};

void add_generator_options(CLI::App* cmd, GenOptions& g) {
    cmd->add_option("--kind", g.kind, "chain | random | random-deterministic | needle | reference")
        ->check(CLI::IsMember({"chain", "random", "random-deterministic", "needle", "reference"}));
    cmd->add_option("--states", g.num_states, "random: number of states");
    cmd->add_option("--actions", g.num_actions, "random, needle: number of actions");
    cmd->add_option("--horizon", g.horizon, "random, needle: horizon T");
    cmd->add_option("--reward-fraction", g.reward_fraction, "random: fraction of nonzero reward cells");
    cmd->add_option("--gen-seed", g.seed, "random: generator seed");
    cmd->add_option("--length", g.length, "chain: length L (T = L)");
    cmd->add_option("--slip", g.slip, "chain: probability that advancing fails");
    cmd->add_option("--terminal-reward", g.terminal_reward, "chain: reward at the chain end");
    cmd->add_option("--decoys", g.decoys, "chain: stay reward per timestep");
    cmd->add_option("--b0", g.b0, "reference: R_2(s_B, a0)");
    cmd->add_option("--b1", g.b1, "reference: R_2(s_B, a1)");
    cmd->add_option("--sticky", g.sticky, "apply the sticky-action transform with this probability");
}

json generator_json(const GenOptions& g) {
    json out{{"kind", g.kind}};
    if (g.kind == "chain") {
        out["length"] = g.length;
        out["slip"] = g.slip;
        out["terminal_reward"] = g.terminal_reward;
        out["decoys"] = g.decoys;
    } else if (g.kind == "random" || g.kind == "random-deterministic") {
        out["num_states"] = g.num_states;
        out["num_actions"] = g.num_actions;
        out["horizon"] = g.horizon;
        out["reward_fraction"] = g.reward_fraction;
        out["seed"] = g.seed;
    } else if (g.kind == "needle") {
        out["horizon"] = g.horizon;
        out["num_actions"] = g.num_actions;
    } else {
        out["b0"] = g.b0;
        out["b1"] = g.b1;
    }
    if (g.sticky) out["sticky"] = *g.sticky;
    return out;
}

struct SpecOptions {
    std::string spec_file;
    std::string mdp_file;
    GenOptions gen;
    std::string algo = "sqirl";
    int k = 1;
    int m = 100;
    std::string oracle = "tabular";
    std::string features = "one-hot";
    double lambda = qvi::kDefaultRidge;
    std::int64_t interval = 0;
    int episodes = 100;
    std::string rule = "mean";
    double epsilon = -1.0;
    std::int64_t budget = 100000;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    int workers = 0;
};

void add_spec_options(CLI::App* cmd, SpecOptions& o, bool with_k_m) {
    cmd->add_option("--spec", o.spec_file, "experiment spec JSON (flags below are ignored when given)");
    cmd->add_option("--mdp", o.mdp_file, "MDP file; otherwise the generator flags are used");
    add_generator_options(cmd, o.gen);
    cmd->add_option("--algo", o.algo, "sqirl | gorp")->check(CLI::IsMember({"sqirl", "gorp"}));
    if (with_k_m) {
        cmd->add_option("-k", o.k, "lookahead k");
        cmd->add_option("-m", o.m, "episodes per iteration (per sequence for GORP)");
    }
    cmd->add_option("--oracle", o.oracle, "tabular | linear")->check(CLI::IsMember({"tabular", "linear"}));
    cmd->add_option("--features", o.features, "linear: one-hot | state-action | feature file");
    cmd->add_option("--lambda", o.lambda, "linear: ridge coefficient");
    cmd->add_option("--interval", o.interval, "training timesteps between evaluations (0 = every iteration)");
    cmd->add_option("--episodes", o.episodes, "episodes per evaluation");
    cmd->add_option("--rule", o.rule, "solve rule: mean | exact")->check(CLI::IsMember({"mean", "exact"}));
    cmd->add_option("--epsilon", o.epsilon, "solve tolerance (default 1e-6 * max(1, J*))");
    cmd->add_option("--budget", o.budget, "maximum training timesteps per run");
    cmd->add_option("--seeds", o.seeds, "run seeds");
    cmd->add_option("--workers", o.workers, "worker threads (0 = hardware concurrency)");
}

qvi::ExperimentSpec build_spec(const SpecOptions& o) {
    if (!o.spec_file.empty()) {
        std::ifstream in(o.spec_file);
        if (!in) throw qvi::ValidationError("cannot read spec " + o.spec_file);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw qvi::ValidationError(std::string("spec: ") + e.what());
        }
        return qvi::spec_from_json(doc);
    }
    qvi::ExperimentSpec spec;
    if (o.mdp_file.empty()) spec.env.generator = generator_json(o.gen);
    else spec.env.path = o.mdp_file;
    spec.algo.algo = qvi::algo_from_string(o.algo);
    spec.algo.k = o.k;
    spec.algo.m = o.m;
    spec.algo.oracle = {o.oracle, o.features, o.lambda};
    spec.eval = {o.interval, o.episodes, qvi::solve_rule_from_string(o.rule), o.epsilon};
    spec.budget = o.budget;
    spec.seeds = o.seeds;
    spec.workers = o.workers;
    return spec;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void write_records(const std::vector<qvi::RunRecord>& records, const std::string& runs_csv,
                   const std::string& curves_csv) {
    if (!runs_csv.empty()) {
        std::ofstream out(runs_csv);
        qvi::write_runs_csv(records, out);
    }
    if (!curves_csv.empty()) {
        std::ofstream out(curves_csv);
        qvi::write_curves_csv(records, out);
    }
}

std::string fmt_opt(const std::optional<double>& v, int precision = 6) {
    if (!v) return "inf";
    std::ostringstream os;
    os << std::setprecision(precision) << *v;
    return os.str();
}

void print_runs(const std::vector<qvi::RunRecord>& records) {
    std::printf("%-6s %-7s %-12s %-12s %-10s %s\n", "seed", "solved", "complexity", "final", "optimal", "notes");
    for (const auto& r : records) {
        std::string notes;
        if (r.budget_exhausted) notes += "budget ";
        if (r.suspicious) notes += "suspicious ";
        if (r.stochastic_warning) notes += "stochastic-env ";
        std::printf("%-6llu %-7s %-12s %-12.6f %-10.6f %s\n", static_cast<unsigned long long>(r.seed),
                    r.solved ? "yes" : "no",
                    r.sample_complexity ? std::to_string(*r.sample_complexity).c_str() : "-", r.final_return,
                    r.optimal_return, notes.c_str());
    }
}

int cmd_gen(const GenOptions& g, const std::string& out) {
    const auto mdp = qvi::load_environment({"", generator_json(g)});
    if (out.empty() || out == "-") std::cout << qvi::mdp_to_json(mdp).dump(2) << '\n';
    else qvi::save_mdp(mdp, out);
    return 0;
}

int cmd_analyze(const std::string& mdp_file, const GenOptions& g, int k_max, double threshold,
                const std::string& scope, const std::string& json_out, const std::string& csv_out) {
    const auto mdp = qvi::load_environment(mdp_file.empty() ? qvi::EnvironmentSource{"", generator_json(g)}
                                                            : qvi::EnvironmentSource{mdp_file, nullptr});
    qvi::HorizonOptions opts;
    opts.k_max = k_max > 0 ? std::min(k_max, mdp.horizon()) : mdp.horizon();
    opts.approx_threshold = threshold;
    opts.solvability_scope = scope == "all" ? qvi::StateScope::AllStates : qvi::StateScope::GreedyReachable;
    const auto report = qvi::effective_horizon(mdp, opts);

    std::printf("%s: S=%d A=%d T=%d  J*=%.6f  worst=%.6f\n", mdp.metadata().name.c_str(), mdp.num_states(),
                mdp.num_actions(), mdp.horizon(), report.optimal_return, report.worst_return);
    std::printf("%-3s %-9s %-9s %-12s %-12s %-10s\n", "k", "solvable", "approx", "pessimal", "gap", "h_bar_k");
    for (const auto& e : report.entries)
        std::printf("%-3d %-9s %-9s %-12.6f %-12s %-10s\n", e.k, e.qvi_solvable ? "yes" : "no",
                    e.approx_solvable ? "yes" : "no", e.pessimal_return,
                    e.qvi_solvable ? fmt_opt(e.gap).c_str() : "-",
                    std::isfinite(e.h_bar) ? fmt_opt(e.h_bar).c_str() : "inf");
    std::printf("min exact k: %s  min approx k: %s  H_bar: %s\n",
                report.min_exact_k ? std::to_string(*report.min_exact_k).c_str() : "none",
                report.min_approx_k ? std::to_string(*report.min_approx_k).c_str() : "none",
                std::isfinite(report.h_bar) ? fmt_opt(report.h_bar).c_str() : "inf");

    if (!json_out.empty()) write_text(json_out, qvi::to_json(report).dump(2) + "\n");
    if (!csv_out.empty()) {
        std::ifstream probe(csv_out);
        const bool fresh = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
        probe.close();
        std::ofstream out(csv_out, std::ios::app);
        if (fresh) {
            for (std::size_t i = 0; i < qvi::kAnalysisColumns.size(); ++i)
                out << (i ? "," : "") << qvi::kAnalysisColumns[i];
            out << '\n';
        }
        qvi::write_analysis_csv_row(mdp_file.empty() ? mdp.metadata().name : mdp_file, mdp, report, out);
    }
    return 0;
}

int cmd_train(const SpecOptions& o, const std::string& out, const std::string& runs_csv,
              const std::string& curves_csv) {
    const auto records = qvi::run_experiment(build_spec(o));
    print_runs(records);
    json runs = json::array();
    for (const auto& r : records) runs.push_back(qvi::to_json(r));
    if (!out.empty()) write_text(out, json{{"runs", runs}}.dump(2) + "\n");
    write_records(records, runs_csv, curves_csv);
    for (const auto& r : records)
        if (r.budget_exhausted && !r.solved) return kExitBudget;
    return 0;
}

int cmd_tune(const SpecOptions& o, int m_lo, int m_hi, double threshold, const std::string& out,
             const std::string& runs_csv, const std::string& curves_csv) {
    const auto spec = build_spec(o);
    const auto tune = qvi::tune_m(spec, spec.algo.k, m_lo, m_hi, threshold);
    for (const auto& p : tune.probes)
        std::printf("m=%-6d solved %.2f %s\n", p.m, p.solved_fraction, p.success ? "ok" : "fail");
    if (tune.m_star) std::printf("m* = %d  median sample complexity %s\n", *tune.m_star,
                                 fmt_opt(tune.sample_complexity(), 10).c_str());
    else std::printf("%s\n", tune.note.c_str());
    if (tune.anomaly) std::printf("warning: non-monotone probe outcomes\n");
    const auto doc = qvi::to_json(tune);
    if (!out.empty()) write_text(out, doc.dump(2) + "\n");
    write_records(qvi::collect_records(doc), runs_csv, curves_csv);
    return tune.m_star ? 0 : kExitBudget;
}

int cmd_sweep(const SpecOptions& o, const std::vector<int>& ks, int m_lo, int m_hi, double threshold,
              const std::string& out, const std::string& runs_csv, const std::string& curves_csv) {
    const auto result = qvi::sweep(build_spec(o), ks, m_lo, m_hi, threshold);
    for (const auto& t : result.tunes) {
        if (t.skipped) {
            std::printf("k=%d skipped: %s\n", t.k, t.note.c_str());
            continue;
        }
        std::printf("k=%d m*=%s complexity=%s%s\n", t.k, t.m_star ? std::to_string(*t.m_star).c_str() : "none",
                    fmt_opt(t.sample_complexity(), 10).c_str(), t.anomaly ? " (anomaly)" : "");
    }
    if (result.summary.total_failure) std::printf("total failure: no k solved within [%d, %d]\n", m_lo, m_hi);
    else if (result.summary.best_k)
        std::printf("best k=%d m=%d complexity=%s\n", *result.summary.best_k, *result.summary.best_m,
                    fmt_opt(result.summary.best_sample_complexity, 10).c_str());
    const auto doc = qvi::to_json(result);
    if (!out.empty()) write_text(out, doc.dump(2) + "\n");
    std::printf("digest %016llx\n", static_cast<unsigned long long>(qvi::results_digest(doc)));
    write_records(qvi::collect_records(doc), runs_csv, curves_csv);
    return result.summary.total_failure ? kExitBudget : 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& runs_csv, const std::string& curves_csv) {
    std::vector<qvi::RunRecord> records;
    for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw qvi::ValidationError("cannot read " + path);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw qvi::ValidationError(path + ": " + e.what());
        }
        auto part = qvi::collect_records(doc);
        std::printf("%s: %zu runs, digest %016llx\n", path.c_str(), part.size(),
                    static_cast<unsigned long long>(qvi::results_digest(doc)));
        records.insert(records.end(), part.begin(), part.end());
    }
    if (runs_csv.empty() && curves_csv.empty()) {
        qvi::write_runs_csv(records, std::cout);
        return 0;
    }
    write_records(records, runs_csv, curves_csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact k-QVI analysis and SQIRL/GORP experiments on tabular MDPs"};
    app.require_subcommand(1);

    GenOptions gen;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "generate an MDP file");
    add_generator_options(gen_cmd, gen);
    gen_cmd->add_option("-o,--out", gen_out, "output path (stdout when omitted)");

    std::string an_mdp, an_scope = "reachable", an_json, an_csv;
    GenOptions an_gen;
    int an_kmax = 0;
    double an_threshold = 0.95;
    auto* an_cmd = app.add_subcommand("analyze", "exact k-QVI solvability, gaps and effective horizon");
    an_cmd->add_option("--mdp", an_mdp, "MDP file; otherwise the generator flags are used");
    add_generator_options(an_cmd, an_gen);
    an_cmd->add_option("--k-max", an_kmax, "largest k to analyze (default T)");
    an_cmd->add_option("--threshold", an_threshold, "approximate-solvability fraction");
    an_cmd->add_option("--scope", an_scope, "solvability scope: reachable | all")
        ->check(CLI::IsMember({"reachable", "all"}));
    an_cmd->add_option("--json", an_json, "write the report as JSON");
    an_cmd->add_option("--csv", an_csv, "append a row to an analysis CSV");

    SpecOptions train_o, tune_o, sweep_o;
    std::string out, runs_csv, curves_csv;
    auto add_outputs = [&](CLI::App* cmd) {
        cmd->add_option("-o,--out", out, "results JSON");
        cmd->add_option("--runs-csv", runs_csv, "flat run table");
        cmd->add_option("--curves-csv", curves_csv, "learning-curve table");
    };
    auto* train_cmd = app.add_subcommand("train", "run one configuration over seeds");
    add_spec_options(train_cmd, train_o, true);
    add_outputs(train_cmd);

    int m_lo = 1, m_hi = 512;
    double threshold = 0.6;
    auto* tune_cmd = app.add_subcommand("tune", "binary search for the smallest m that solves");
    add_spec_options(tune_cmd, tune_o, false);
    tune_cmd->add_option("-k", tune_o.k, "lookahead k");
    tune_cmd->add_option("--m-lo", m_lo, "smallest m");
    tune_cmd->add_option("--m-hi", m_hi, "largest m");
    tune_cmd->add_option("--threshold", threshold, "required fraction of solved seeds");
    add_outputs(tune_cmd);

    std::vector<int> ks{1, 2, 3, 4, 5};
    auto* sweep_cmd = app.add_subcommand("sweep", "tune m for each k and pick the cheapest");
    add_spec_options(sweep_cmd, sweep_o, false);
    sweep_cmd->add_option("--ks", ks, "k values");
    sweep_cmd->add_option("--m-lo", m_lo, "smallest m");
    sweep_cmd->add_option("--m-hi", m_hi, "largest m");
    sweep_cmd->add_option("--threshold", threshold, "required fraction of solved seeds");
    add_outputs(sweep_cmd);

    std::vector<std::string> inputs;
    auto* report_cmd = app.add_subcommand("report", "aggregate results documents into CSV tables");
    report_cmd->add_option("inputs", inputs, "results JSON files")->required();
    report_cmd->add_option("--runs-csv", runs_csv, "flat run table (stdout when no output is given)");
    report_cmd->add_option("--curves-csv", curves_csv, "learning-curve table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitValidation;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen, gen_out);
        if (*an_cmd) return cmd_analyze(an_mdp, an_gen, an_kmax, an_threshold, an_scope, an_json, an_csv);
        if (*train_cmd) return cmd_train(train_o, out, runs_csv, curves_csv);
        if (*tune_cmd) return cmd_tune(tune_o, m_lo, m_hi, threshold, out, runs_csv, curves_csv);
        if (*sweep_cmd) return cmd_sweep(sweep_o, ks, m_lo, m_hi, threshold, out, runs_csv, curves_csv);
        if (*report_cmd) return cmd_report(inputs, runs_csv, curves_csv);
    } catch (const qvi::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
