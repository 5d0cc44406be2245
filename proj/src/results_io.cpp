#include "qvi/results_io.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qvi {

using nlohmann::json;

namespace {

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    return doc.at(key).get<T>();
}

// JSON has no infinity; encode it as null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string fmt(double x) {
    if (!std::isfinite(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

template <class T>
std::string fmt_opt(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_floating_point_v<T>) return fmt(*v);
    else return std::to_string(*v);
}

// Quote only when needed; env names may contain commas.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void header_row(const std::vector<std::string>& cols, std::ostream& out) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
}

void strip_wall_clock(json& doc) {
    if (doc.is_object()) {
        doc.erase("wall_clock_seconds");
        for (auto& [_, v] : doc.items()) strip_wall_clock(v);
    } else if (doc.is_array()) {
        for (auto& v : doc) strip_wall_clock(v);
    }
}

}  // namespace

json to_json(const ExperimentSpec& spec) {
    json env = json::object();
    if (!spec.env.path.empty()) env["path"] = spec.env.path;
    if (!spec.env.generator.is_null()) env["generator"] = spec.env.generator;
    return json{{"env", env},
                {"algo",
                 {{"name", to_string(spec.algo.algo)},
                  {"k", spec.algo.k},
                  {"m", spec.algo.m},
                  {"seed", spec.algo.seed},
                  {"oracle",
                   {{"kind", spec.algo.oracle.kind},
                    {"features", spec.algo.oracle.features},
                    {"lambda", spec.algo.oracle.lambda}}}}},
                {"eval",
                 {{"interval", spec.eval.interval},
                  {"episodes", spec.eval.episodes},
                  {"rule", to_string(spec.eval.rule)},
                  {"epsilon", spec.eval.epsilon}}},
                {"budget", spec.budget},
                {"seeds", spec.seeds},
                {"workers", spec.workers}};
}

ExperimentSpec spec_from_json(const json& doc) {
    try {
        ExperimentSpec spec;
        const auto& env = doc.at("env");
        spec.env.path = env.value("path", std::string{});
        if (env.contains("generator")) spec.env.generator = env["generator"];
        if (doc.contains("algo")) {
            const auto& a = doc["algo"];
            spec.algo.algo = algo_from_string(a.value("name", std::string("sqirl")));
            spec.algo.k = a.value("k", 1);
            spec.algo.m = a.value("m", 1);
            spec.algo.seed = a.value("seed", std::uint64_t{0});
            if (a.contains("oracle")) {
                const auto& o = a["oracle"];
                spec.algo.oracle.kind = o.value("kind", std::string("tabular"));
                spec.algo.oracle.features = o.value("features", std::string("one-hot"));
                spec.algo.oracle.lambda = o.value("lambda", kDefaultRidge);
            }
        }
        if (doc.contains("eval")) {
            const auto& e = doc["eval"];
            spec.eval.interval = e.value("interval", std::int64_t{0});
            spec.eval.episodes = e.value("episodes", 100);
            spec.eval.rule = solve_rule_from_string(e.value("rule", std::string("mean")));
            spec.eval.epsilon = e.value("epsilon", -1.0);
        }
        spec.budget = doc.value("budget", spec.budget);
        spec.seeds = doc.value("seeds", spec.seeds);
        spec.workers = doc.value("workers", 0);
        return spec;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("experiment spec: ") + e.what());
    }
}

json to_json(const RunRecord& r) {
    json evals = json::array();
    for (const auto& e : r.evaluations)
        evals.push_back({{"timesteps", e.timesteps},
                         {"mean_return", e.mean_return},
                         {"std_return", e.std_return},
                         {"exact_return", e.exact_return},
                         {"solved", e.solved},
                         {"suspicious", e.suspicious}});
    return json{{"spec", r.spec},
                {"env", r.env},
                {"algo", to_string(r.algo)},
                {"k", r.k},
                {"m", r.m},
                {"seed", r.seed},
                {"optimal_return", r.optimal_return},
                {"solve_epsilon", r.solve_epsilon},
                {"evaluations", evals},
                {"solved", r.solved},
                {"sample_complexity", opt(r.sample_complexity)},
                {"final_return", r.final_return},
                {"suspicious", r.suspicious},
                {"budget_exhausted", r.budget_exhausted},
                {"stochastic_warning", r.stochastic_warning},
                {"training_timesteps", r.training_timesteps},
                {"evaluation_timesteps", r.evaluation_timesteps},
                {"wall_clock_seconds", r.wall_clock_seconds}};
}

RunRecord run_record_from_json(const json& d) {
    RunRecord r;
    r.spec = d.at("spec");
    r.env = d.at("env").get<std::string>();
    r.algo = algo_from_string(d.at("algo").get<std::string>());
    r.k = d.at("k").get<int>();
    r.m = d.at("m").get<int>();
    r.seed = d.at("seed").get<std::uint64_t>();
    r.optimal_return = d.at("optimal_return").get<double>();
    r.solve_epsilon = d.at("solve_epsilon").get<double>();
    for (const auto& e : d.at("evaluations"))
        r.evaluations.push_back({e.at("timesteps").get<std::int64_t>(), e.at("mean_return").get<double>(),
                                 e.at("std_return").get<double>(), e.at("exact_return").get<double>(),
                                 e.at("solved").get<bool>(), e.at("suspicious").get<bool>()});
    r.solved = d.at("solved").get<bool>();
    r.sample_complexity = get_opt<std::int64_t>(d, "sample_complexity");
    r.final_return = d.at("final_return").get<double>();
    r.suspicious = d.at("suspicious").get<bool>();
    r.budget_exhausted = d.at("budget_exhausted").get<bool>();
    r.stochastic_warning = d.at("stochastic_warning").get<bool>();
    r.training_timesteps = d.at("training_timesteps").get<std::int64_t>();
    r.evaluation_timesteps = d.at("evaluation_timesteps").get<std::int64_t>();
    r.wall_clock_seconds = d.value("wall_clock_seconds", 0.0);
    return r;
}

json to_json(const TuneResult& t) {
    json probes = json::array();
    for (const auto& p : t.probes) {
        json records = json::array();
        for (const auto& r : p.records) records.push_back(to_json(r));
        probes.push_back(
            {{"m", p.m}, {"solved_fraction", p.solved_fraction}, {"success", p.success}, {"records", records}});
    }
    return json{{"k", t.k},
                {"m_lo", t.m_lo},
                {"m_hi", t.m_hi},
                {"threshold", t.threshold},
                {"m_star", opt(t.m_star)},
                {"sample_complexity", opt(t.sample_complexity())},
                {"probes", probes},
                {"anomaly", t.anomaly},
                {"skipped", t.skipped},
                {"note", t.note}};
}

TuneResult tune_result_from_json(const json& d) {
    TuneResult t;
    t.k = d.at("k").get<int>();
    t.m_lo = d.at("m_lo").get<int>();
    t.m_hi = d.at("m_hi").get<int>();
    t.threshold = d.at("threshold").get<double>();
    t.m_star = get_opt<int>(d, "m_star");
    for (const auto& p : d.at("probes")) {
        Probe probe;
        probe.m = p.at("m").get<int>();
        probe.solved_fraction = p.at("solved_fraction").get<double>();
        probe.success = p.at("success").get<bool>();
        for (const auto& r : p.at("records")) probe.records.push_back(run_record_from_json(r));
        t.probes.push_back(std::move(probe));
    }
    t.anomaly = d.at("anomaly").get<bool>();
    t.skipped = d.at("skipped").get<bool>();
    t.note = d.at("note").get<std::string>();
    return t;
}

json to_json(const SweepResult& s) {
    json tunes = json::array();
    for (const auto& t : s.tunes) tunes.push_back(to_json(t));
    return json{{"spec", s.spec},
                {"tunes", tunes},
                {"summary",
                 {{"total_failure", s.summary.total_failure},
                  {"best_k", opt(s.summary.best_k)},
                  {"best_m", opt(s.summary.best_m)},
                  {"best_sample_complexity", opt(s.summary.best_sample_complexity)}}}};
}

SweepResult sweep_result_from_json(const json& d) {
    SweepResult s;
    s.spec = d.at("spec");
    for (const auto& t : d.at("tunes")) s.tunes.push_back(tune_result_from_json(t));
    const auto& sum = d.at("summary");
    s.summary.total_failure = sum.at("total_failure").get<bool>();
    s.summary.best_k = get_opt<int>(sum, "best_k");
    s.summary.best_m = get_opt<int>(sum, "best_m");
    s.summary.best_sample_complexity = get_opt<double>(sum, "best_sample_complexity");
    return s;
}

json to_json(const HorizonReport& report) {
    json entries = json::array();
    for (const auto& e : report.entries)
        entries.push_back({{"k", e.k},
                           {"qvi_solvable", e.qvi_solvable},
                           {"approx_solvable", e.approx_solvable},
                           {"pessimal_return", e.pessimal_return},
                           {"gap", opt(e.gap)},
                           {"h_bar", finite_or_null(e.h_bar)},
                           {"gap_clamped", e.gap_clamped},
                           {"all_ties", e.all_ties},
                           {"skipped_pairs", e.skipped_pairs}});
    return json{{"entries", entries},
                {"min_exact_k", opt(report.min_exact_k)},
                {"min_approx_k", opt(report.min_approx_k)},
                {"h_bar", finite_or_null(report.h_bar)},
                {"optimal_return", report.optimal_return},
                {"worst_return", report.worst_return},
                {"approx_threshold", report.approx_threshold},
                {"solvability_scope", to_string(report.solvability_scope)},
                {"gap_scope", to_string(report.gap_scope)},
                {"num_actions", report.num_actions}};
}

void write_runs_csv(const std::vector<RunRecord>& records, std::ostream& out, bool header) {
    if (header) header_row(kRunColumns, out);
    for (const auto& r : records)
        out << csv_field(r.env) << ',' << to_string(r.algo) << ',' << r.k << ',' << r.m << ',' << r.seed << ','
            << (r.solved ? 1 : 0) << ',' << fmt_opt(r.sample_complexity) << ',' << fmt(r.final_return) << ','
            << fmt(r.optimal_return) << ',' << r.training_timesteps << ',' << r.evaluations.size() << ','
            << (r.suspicious ? 1 : 0) << ',' << (r.budget_exhausted ? 1 : 0) << '\n';
}

void write_curves_csv(const std::vector<RunRecord>& records, std::ostream& out, bool header) {
    if (header) header_row(kCurveColumns, out);
    for (const auto& r : records)
        for (const auto& e : r.evaluations)
            out << csv_field(r.env) << ',' << to_string(r.algo) << ',' << r.k << ',' << r.m << ',' << r.seed << ','
                << e.timesteps << ',' << fmt(e.mean_return) << ',' << fmt(e.std_return) << ','
                << fmt(e.exact_return) << ',' << fmt(r.optimal_return) << ',' << (e.solved ? 1 : 0) << '\n';
}

void write_analysis_csv_row(const std::string& env, const TabularMdp& mdp, const HorizonReport& report,
                            std::ostream& out) {
    out << csv_field(env) << ',' << mdp.num_states() << ',' << mdp.num_actions() << ',' << mdp.horizon() << ','
        << fmt_opt(report.min_exact_k) << ',' << fmt_opt(report.min_approx_k) << ',' << fmt(report.h_bar) << ','
        << fmt(report.optimal_return) << '\n';
}

std::vector<RunRecord> collect_records(const json& doc) {
    std::vector<RunRecord> out;
    auto from_tune = [&](const json& t) {
        for (const auto& p : t.at("probes"))
            for (const auto& r : p.at("records")) out.push_back(run_record_from_json(r));
    };
    try {
        if (doc.is_array()) {
            for (const auto& r : doc) out.push_back(run_record_from_json(r));
        } else if (doc.contains("tunes")) {
            for (const auto& t : doc["tunes"]) from_tune(t);
        } else if (doc.contains("probes")) {
            from_tune(doc);
        } else if (doc.contains("runs")) {
            for (const auto& r : doc["runs"]) out.push_back(run_record_from_json(r));
        } else {
            throw ValidationError("unrecognised results document");
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("results document: ") + e.what());
    }
    return out;
}

std::uint64_t results_digest(const json& doc) {
    auto copy = doc;
    strip_wall_clock(copy);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : copy.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace qvi
