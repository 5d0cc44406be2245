#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvi/mdp.hpp"
#include "qvi/oracles.hpp"

namespace qvi {

/// Invalid experiment input (bad spec, MDP failing validation). CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Algo { Sqirl, Gorp };

std::string to_string(Algo algo);
Algo algo_from_string(const std::string& name);

struct OracleConfig {
    /// "tabular" or "linear".
    std::string kind = "tabular";
    /// For linear: "one-hot", "state-action", or a path to a feature document.
    std::string features = "one-hot";
    double lambda = kDefaultRidge;

    bool operator==(const OracleConfig&) const = default;
};

struct AlgorithmConfig {
    Algo algo = Algo::Sqirl;
    int k = 1;
    int m = 1;
    OracleConfig oracle;
    /// Per-run seed; the harness overwrites it with each entry of ExperimentSpec::seeds.
    std::uint64_t seed = 0;

    bool operator==(const AlgorithmConfig&) const = default;
};

/// Either a file path or a generator object, e.g.
/// {"kind": "chain", "length": 3, "slip": 0.2, "terminal_reward": 0.5, "decoys": [...], "sticky": 0.25}.
struct EnvironmentSource {
    std::string path;
    nlohmann::json generator;

    bool operator==(const EnvironmentSource&) const = default;
};

enum class SolveRule {
    /// Monte Carlo mean of evaluation returns reaches J* - epsilon.
    MeanReturn,
    /// Exact value of the current policy reaches J* - epsilon.
    ExactReturn,
};

std::string to_string(SolveRule rule);
SolveRule solve_rule_from_string(const std::string& name);

struct EvaluationConfig {
    /// Training timesteps between evaluations; 0 = one learner iteration.
    std::int64_t interval = 0;
    int episodes = 100;
    SolveRule rule = SolveRule::MeanReturn;
    /// Negative = default 1e-6 * max(1, J*).
    double epsilon = -1.0;

    bool operator==(const EvaluationConfig&) const = default;
};

struct ExperimentSpec {
    EnvironmentSource env;
    AlgorithmConfig algo;
    EvaluationConfig eval;
    std::int64_t budget = 100000;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    /// Worker threads for seeds; 0 = hardware concurrency.
    int workers = 0;

    bool operator==(const ExperimentSpec&) const = default;
};

/// Throws ValidationError for inconsistent specs.
void validate_spec(const ExperimentSpec& spec);

struct EvaluationPoint {
    std::int64_t timesteps = 0;
    double mean_return = 0.0;
    double std_return = 0.0;
    double exact_return = 0.0;
    bool solved = false;
    bool suspicious = false;

    bool operator==(const EvaluationPoint&) const = default;
};

struct RunRecord {
    nlohmann::json spec;
    std::string env;
    Algo algo = Algo::Sqirl;
    int k = 0;
    int m = 0;
    std::uint64_t seed = 0;
    double optimal_return = 0.0;
    double solve_epsilon = 0.0;
    std::vector<EvaluationPoint> evaluations;
    bool solved = false;
    std::optional<std::int64_t> sample_complexity;
    /// Exact value of the policy at the end of training.
    double final_return = 0.0;
    bool suspicious = false;
    bool budget_exhausted = false;
    bool stochastic_warning = false;
    std::int64_t training_timesteps = 0;
    std::int64_t evaluation_timesteps = 0;
    double wall_clock_seconds = 0.0;

    bool operator==(const RunRecord&) const = default;
};

/// Builds the environment named by a generator object (see EnvironmentSource).
TabularMdp make_environment(const nlohmann::json& generator);

/// Loads or generates the environment; throws ValidationError if it fails validate_mdp.
TabularMdp load_environment(const EnvironmentSource& source);

/// One run per seed, sorted by seed. Seeds run on a worker pool.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);

/// Single seed; `mdp` must be the spec's environment.
RunRecord run_single(const ExperimentSpec& spec, const TabularMdp& mdp, std::uint64_t seed);

struct Probe {
    int m = 0;
    double solved_fraction = 0.0;
    bool success = false;
    std::vector<RunRecord> records;

    bool operator==(const Probe&) const = default;
};

struct TuneResult {
    int k = 0;
    int m_lo = 0;
    int m_hi = 0;
    double threshold = 0.0;
    /// Smallest probed m meeting the success rule.
    std::optional<int> m_star;
    /// Probes in the order they were run.
    std::vector<Probe> probes;
    /// A smaller probe succeeded although a larger one failed.
    bool anomaly = false;
    bool skipped = false;
    std::string note;

    /// Median sample complexity over solved seeds at m_star.
    std::optional<double> sample_complexity() const;

    bool operator==(const TuneResult&) const = default;
};

/// Binary search for the smallest m in [m_lo, m_hi] whose fraction of solved
/// seeds is >= threshold. m_lo is probed first; the remaining search over
/// (m_lo, m_hi] takes at most floor(log2(m_hi - m_lo)) + 1 probes.
TuneResult tune_m(const ExperimentSpec& spec_template, int k, int m_lo, int m_hi, double threshold);

struct SweepSummary {
    bool total_failure = true;
    std::optional<int> best_k;
    std::optional<int> best_m;
    std::optional<double> best_sample_complexity;

    bool operator==(const SweepSummary&) const = default;
};

struct SweepResult {
    nlohmann::json spec;
    std::vector<TuneResult> tunes;
    SweepSummary summary;

    bool operator==(const SweepResult&) const = default;
};

/// tune_m for each k (k > T recorded as skipped). Empty ks -> ValidationError.
SweepResult sweep(const ExperimentSpec& spec_template, const std::vector<int>& ks, int m_lo, int m_hi,
                  double threshold);

}  // namespace qvi
