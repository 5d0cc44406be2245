#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvi/analysis.hpp"
#include "qvi/harness.hpp"

namespace qvi {

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const TuneResult& tune);
TuneResult tune_result_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SweepResult& result);
SweepResult sweep_result_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const HorizonReport& report);

/// Column order of the flat run table.
inline const std::vector<std::string> kRunColumns{
    "env", "algo", "k", "m", "seed", "solved", "sample_complexity", "final_return", "optimal_return",
    "training_timesteps", "num_evaluations", "suspicious", "budget_exhausted"};

/// Column order of the learning-curve table.
inline const std::vector<std::string> kCurveColumns{"env", "algo", "k", "m", "seed", "timesteps", "mean_return",
                                                   "std_return", "exact_return", "optimal_return", "solved"};

/// Column order of the per-MDP analysis table.
inline const std::vector<std::string> kAnalysisColumns{"env", "num_states", "num_actions", "horizon",
                                                      "min_exact_k", "min_approx_k", "h_bar", "optimal_return"};

void write_runs_csv(const std::vector<RunRecord>& records, std::ostream& out, bool header = true);
void write_curves_csv(const std::vector<RunRecord>& records, std::ostream& out, bool header = true);
void write_analysis_csv_row(const std::string& env, const TabularMdp& mdp, const HorizonReport& report,
                            std::ostream& out);

/// Every run record in a results document (sweep, tune, or run list).
std::vector<RunRecord> collect_records(const nlohmann::json& doc);

/// FNV-1a digest of the document with every "wall_clock_seconds" field removed.
std::uint64_t results_digest(const nlohmann::json& doc);

}  // namespace qvi
