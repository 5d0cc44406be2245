#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qvi/mdp.hpp"
#include "qvi/oracles.hpp"

namespace qvi {

struct ComplianceOptions {
    /// Timestep (0-based) whose Q^1 is regressed. The FQI check needs t < T-1.
    int timestep = 0;
    /// Strictly increasing sample sizes.
    std::vector<int> sizes{250, 1000, 4000, 16000};
    int trials = 20;
    std::uint64_t seed = 0;
    bool check_fqi = true;
    /// Perturbation scales for the FQI propagation fit.
    std::vector<double> epsilons{0.0, 0.05, 0.1, 0.2, 0.3};
};

struct SizeEntry {
    int m = 0;
    double median_mse = 0.0;
    double mean_mse = 0.0;
    std::vector<double> trial_mse;
};

struct PerturbationPoint {
    double epsilon = 0.0;
    /// Mean over trials of the in-distribution RMS error of the perturbed V.
    double v_rms = 0.0;
    /// Mean over trials of the in-distribution RMS error of the fitted Q vs Q^2_t.
    double q_rms = 0.0;
};

struct ComplianceReport {
    std::string oracle;
    int timestep = 0;
    std::vector<SizeEntry> sizes;
    /// Least-squares slope and intercept of log(median MSE) against log(m).
    double slope = 0.0;
    double log_intercept = 0.0;
    /// max_m median_mse * m / log(m): empirical constant of the O(log m / m) bound.
    double c_f = 0.0;

    bool has_fqi = false;
    int fqi_m = 0;
    std::string perturbation_family;
    std::vector<PerturbationPoint> points;
    /// q_rms ~= alpha * v_rms + intercept.
    double alpha = 0.0;
    double intercept = 0.0;
    /// intercept^2 * m / log(m) at fqi_m.
    double c_g = 0.0;
    /// RMS error of the unperturbed FQI regression (epsilon = 0 point).
    double rms_at_zero = 0.0;
};

/// State distribution d_t(s) of the uniform-random policy, for every t.
std::vector<std::vector<double>> random_policy_state_distribution(const TabularMdp& mdp);

/// E_{s~dist, a~U}[(qhat(s,a) - q_t(s,a))^2].
double in_distribution_mse(const QEstimate& qhat, const QTable& q, int t, const std::vector<double>& dist);

/// Empirical check of the regression and FQI conditions for `oracle`.
/// Throws std::invalid_argument for non-increasing sizes or a bad timestep.
ComplianceReport compliance_check(const RegressionOracle& oracle, const TabularMdp& mdp,
                                  const ComplianceOptions& options);

}  // namespace qvi
