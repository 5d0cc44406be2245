#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvi/episode.hpp"
#include "qvi/tables.hpp"

namespace qvi {

struct RegressionSample {
    int state = 0;
    int action = 0;
    double target = 0.0;
};

/**
 * Labeled samples for one regression call. `timestep` and `depth` are
 * bookkeeping tags: depth 1 means Monte Carlo reward-to-go targets (an
 * estimate of Q^1), depth d > 1 means bootstrapped targets for Q^d.
 */
struct RegressionDataset {
    int timestep = 0;
    int depth = 1;
    std::vector<RegressionSample> samples;

    int size() const { return static_cast<int>(samples.size()); }
};

/// Fitted map (s, a) -> [0, 1], materialized densely over the finite S x A grid.
class QEstimate {
public:
    QEstimate() = default;
    QEstimate(int num_states, int num_actions, std::vector<double> values);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    double value(int s, int a) const { return values_[static_cast<std::size_t>(s) * num_actions_ + a]; }
    std::span<const double> row(int s) const {
        return {values_.data() + static_cast<std::size_t>(s) * num_actions_,
                static_cast<std::size_t>(num_actions_)};
    }
    double max_value(int s) const;
    const std::vector<double>& values() const { return values_; }

    int timestep = -1;
    int depth = 0;
    /// Fitted with no samples at all.
    bool empty_data = false;
    /// Normal equations were singular; the minimum-norm solution was used.
    bool used_pseudo_inverse = false;
    /// Linear weights, when the estimate came from a linear oracle.
    std::vector<double> weights;

private:
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> values_;
};

/// Feature map phi(s, a) in R^d over a finite state-action grid.
class FeatureMap {
public:
    FeatureMap(int num_states, int num_actions, int dim, std::vector<double> table);

    /// Indicator of the (s, a) pair; d = S * A. Makes linear regression tabular.
    static FeatureMap one_hot(int num_states, int num_actions);
    /// State indicator concatenated with action indicator; d = S + A.
    static FeatureMap state_and_action(int num_states, int num_actions);
    /// {"num_states", "num_actions", "dim", "features": [S][A][d]}.
    static FeatureMap from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int dim() const { return dim_; }

    std::span<const double> operator()(int s, int a) const {
        return {table_.data() + (static_cast<std::size_t>(s) * num_actions_ + a) * dim_,
                static_cast<std::size_t>(dim_)};
    }

private:
    int num_states_;
    int num_actions_;
    int dim_;
    std::vector<double> table_;
};

/// Per-cell mean of targets; unseen cells take `unseen_value`; clipped to [0, 1].
QEstimate tabular_mean_regress(const RegressionDataset& data, int num_states, int num_actions,
                               double unseen_value = 0.0);

/// Ridge least squares w = argmin sum (w.phi - y)^2 + lambda |w|^2, predictions clipped.
QEstimate linear_lsq_regress(const RegressionDataset& data, const FeatureMap& features, double lambda);

/// Interface consumed by the learners: samples in, bounded Q-estimate out.
class RegressionOracle {
public:
    virtual ~RegressionOracle() = default;
    virtual QEstimate fit(const RegressionDataset& data) const = 0;
    virtual std::string name() const = 0;
    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;
};

class TabularMeanOracle final : public RegressionOracle {
public:
    TabularMeanOracle(int num_states, int num_actions, double unseen_value = 0.0)
        : num_states_(num_states), num_actions_(num_actions), unseen_value_(unseen_value) {}

    QEstimate fit(const RegressionDataset& data) const override {
        return tabular_mean_regress(data, num_states_, num_actions_, unseen_value_);
    }
    std::string name() const override { return "tabular"; }
    int num_states() const override { return num_states_; }
    int num_actions() const override { return num_actions_; }

private:
    int num_states_;
    int num_actions_;
    double unseen_value_;
};

inline constexpr double kDefaultRidge = 1e-6;

class LinearLsqOracle final : public RegressionOracle {
public:
    explicit LinearLsqOracle(FeatureMap features, double lambda = kDefaultRidge)
        : features_(std::move(features)), lambda_(lambda) {}

    QEstimate fit(const RegressionDataset& data) const override {
        return linear_lsq_regress(data, features_, lambda_);
    }
    std::string name() const override { return "linear"; }
    int num_states() const override { return features_.num_states(); }
    int num_actions() const override { return features_.num_actions(); }
    double lambda() const { return lambda_; }

private:
    FeatureMap features_;
    double lambda_;
};

/**
 * Infinite-sample limit: ignores the samples and returns the exact Q^depth at
 * the dataset's timestep from a precomputed sequence [Q^1, ..., Q^K].
 */
class ExactQOracle final : public RegressionOracle {
public:
    explicit ExactQOracle(std::vector<QTable> sequence);

    QEstimate fit(const RegressionDataset& data) const override;
    std::string name() const override { return "exact"; }
    int num_states() const override { return sequence_.front().num_states(); }
    int num_actions() const override { return sequence_.front().num_actions(); }

private:
    std::vector<QTable> sequence_;
};

/// Records (s_t, a_t, clip(sum_{u >= t} r_u)) from every episode.
RegressionDataset monte_carlo_targets(const EpisodeBatch& batch, int t);

/// Records (s_t, a_t, clip(r_t + max_a next_q(s_{t+1}, a))). Throws
/// std::invalid_argument when t is the last timestep (no successor).
RegressionDataset fqi_targets(const EpisodeBatch& batch, int t, const QEstimate& next_q);

inline double clip01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace qvi
