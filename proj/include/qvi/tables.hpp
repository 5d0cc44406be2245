#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qvi {

/// Time-indexed action values Q_t(s, a), stored dense as [t][s][a].
class QTable {
public:
    QTable() = default;
    QTable(int horizon, int num_states, int num_actions, double fill = 0.0)
        : horizon_(horizon), num_states_(num_states), num_actions_(num_actions),
          data_(static_cast<std::size_t>(horizon) * num_states * num_actions, fill) {}

    int horizon() const { return horizon_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    double& operator()(int t, int s, int a) { return data_[index(t, s, a)]; }
    double operator()(int t, int s, int a) const { return data_[index(t, s, a)]; }

    std::span<double> row(int t, int s) {
        return {data_.data() + index(t, s, 0), static_cast<std::size_t>(num_actions_)};
    }
    std::span<const double> row(int t, int s) const {
        return {data_.data() + index(t, s, 0), static_cast<std::size_t>(num_actions_)};
    }

    double max_value(int t, int s) const;

    const std::vector<double>& data() const { return data_; }

    bool same_shape(const QTable& other) const {
        return horizon_ == other.horizon_ && num_states_ == other.num_states_ &&
               num_actions_ == other.num_actions_;
    }

private:
    std::size_t index(int t, int s, int a) const {
        return (static_cast<std::size_t>(t) * num_states_ + s) * num_actions_ + a;
    }

    int horizon_ = 0;
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> data_;
};

/// Time-indexed state values V_t(s).
class VTable {
public:
    VTable() = default;
    VTable(int horizon, int num_states, double fill = 0.0)
        : horizon_(horizon), num_states_(num_states),
          data_(static_cast<std::size_t>(horizon) * num_states, fill) {}

    int horizon() const { return horizon_; }
    int num_states() const { return num_states_; }

    double& operator()(int t, int s) { return data_[static_cast<std::size_t>(t) * num_states_ + s]; }
    double operator()(int t, int s) const { return data_[static_cast<std::size_t>(t) * num_states_ + s]; }

private:
    int horizon_ = 0;
    int num_states_ = 0;
    std::vector<double> data_;
};

/// Absolute tolerance used for argmax ties everywhere in the library.
inline constexpr double kTieTolerance = 1e-9;

/// Actions whose value is within kTieTolerance of the row maximum.
std::vector<int> argmax_set(std::span<const double> values, double tol = kTieTolerance);

/// Lowest-index action attaining the maximum within tolerance.
int argmax_lowest(std::span<const double> values, double tol = kTieTolerance);

}  // namespace qvi
