#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvi/episode.hpp"
#include "qvi/policy.hpp"
#include "qvi/rng.hpp"
#include "qvi/tables.hpp"

namespace qvi {

/// Raised when tensors do not have the declared shapes. Distinct from an
/// invariant violation, which is reported rather than thrown.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct MdpMetadata {
    std::string name;
    std::vector<std::string> labels;
    /// Generator parameters as a JSON object text; empty when unknown.
    std::string params_json;
};

/**
 * Finite-horizon tabular MDP with time-indexed dynamics.
 *
 * Timesteps are 0-based: rewards[t] for t in [0, T), transitions[t] for
 * t in [0, T-1) giving p_t(s' | s, a). Rewards depend on (s, a) only.
 * Dense layouts: rewards[t][s*A + a], transitions[t][(s*A + a)*S + s'].
 */
class TabularMdp {
public:
    TabularMdp() = default;

    /// Checks shapes only; throws StructuralError on mismatch. Call
    /// validate_mdp() for the stochasticity and reward-bound invariants.
    TabularMdp(int horizon, int num_states, int num_actions, std::vector<double> initial_dist,
               std::vector<std::vector<double>> transitions, std::vector<std::vector<double>> rewards,
               MdpMetadata metadata = {});

    int horizon() const { return horizon_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    double initial(int s) const { return initial_[s]; }
    const std::vector<double>& initial_dist() const { return initial_; }

    double reward(int t, int s, int a) const { return rewards_[t][s * num_actions_ + a]; }

    double transition(int t, int s, int a, int next) const {
        return transitions_[t][(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + next];
    }

    /// Successor distribution p_t(. | s, a) as a contiguous row.
    std::span<const double> successors(int t, int s, int a) const {
        return {transitions_[t].data() + (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_,
                static_cast<std::size_t>(num_states_)};
    }

    const std::vector<std::vector<double>>& transitions() const { return transitions_; }
    const std::vector<std::vector<double>>& rewards() const { return rewards_; }
    const MdpMetadata& metadata() const { return metadata_; }
    MdpMetadata& metadata() { return metadata_; }

    /// True when p1 and every transition row are one-hot.
    bool is_deterministic() const;

private:
    int horizon_ = 0;
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> initial_;
    std::vector<std::vector<double>> transitions_;
    std::vector<std::vector<double>> rewards_;
    MdpMetadata metadata_;
};

/// Tolerance for probability-vector sums and reward bounds.
inline constexpr double kStochasticTolerance = 1e-9;

enum class ViolationKind { InitialDistribution, TransitionRow, RewardUpperBound, RewardLowerBound };

struct Violation {
    ViolationKind kind;
    /// First offending index: {t, s, a} for rows, {s} for p1, {} for bounds.
    std::vector<int> index;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

ValidationReport validate_mdp(const TabularMdp& mdp);

/// Draws s_1 ~ p_1, a_t ~ pi_t, s_{t+1} ~ p_t. Pure function of its inputs.
Episode sample_episode(const TabularMdp& mdp, const TimedPolicy& policy, Rng& rng);

/// Q^pi by backward induction.
QTable exact_policy_q(const TabularMdp& mdp, const TimedPolicy& policy);

/// V^pi_t(s) = sum_a pi_t(a|s) Q^pi_t(s,a).
VTable policy_values(const TimedPolicy& policy, const QTable& q);

/// J(pi) = E_{s1 ~ p1}[V^pi_1(s1)].
double exact_return(const TabularMdp& mdp, const TimedPolicy& policy);

/**
 * Two kinds of return extremes.
 *
 * - almost_sure_*: bounds on the realized total reward of any trajectory with
 *   positive probability (successor expectation replaced by max/min over the
 *   support). These are what validate_mdp checks against [0, 1].
 * - worst_policy / best_policy: values of the worst and best deterministic
 *   policies (expectation over successors). best_policy is J*.
 */
struct ReturnExtremes {
    double almost_sure_min = 0.0;
    double almost_sure_max = 0.0;
    double worst_policy = 0.0;
    double best_policy = 0.0;
};

ReturnExtremes return_extremes(const TabularMdp& mdp);

}  // namespace qvi
