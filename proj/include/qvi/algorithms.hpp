#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qvi/episode.hpp"
#include "qvi/oracles.hpp"
#include "qvi/policy.hpp"
#include "qvi/simulator.hpp"

// Learners in this header see environments only through EpisodicSimulator.

namespace qvi {

/// Training and evaluation interaction counts; one episode = T timesteps.
struct SampleLedger {
    std::int64_t training_timesteps = 0;
    std::int64_t training_episodes = 0;
    std::int64_t evaluation_timesteps = 0;
    std::int64_t evaluation_episodes = 0;

    void add_training(std::int64_t episodes, int horizon) {
        training_episodes += episodes;
        training_timesteps += episodes * horizon;
    }
    void add_evaluation(std::int64_t episodes, int horizon) {
        evaluation_episodes += episodes;
        evaluation_timesteps += episodes * horizon;
    }

    bool operator==(const SampleLedger&) const = default;
};

/// Lowest-index action within kTieTolerance of max_a q(s, a).
int greedy_action(const QEstimate& q, int s);

/**
 * Frozen per-timestep greedy deciders followed by uniform-random behavior.
 * Decider t, once frozen, is never modified.
 */
class LearnedPolicy {
public:
    LearnedPolicy(int horizon, int num_actions) : horizon_(horizon), num_actions_(num_actions) {}

    int horizon() const { return horizon_; }
    int num_actions() const { return num_actions_; }
    int num_frozen() const { return static_cast<int>(frozen_.size()); }

    void freeze(QEstimate q);
    const QEstimate& decider(int t) const { return frozen_.at(t); }

    int act(int t, int s, Rng& rng) const {
        return t < num_frozen() ? greedy_action(frozen_[t], s) : rng.uniform_int(num_actions_);
    }

    /// Deterministic on frozen timesteps, uniform elsewhere.
    TimedPolicy to_timed_policy(int num_states) const;

private:
    int horizon_;
    int num_actions_;
    std::vector<QEstimate> frozen_;
};

/**
 * m full episodes: frozen deciders at t < iteration, uniform random at
 * t >= iteration (0-based). Episode j draws from stream (seed, iteration, j),
 * so the batch is a function of the seed and the frozen prefix only.
 * Throws std::runtime_error if the simulator's episode length differs from T.
 */
EpisodeBatch collect_batch(EpisodicSimulator& sim, const LearnedPolicy& learned, int iteration, int m,
                           std::uint64_t seed, SampleLedger& ledger);

struct SqirlConfig {
    int k = 1;
    int m = 1;
    std::uint64_t seed = 0;
};

/// Incremental form of the SQIRL loop; one step() = one iteration.
class SqirlLearner {
public:
    SqirlLearner(EpisodicSimulator& sim, int num_states, const RegressionOracle& oracle, SqirlConfig config);

    bool done() const { return iteration_ >= horizon_; }
    int iteration() const { return iteration_; }
    /// Training timesteps one step() consumes.
    std::int64_t timesteps_per_iteration() const {
        return static_cast<std::int64_t>(config_.m) * horizon_;
    }

    void step();

    const LearnedPolicy& policy() const { return policy_; }
    const SampleLedger& ledger() const { return ledger_; }

private:
    EpisodicSimulator& sim_;
    const RegressionOracle& oracle_;
    SqirlConfig config_;
    int horizon_;
    int iteration_ = 0;
    LearnedPolicy policy_;
    SampleLedger ledger_;
};

struct SqirlResult {
    LearnedPolicy policy;
    SampleLedger ledger;
};

SqirlResult sqirl_train(EpisodicSimulator& sim, int horizon, int num_states, int num_actions, int k, int m,
                        const RegressionOracle& oracle, std::uint64_t seed);

struct GorpConfig {
    int k = 1;
    int m = 1;
    std::uint64_t seed = 0;
};

/// Incremental GORP; one step() learns one action.
class GorpLearner {
public:
    GorpLearner(EpisodicSimulator& sim, GorpConfig config);

    bool done() const { return static_cast<int>(actions_.size()) >= horizon_; }
    int iteration() const { return static_cast<int>(actions_.size()); }
    /// Training timesteps the next step() consumes (A^L * m * T, L = lookahead truncated at T).
    std::int64_t timesteps_next_iteration() const;

    void step();

    const std::vector<int>& actions() const { return actions_; }
    const SampleLedger& ledger() const { return ledger_; }
    bool stochastic_warning() const { return stochastic_; }

    /// Open-loop learned prefix, uniform random after it.
    int act(int t, Rng& rng) const {
        return t < iteration() ? actions_[t] : rng.uniform_int(num_actions_);
    }

private:
    EpisodicSimulator& sim_;
    GorpConfig config_;
    int horizon_;
    int num_actions_;
    std::vector<int> actions_;
    SampleLedger ledger_;
    bool stochastic_ = false;
};

struct GorpResult {
    std::vector<int> actions;
    SampleLedger ledger;
    /// Episodes sharing a prefix and sequence reached different states.
    bool stochastic_warning = false;
};

GorpResult gorp_train(EpisodicSimulator& sim, int horizon, int num_actions, int k, int m, std::uint64_t seed);

/// Monte Carlo return statistics of a controller (not counted as training).
struct EvaluationResult {
    double mean = 0.0;
    double stddev = 0.0;
    int episodes = 0;
};

using Controller = std::function<int(int t, int s, Rng& rng)>;

EvaluationResult evaluate_controller(EpisodicSimulator& sim, const Controller& controller, int episodes,
                                     std::uint64_t seed, SampleLedger& ledger);

}  // namespace qvi
