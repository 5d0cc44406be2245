#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qvi/mdp.hpp"

namespace qvi {

/// One Bellman-optimality backup: Q'_t = R_t + E[max_a Q_{t+1}], Q'_T = R_T.
QTable qvi_step(const TabularMdp& mdp, const QTable& q);

/// [Q^1, ..., Q^{k_max}] with Q^1 the uniform-random policy's Q-function.
std::vector<QTable> q_sequence(const TabularMdp& mdp, int k_max);

QTable optimal_q(const TabularMdp& mdp);

/// J* = sum_s p1(s) max_a Q*_1(s, a).
double optimal_return(const TabularMdp& mdp);

/// Which (t, s) pairs a solvability verdict or gap quantifies over.
enum class StateScope {
    /// Pairs reachable from supp(p1) by some policy greedy w.r.t. Q^k.
    GreedyReachable,
    /// Every (t, s) in the table.
    AllStates,
};

std::string to_string(StateScope scope);

/// reachable[t][s]: forward reachability expanding every tolerance-argmax
/// action of `q` at each visited (t, s).
std::vector<std::vector<bool>> greedy_reachable(const TabularMdp& mdp, const QTable& q);

/// Every greedy policy on Q^k is optimal (argmax Q^k within argmax Q* on the scope).
bool is_k_qvi_solvable(const TabularMdp& mdp, int k, StateScope scope = StateScope::GreedyReachable);

/// Same check against a precomputed Q^k and Q*.
bool is_greedy_optimal(const TabularMdp& mdp, const QTable& qk, const QTable& qstar, StateScope scope);

struct GapResult {
    bool solvable = false;
    /// nullopt encodes the +infinity sentinel (not solvable, or every
    /// in-scope pair had all actions tied).
    std::optional<double> gap;
    int skipped_pairs = 0;
};

/// k-gap. Solvability is decided with `solvability_scope`, the infimum taken
/// over `gap_scope`. Throws std::out_of_range for k outside [1, T].
GapResult k_gap(const TabularMdp& mdp, int k, StateScope gap_scope = StateScope::AllStates,
                StateScope solvability_scope = StateScope::GreedyReachable);

/// Gap of a given table over a mask; pairs with all actions tied are skipped.
GapResult table_gap(const QTable& qk, const std::vector<std::vector<bool>>* mask);

/// Value of the greedy policy on `qk` that, among tied argmax actions, picks
/// the one minimizing its continuation value.
double pessimal_greedy_return(const TabularMdp& mdp, const QTable& qk);

struct HorizonEntry {
    int k = 0;
    bool qvi_solvable = false;
    bool approx_solvable = false;
    double pessimal_return = 0.0;
    std::optional<double> gap;  // nullopt = +infinity sentinel
    /// +infinity when not solvable.
    double h_bar = 0.0;
    /// Gap >= 1 was clamped to 1 (log term would be negative).
    bool gap_clamped = false;
    /// Gap sentinel due to every in-scope pair being tied.
    bool all_ties = false;
    int skipped_pairs = 0;
};

struct HorizonOptions {
    int k_max = 1;
    double approx_threshold = 0.95;
    StateScope solvability_scope = StateScope::GreedyReachable;
    StateScope gap_scope = StateScope::AllStates;
};

struct HorizonReport {
    std::vector<HorizonEntry> entries;
    std::optional<int> min_exact_k;
    std::optional<int> min_approx_k;
    /// min_k H_bar_k; +infinity if no k in range is solvable.
    double h_bar = 0.0;
    double optimal_return = 0.0;
    double worst_return = 0.0;
    double approx_threshold = 0.0;
    StateScope solvability_scope = StateScope::GreedyReachable;
    StateScope gap_scope = StateScope::AllStates;
    int num_actions = 0;
};

/// H_bar_k = k + log_A(1 / gap^2); k when the gap is the sentinel or >= 1.
double h_bar_from_gap(int k, std::optional<double> gap, int num_actions, bool* clamped = nullptr);

HorizonReport effective_horizon(const TabularMdp& mdp, const HorizonOptions& options);

}  // namespace qvi
