#pragma once

#include <cstdint>
#include <vector>

#include "qvi/mdp.hpp"

namespace qvi {

/**
 * Chain of positions 0..L (S = L + 1), horizon T = L, start at 0.
 * Action 0 advances with probability 1 - slip (stays otherwise); taking
 * action 0 at position L-1 pays `terminal_reward` and enters the absorbing
 * end position L. Action 1 stays and pays decoys[t] at any position < L.
 * `decoys` must have length L (missing entries are zero).
 */
TabularMdp make_chain(int length, double slip, double terminal_reward, std::vector<double> decoys);

/**
 * Random MDP: Dirichlet(1) initial distribution and transition rows; each
 * reward entry is nonzero with probability `reward_fraction` (uniform
 * value), then all rewards are rescaled so the largest achievable total is
 * exactly 1. reward_fraction = 0 gives all-zero rewards.
 */
TabularMdp make_random_mdp(int num_states, int num_actions, int horizon, double reward_fraction,
                           std::uint64_t seed);

/// Random MDP with one-hot initial state and one-hot transitions.
TabularMdp make_random_deterministic_mdp(int num_states, int num_actions, int horizon, double reward_fraction,
                                         std::uint64_t seed);

inline constexpr double kDefaultStickyProbability = 0.25;

/**
 * Sticky-action augmentation. States become (s, m) with m the previously
 * executed action or none (m = A) at the first step; index s * (A + 1) + m.
 * With prev = m != none, the executed action is m with probability p and the
 * chosen action otherwise. Reward is the expectation over the executed
 * action; the successor records the executed action.
 * Throws std::length_error when the dense augmented model exceeds the size guard.
 */
TabularMdp sticky_transform(const TabularMdp& mdp, double p_sticky = kDefaultStickyProbability);

/// Base state of an augmented sticky state index.
inline int sticky_base_state(int augmented, int num_actions) { return augmented / (num_actions + 1); }
/// Memory component (A = none).
inline int sticky_memory(int augmented, int num_actions) { return augmented % (num_actions + 1); }

/**
 * Needle: reward 1 only for playing action A-1 at every one of T steps.
 * Deviating at t < T-1 moves to a decoy state paying c per remaining step,
 * with c chosen so every lookahead depth below T prefers deviating at the
 * first step while the needle stays optimal; the minimum solvable k is T.
 * States: 0 = on the needle, 1 = decoy.
 */
TabularMdp make_needle(int horizon, int num_actions);

/// Decoy reward per step used by make_needle.
double needle_decoy_reward(int horizon, int num_actions);

/**
 * Two-step bridge used throughout the tests. States s0 = 0, sA = 1, sB = 2;
 * s0 -a0-> sA, s0 -a1-> sB; R_2(sA) = [0.8, 0.2], R_2(sB) = second_row.
 * Off-path states self-loop with tied rewards. Default second_row [0.1, 0.4]
 * is 2- but not 1-QVI-solvable; [0.1, 0.2] is 1-QVI-solvable.
 */
TabularMdp make_reference_mdp(double b0 = 0.1, double b1 = 0.4);

}  // namespace qvi
