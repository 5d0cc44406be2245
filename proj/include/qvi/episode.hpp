#pragma once

#include <vector>

namespace qvi {

/// One rollout of exactly T steps.
struct Episode {
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> rewards;

    int length() const { return static_cast<int>(rewards.size()); }

    /// Sum of rewards from timestep t (0-based) to the end.
    double reward_to_go(int t) const;

    double total_reward() const { return reward_to_go(0); }

    bool operator==(const Episode&) const = default;
};

/// Episodes collected at one learner iteration.
struct EpisodeBatch {
    int iteration = 0;
    std::vector<Episode> episodes;

    int size() const { return static_cast<int>(episodes.size()); }

    bool operator==(const EpisodeBatch&) const = default;
};

}  // namespace qvi
