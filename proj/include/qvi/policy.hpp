#pragma once

#include <span>
#include <vector>

namespace qvi {

/**
 * Time-indexed policy. Each timestep is either a deterministic state->action
 * map or the uniform-random rule; prefixes of deterministic steps followed by
 * uniform suffixes are how partially trained learners are represented.
 */
class TimedPolicy {
public:
    TimedPolicy() = default;

    static TimedPolicy uniform(int horizon, int num_actions);

    /// Same action at every state and timestep position of `actions`.
    static TimedPolicy open_loop(std::span<const int> actions, int horizon, int num_states,
                                 int num_actions);

    int horizon() const { return static_cast<int>(steps_.size()); }
    int num_actions() const { return num_actions_; }

    bool is_uniform(int t) const { return steps_[t].empty(); }

    /// Deterministic action at (t, s). Only valid when !is_uniform(t).
    int action(int t, int s) const { return steps_[t][s]; }

    /// pi_t(a | s).
    double prob(int t, int s, int a) const {
        if (is_uniform(t)) return 1.0 / num_actions_;
        return steps_[t][s] == a ? 1.0 : 0.0;
    }

    void set_uniform(int t) { steps_[t].clear(); }
    void set_deterministic(int t, std::vector<int> actions) { steps_[t] = std::move(actions); }

    /// Throws std::invalid_argument if any deterministic entry is outside [0, A)
    /// or a deterministic map does not cover `num_states` states.
    void check(int num_states) const;

private:
    TimedPolicy(int horizon, int num_actions) : num_actions_(num_actions), steps_(horizon) {}

    int num_actions_ = 0;
    // Empty vector = uniform random at that timestep.
    std::vector<std::vector<int>> steps_;
};

}  // namespace qvi
