#include "qvi/policy.hpp"

#include <stdexcept>
#include <string>

namespace qvi {

TimedPolicy TimedPolicy::uniform(int horizon, int num_actions) {
    if (horizon < 1 || num_actions < 1) throw std::invalid_argument("TimedPolicy: bad dimensions");
    return TimedPolicy(horizon, num_actions);
}

TimedPolicy TimedPolicy::open_loop(std::span<const int> actions, int horizon, int num_states,
                                   int num_actions) {
    auto p = uniform(horizon, num_actions);
    for (std::size_t t = 0; t < actions.size() && static_cast<int>(t) < horizon; ++t)
        p.set_deterministic(static_cast<int>(t), std::vector<int>(num_states, actions[t]));
    p.check(num_states);
    return p;
}

void TimedPolicy::check(int num_states) const {
    for (std::size_t t = 0; t < steps_.size(); ++t) {
        if (steps_[t].empty()) continue;
        if (static_cast<int>(steps_[t].size()) != num_states)
            throw std::invalid_argument("TimedPolicy: step " + std::to_string(t) + " covers " +
                                        std::to_string(steps_[t].size()) + " states, expected " +
                                        std::to_string(num_states));
        for (int a : steps_[t])
            if (a < 0 || a >= num_actions_)
                throw std::invalid_argument("TimedPolicy: action " + std::to_string(a) +
                                            " out of range at step " + std::to_string(t));
    }
}

}  // namespace qvi
