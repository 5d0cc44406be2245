#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>

#include "qvi/rng.hpp"

namespace qvi {

struct StepResult {
    int state = 0;  // successor; meaningless when done
    double reward = 0.0;
    bool done = false;
};

/**
 * Episodic sampler: the only view of an environment the learners get.
 * Randomness comes from the caller's generator so each episode can own a
 * stream. Every served step is counted.
 */
class EpisodicSimulator {
public:
    virtual ~EpisodicSimulator() = default;

    virtual int horizon() const = 0;
    virtual int num_actions() const = 0;

    int reset(Rng& rng) {
        in_episode_ = true;
        return do_reset(rng);
    }

    StepResult step(int action, Rng& rng) {
        if (!in_episode_) throw std::logic_error("step() called outside an episode");
        if (action < 0 || action >= num_actions()) throw std::out_of_range("action out of range");
        ++steps_served_;
        auto r = do_step(action, rng);
        if (r.done) in_episode_ = false;
        return r;
    }

    std::int64_t steps_served() const { return steps_served_; }

    virtual std::unique_ptr<EpisodicSimulator> clone() const = 0;

protected:
    virtual int do_reset(Rng& rng) = 0;
    virtual StepResult do_step(int action, Rng& rng) = 0;

private:
    std::int64_t steps_served_ = 0;
    bool in_episode_ = false;
};

}  // namespace qvi
