#pragma once

#include "qvi/mdp.hpp"
#include "qvi/simulator.hpp"

namespace qvi {

/// Simulator backed by an explicit model. Holds a copy so it can outlive the source.
class TabularSimulator final : public EpisodicSimulator {
public:
    explicit TabularSimulator(TabularMdp mdp) : mdp_(std::move(mdp)) {}

    int horizon() const override { return mdp_.horizon(); }
    int num_actions() const override { return mdp_.num_actions(); }
    int num_states() const { return mdp_.num_states(); }

    std::unique_ptr<EpisodicSimulator> clone() const override {
        return std::make_unique<TabularSimulator>(mdp_);
    }

protected:
    int do_reset(Rng& rng) override {
        t_ = 0;
        state_ = rng.categorical(mdp_.initial_dist());
        return state_;
    }

    StepResult do_step(int action, Rng& rng) override {
        StepResult r;
        r.reward = mdp_.reward(t_, state_, action);
        if (t_ + 1 < mdp_.horizon()) {
            state_ = rng.categorical(mdp_.successors(t_, state_, action));
            r.state = state_;
        } else {
            r.done = true;
        }
        ++t_;
        return r;
    }

private:
    TabularMdp mdp_;
    int t_ = 0;
    int state_ = 0;
};

}  // namespace qvi
