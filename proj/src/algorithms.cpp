#include "qvi/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qvi {

int greedy_action(const QEstimate& q, int s) { return argmax_lowest(q.row(s)); }

void LearnedPolicy::freeze(QEstimate q) {
    if (num_frozen() >= horizon_) throw std::logic_error("LearnedPolicy: every timestep is already frozen");
    if (q.num_actions() != num_actions_) throw std::invalid_argument("LearnedPolicy: action count mismatch");
    frozen_.push_back(std::move(q));
}

TimedPolicy LearnedPolicy::to_timed_policy(int num_states) const {
    auto policy = TimedPolicy::uniform(horizon_, num_actions_);
    for (int t = 0; t < num_frozen(); ++t) {
        std::vector<int> actions(num_states);
        for (int s = 0; s < num_states; ++s) actions[s] = greedy_action(frozen_[t], s);
        policy.set_deterministic(t, std::move(actions));
    }
    return policy;
}

namespace {

// Stream tags keep training, GORP and evaluation draws disjoint.
constexpr std::uint64_t kCollectStream = 10;
constexpr std::uint64_t kGorpStream = 20;
constexpr std::uint64_t kEvalStream = 30;

}  // namespace

EpisodeBatch collect_batch(EpisodicSimulator& sim, const LearnedPolicy& learned, int iteration, int m,
                           std::uint64_t seed, SampleLedger& ledger) {
    const int T = sim.horizon();
    if (learned.horizon() != T) throw std::invalid_argument("collect_batch: policy horizon differs from simulator");
    if (iteration < 0 || iteration >= T) throw std::out_of_range("collect_batch: iteration outside [0, T)");
    if (m < 1) throw std::invalid_argument("collect_batch: m must be positive");
    if (learned.num_frozen() < iteration)
        throw std::logic_error("collect_batch: fewer frozen deciders than the iteration index");

    EpisodeBatch batch;
    batch.iteration = iteration;
    batch.episodes.reserve(m);
    for (int j = 0; j < m; ++j) {
        Rng rng(seed, {kCollectStream, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(j)});
        Episode ep;
        ep.states.reserve(T);
        ep.actions.reserve(T);
        ep.rewards.reserve(T);
        int s = sim.reset(rng);
        for (int t = 0; t < T; ++t) {
            const int a = t < iteration ? greedy_action(learned.decider(t), s) : rng.uniform_int(sim.num_actions());
            const auto r = sim.step(a, rng);
            ep.states.push_back(s);
            ep.actions.push_back(a);
            ep.rewards.push_back(r.reward);
            if (r.done != (t + 1 == T))
                throw std::runtime_error("simulator episode length differs from horizon " + std::to_string(T) +
                                         " (done=" + std::to_string(r.done) + " at step " + std::to_string(t) + ")");
            s = r.state;
        }
        batch.episodes.push_back(std::move(ep));
    }
    ledger.add_training(m, T);
    return batch;
}

SqirlLearner::SqirlLearner(EpisodicSimulator& sim, int num_states, const RegressionOracle& oracle,
                           SqirlConfig config)
    : sim_(sim),
      oracle_(oracle),
      config_(config),
      horizon_(sim.horizon()),
      policy_(sim.horizon(), sim.num_actions()) {
    if (config_.k < 1 || config_.k > horizon_)
        throw std::out_of_range("SQIRL: k = " + std::to_string(config_.k) + " outside [1, T]");
    if (config_.m < 1) throw std::invalid_argument("SQIRL: m must be positive");
    if (oracle.num_states() != num_states || oracle.num_actions() != sim.num_actions())
        throw std::invalid_argument("SQIRL: oracle state-action grid does not match the environment");
}

void SqirlLearner::step() {
    if (done()) throw std::logic_error("SQIRL: training already complete");
    const int i = iteration_;
    const auto batch = collect_batch(sim_, policy_, i, config_.m, config_.seed, ledger_);

    // Lookahead truncates at the horizon.
    const int top = std::min(i + config_.k - 1, horizon_ - 1);
    auto fit = [&](const RegressionDataset& data) {
        try {
            return oracle_.fit(data);
        } catch (const std::exception& e) {
            throw std::runtime_error("SQIRL iteration " + std::to_string(i) + ", timestep " +
                                     std::to_string(data.timestep) + ": " + e.what());
        }
    };
    QEstimate q = fit(monte_carlo_targets(batch, top));
    for (int t = top - 1; t >= i; --t) q = fit(fqi_targets(batch, t, q));
    policy_.freeze(std::move(q));
    ++iteration_;
}

SqirlResult sqirl_train(EpisodicSimulator& sim, int horizon, int num_states, int num_actions, int k, int m,
                        const RegressionOracle& oracle, std::uint64_t seed) {
    if (horizon != sim.horizon() || num_actions != sim.num_actions())
        throw std::invalid_argument("sqirl_train: declared T or A differs from the simulator");
    SqirlLearner learner(sim, num_states, oracle, {k, m, seed});
    while (!learner.done()) learner.step();
    return {learner.policy(), learner.ledger()};
}

GorpLearner::GorpLearner(EpisodicSimulator& sim, GorpConfig config)
    : sim_(sim), config_(config), horizon_(sim.horizon()), num_actions_(sim.num_actions()) {
    if (config_.k < 1 || config_.k > horizon_)
        throw std::out_of_range("GORP: k = " + std::to_string(config_.k) + " outside [1, T]");
    if (config_.m < 1) throw std::invalid_argument("GORP: m must be positive");
}

std::int64_t GorpLearner::timesteps_next_iteration() const {
    const int len = std::min(config_.k, horizon_ - iteration());
    std::int64_t sequences = 1;
    for (int l = 0; l < len; ++l) sequences *= num_actions_;
    return sequences * config_.m * horizon_;
}

void GorpLearner::step() {
    if (done()) throw std::logic_error("GORP: training already complete");
    const int i = iteration();
    const int T = horizon_, A = num_actions_;
    const int len = std::min(config_.k, T - i);
    std::int64_t sequences = 1;
    for (int l = 0; l < len; ++l) sequences *= A;

    std::vector<int> seq(len);
    double best = -std::numeric_limits<double>::infinity();
    int best_first = 0;
    for (std::int64_t code = 0; code < sequences; ++code) {
        // Lexicographic order: first action is the most significant digit.
        std::int64_t rest = code;
        for (int l = len - 1; l >= 0; --l) {
            seq[l] = static_cast<int>(rest % A);
            rest /= A;
        }
        double total = 0.0;
        std::vector<int> first_path;
        for (int j = 0; j < config_.m; ++j) {
            Rng rng(config_.seed, {kGorpStream, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(code),
                                   static_cast<std::uint64_t>(j)});
            std::vector<int> path;
            int s = sim_.reset(rng);
            path.push_back(s);
            double ret = 0.0;
            for (int t = 0; t < T; ++t) {
                int a;
                if (t < i) a = actions_[t];
                else if (t < i + len) a = seq[t - i];
                else a = rng.uniform_int(A);
                const auto r = sim_.step(a, rng);
                if (r.done != (t + 1 == T))
                    throw std::runtime_error("simulator episode length differs from horizon " + std::to_string(T));
                if (t >= i) ret += r.reward;
                s = r.state;
                if (!r.done && t + 1 <= i + len) path.push_back(s);
            }
            if (j == 0) first_path = path;
            else if (path != first_path) stochastic_ = true;
            total += ret;
        }
        ledger_.add_training(config_.m, T);
        const double mean = total / config_.m;
        if (mean > best + kTieTolerance) {
            best = mean;
            best_first = seq[0];
        }
    }
    actions_.push_back(best_first);
}

GorpResult gorp_train(EpisodicSimulator& sim, int horizon, int num_actions, int k, int m, std::uint64_t seed) {
    if (horizon != sim.horizon() || num_actions != sim.num_actions())
        throw std::invalid_argument("gorp_train: declared T or A differs from the simulator");
    GorpLearner learner(sim, {k, m, seed});
    while (!learner.done()) learner.step();
    return {learner.actions(), learner.ledger(), learner.stochastic_warning()};
}

EvaluationResult evaluate_controller(EpisodicSimulator& sim, const Controller& controller, int episodes,
                                     std::uint64_t seed, SampleLedger& ledger) {
    if (episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
    const int T = sim.horizon();
    // Welford accumulation: constant returns give exactly zero spread.
    double mean = 0.0, m2 = 0.0;
    for (int j = 0; j < episodes; ++j) {
        Rng rng(seed, {kEvalStream, static_cast<std::uint64_t>(j)});
        int s = sim.reset(rng);
        double ret = 0.0;
        for (int t = 0; t < T; ++t) {
            const auto r = sim.step(controller(t, s, rng), rng);
            ret += r.reward;
            s = r.state;
        }
        const double delta = ret - mean;
        mean += delta / (j + 1);
        m2 += delta * (ret - mean);
    }
    ledger.add_evaluation(episodes, T);
    EvaluationResult out;
    out.episodes = episodes;
    out.mean = mean;
    const double var = episodes > 1 ? m2 / (episodes - 1) : 0.0;
    out.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
    return out;
}

}  // namespace qvi
