#include "qvi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qvi {

namespace {

std::string shape_message(const std::string& what, std::size_t got, std::size_t expected) {
    std::ostringstream os;
    os << what << ": got " << got << " entries, expected " << expected;
    return os.str();
}

}  // namespace

TabularMdp::TabularMdp(int horizon, int num_states, int num_actions, std::vector<double> initial_dist,
                       std::vector<std::vector<double>> transitions,
                       std::vector<std::vector<double>> rewards, MdpMetadata metadata)
    : horizon_(horizon),
      num_states_(num_states),
      num_actions_(num_actions),
      initial_(std::move(initial_dist)),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      metadata_(std::move(metadata)) {
    if (horizon_ < 1) throw StructuralError("horizon must be positive");
    if (num_states_ < 1) throw StructuralError("num_states must be positive");
    if (num_actions_ < 2) throw StructuralError("num_actions must be at least 2");
    const auto S = static_cast<std::size_t>(num_states_);
    const auto A = static_cast<std::size_t>(num_actions_);
    if (initial_.size() != S) throw StructuralError(shape_message("initial_dist", initial_.size(), S));
    if (rewards_.size() != static_cast<std::size_t>(horizon_))
        throw StructuralError(shape_message("rewards (timesteps)", rewards_.size(), horizon_));
    if (transitions_.size() != static_cast<std::size_t>(horizon_ - 1))
        throw StructuralError(shape_message("transitions (timesteps)", transitions_.size(), horizon_ - 1));
    for (std::size_t t = 0; t < rewards_.size(); ++t)
        if (rewards_[t].size() != S * A)
            throw StructuralError(shape_message("rewards[" + std::to_string(t) + "]", rewards_[t].size(), S * A));
    for (std::size_t t = 0; t < transitions_.size(); ++t)
        if (transitions_[t].size() != S * A * S)
            throw StructuralError(
                shape_message("transitions[" + std::to_string(t) + "]", transitions_[t].size(), S * A * S));
}

bool TabularMdp::is_deterministic() const {
    auto one_hot = [](std::span<const double> row) {
        int ones = 0;
        for (double p : row) {
            if (p == 1.0) ++ones;
            else if (p != 0.0) return false;
        }
        return ones == 1;
    };
    if (!one_hot(initial_)) return false;
    for (int t = 0; t + 1 < horizon_; ++t)
        for (int s = 0; s < num_states_; ++s)
            for (int a = 0; a < num_actions_; ++a)
                if (!one_hot(successors(t, s, a))) return false;
    return true;
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& v : violations) os << v.message << "\n";
    return os.str();
}

namespace {

// Returns the first violation of a probability row, or an empty string.
std::string check_distribution(std::span<const double> row) {
    double sum = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] < 0.0 || !std::isfinite(row[i])) {
            std::ostringstream os;
            os << "entry " << i << " = " << row[i] << " is negative or non-finite";
            return os.str();
        }
        sum += row[i];
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "sums to " << sum;
        return os.str();
    }
    return {};
}

// Almost-sure extremes: max/min over actions and over successors with positive probability.
std::pair<double, double> almost_sure_extremes(const TabularMdp& mdp) {
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
    std::vector<double> hi(S, 0.0), lo(S, 0.0), next_hi(S), next_lo(S);
    for (int t = T - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            double worst = std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                double cont_hi = 0.0, cont_lo = 0.0;
                if (t + 1 < T) {
                    cont_hi = -std::numeric_limits<double>::infinity();
                    cont_lo = std::numeric_limits<double>::infinity();
                    auto row = mdp.successors(t, s, a);
                    for (int n = 0; n < S; ++n) {
                        if (row[n] <= 0.0) continue;
                        cont_hi = std::max(cont_hi, hi[n]);
                        cont_lo = std::min(cont_lo, lo[n]);
                    }
                    if (!std::isfinite(cont_hi)) cont_hi = cont_lo = 0.0;  // empty support
                }
                best = std::max(best, mdp.reward(t, s, a) + cont_hi);
                worst = std::min(worst, mdp.reward(t, s, a) + cont_lo);
            }
            next_hi[s] = best;
            next_lo[s] = worst;
        }
        std::swap(hi, next_hi);
        std::swap(lo, next_lo);
    }
    double top = -std::numeric_limits<double>::infinity();
    double bottom = std::numeric_limits<double>::infinity();
    for (int s = 0; s < S; ++s) {
        if (mdp.initial(s) <= 0.0) continue;
        top = std::max(top, hi[s]);
        bottom = std::min(bottom, lo[s]);
    }
    if (!std::isfinite(top)) return {0.0, 0.0};
    return {bottom, top};
}

// Expected-value extremes over deterministic policies.
std::pair<double, double> policy_extremes(const TabularMdp& mdp) {
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
    std::vector<double> hi(S, 0.0), lo(S, 0.0), next_hi(S), next_lo(S);
    for (int t = T - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            double worst = std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                double e_hi = 0.0, e_lo = 0.0;
                if (t + 1 < T) {
                    auto row = mdp.successors(t, s, a);
                    for (int n = 0; n < S; ++n) {
                        e_hi += row[n] * hi[n];
                        e_lo += row[n] * lo[n];
                    }
                }
                best = std::max(best, mdp.reward(t, s, a) + e_hi);
                worst = std::min(worst, mdp.reward(t, s, a) + e_lo);
            }
            next_hi[s] = best;
            next_lo[s] = worst;
        }
        std::swap(hi, next_hi);
        std::swap(lo, next_lo);
    }
    double top = 0.0, bottom = 0.0;
    for (int s = 0; s < S; ++s) {
        top += mdp.initial(s) * hi[s];
        bottom += mdp.initial(s) * lo[s];
    }
    return {bottom, top};
}

}  // namespace

ValidationReport validate_mdp(const TabularMdp& mdp) {
    ValidationReport report;
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();

    if (auto msg = check_distribution(mdp.initial_dist()); !msg.empty())
        report.violations.push_back({ViolationKind::InitialDistribution, {}, "initial_dist " + msg});

    bool row_reported = false;
    for (int t = 0; t + 1 < T && !row_reported; ++t)
        for (int s = 0; s < S && !row_reported; ++s)
            for (int a = 0; a < A && !row_reported; ++a)
                if (auto msg = check_distribution(mdp.successors(t, s, a)); !msg.empty()) {
                    std::ostringstream os;
                    os << "transition row (t=" << t << ", s=" << s << ", a=" << a << ") " << msg;
                    report.violations.push_back({ViolationKind::TransitionRow, {t, s, a}, os.str()});
                    row_reported = true;
                }

    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                if (!std::isfinite(mdp.reward(t, s, a))) {
                    std::ostringstream os;
                    os << "reward (t=" << t << ", s=" << s << ", a=" << a << ") is not finite";
                    report.violations.push_back({ViolationKind::RewardUpperBound, {t, s, a}, os.str()});
                    return report;
                }

    const auto [lo, hi] = almost_sure_extremes(mdp);
    if (hi > 1.0 + kStochasticTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "max achievable return " << hi << " exceeds 1";
        report.violations.push_back({ViolationKind::RewardUpperBound, {}, os.str()});
    }
    if (lo < -kStochasticTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "min achievable return " << lo << " is below 0";
        report.violations.push_back({ViolationKind::RewardLowerBound, {}, os.str()});
    }
    return report;
}

Episode sample_episode(const TabularMdp& mdp, const TimedPolicy& policy, Rng& rng) {
    const int T = mdp.horizon(), A = mdp.num_actions();
    Episode ep;
    ep.states.reserve(T);
    ep.actions.reserve(T);
    ep.rewards.reserve(T);
    int s = rng.categorical(mdp.initial_dist());
    for (int t = 0; t < T; ++t) {
        const int a = policy.is_uniform(t) ? rng.uniform_int(A) : policy.action(t, s);
        ep.states.push_back(s);
        ep.actions.push_back(a);
        ep.rewards.push_back(mdp.reward(t, s, a));
        if (t + 1 < T) s = rng.categorical(mdp.successors(t, s, a));
    }
    return ep;
}

QTable exact_policy_q(const TabularMdp& mdp, const TimedPolicy& policy) {
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
    if (policy.horizon() != T) throw std::invalid_argument("exact_policy_q: policy horizon mismatch");
    QTable q(T, S, A);
    std::vector<double> next_v(S, 0.0);
    for (int t = T - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                double cont = 0.0;
                if (t + 1 < T) {
                    auto row = mdp.successors(t, s, a);
                    for (int n = 0; n < S; ++n) cont += row[n] * next_v[n];
                }
                q(t, s, a) = mdp.reward(t, s, a) + cont;
            }
        for (int s = 0; s < S; ++s) {
            double v = 0.0;
            for (int a = 0; a < A; ++a) v += policy.prob(t, s, a) * q(t, s, a);
            next_v[s] = v;
        }
    }
    return q;
}

VTable policy_values(const TimedPolicy& policy, const QTable& q) {
    VTable v(q.horizon(), q.num_states());
    for (int t = 0; t < q.horizon(); ++t)
        for (int s = 0; s < q.num_states(); ++s) {
            double sum = 0.0;
            for (int a = 0; a < q.num_actions(); ++a) sum += policy.prob(t, s, a) * q(t, s, a);
            v(t, s) = sum;
        }
    return v;
}

double exact_return(const TabularMdp& mdp, const TimedPolicy& policy) {
    const auto q = exact_policy_q(mdp, policy);
    double j = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) {
        if (mdp.initial(s) == 0.0) continue;
        double v = 0.0;
        for (int a = 0; a < mdp.num_actions(); ++a) v += policy.prob(0, s, a) * q(0, s, a);
        j += mdp.initial(s) * v;
    }
    return j;
}

ReturnExtremes return_extremes(const TabularMdp& mdp) {
    ReturnExtremes out;
    std::tie(out.almost_sure_min, out.almost_sure_max) = almost_sure_extremes(mdp);
    std::tie(out.worst_policy, out.best_policy) = policy_extremes(mdp);
    return out;
}

}  // namespace qvi
