#include "qvi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qvi {

namespace {

double expected_next(const TabularMdp& mdp, int t, int s, int a, const std::vector<double>& next_v) {
    double sum = 0.0;
    auto row = mdp.successors(t, s, a);
    for (int n = 0; n < mdp.num_states(); ++n) sum += row[n] * next_v[n];
    return sum;
}

void check_shape(const TabularMdp& mdp, const QTable& q) {
    if (q.horizon() != mdp.horizon() || q.num_states() != mdp.num_states() ||
        q.num_actions() != mdp.num_actions())
        throw std::invalid_argument("Q-table shape does not match the MDP");
}

void check_k(const TabularMdp& mdp, int k) {
    if (k < 1 || k > mdp.horizon())
        throw std::out_of_range("k = " + std::to_string(k) + " outside [1, " +
                                std::to_string(mdp.horizon()) + "]");
}

}  // namespace

std::string to_string(StateScope scope) {
    return scope == StateScope::GreedyReachable ? "greedy-reachable" : "all-states";
}

QTable qvi_step(const TabularMdp& mdp, const QTable& q) {
    check_shape(mdp, q);
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
    QTable out(T, S, A);
    std::vector<double> next_v(S);
    for (int t = 0; t < T; ++t) {
        if (t + 1 < T)
            for (int n = 0; n < S; ++n) next_v[n] = q.max_value(t + 1, n);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                out(t, s, a) = mdp.reward(t, s, a) + (t + 1 < T ? expected_next(mdp, t, s, a, next_v) : 0.0);
    }
    return out;
}

std::vector<QTable> q_sequence(const TabularMdp& mdp, int k_max) {
    check_k(mdp, k_max);
    std::vector<QTable> seq;
    seq.reserve(k_max);
    seq.push_back(exact_policy_q(mdp, TimedPolicy::uniform(mdp.horizon(), mdp.num_actions())));
    for (int k = 2; k <= k_max; ++k) seq.push_back(qvi_step(mdp, seq.back()));
    return seq;
}

QTable optimal_q(const TabularMdp& mdp) {
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
    QTable q(T, S, A);
    std::vector<double> next_v(S, 0.0);
    for (int t = T - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                q(t, s, a) = mdp.reward(t, s, a) + (t + 1 < T ? expected_next(mdp, t, s, a, next_v) : 0.0);
        for (int s = 0; s < S; ++s) next_v[s] = q.max_value(t, s);
    }
    return q;
}

double optimal_return(const TabularMdp& mdp) {
    const auto q = optimal_q(mdp);
    double j = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s)
        if (mdp.initial(s) > 0.0) j += mdp.initial(s) * q.max_value(0, s);
    return j;
}

std::vector<std::vector<bool>> greedy_reachable(const TabularMdp& mdp, const QTable& q) {
    check_shape(mdp, q);
    const int T = mdp.horizon(), S = mdp.num_states();
    std::vector<std::vector<bool>> reach(T, std::vector<bool>(S, false));
    for (int s = 0; s < S; ++s) reach[0][s] = mdp.initial(s) > 0.0;
    for (int t = 0; t + 1 < T; ++t)
        for (int s = 0; s < S; ++s) {
            if (!reach[t][s]) continue;
            for (int a : argmax_set(q.row(t, s))) {
                auto row = mdp.successors(t, s, a);
                for (int n = 0; n < S; ++n)
                    if (row[n] > 0.0) reach[t + 1][n] = true;
            }
        }
    return reach;
}

bool is_greedy_optimal(const TabularMdp& mdp, const QTable& qk, const QTable& qstar, StateScope scope) {
    check_shape(mdp, qk);
    check_shape(mdp, qstar);
    std::vector<std::vector<bool>> mask;
    if (scope == StateScope::GreedyReachable) mask = greedy_reachable(mdp, qk);
    for (int t = 0; t < mdp.horizon(); ++t)
        for (int s = 0; s < mdp.num_states(); ++s) {
            if (scope == StateScope::GreedyReachable && !mask[t][s]) continue;
            const auto greedy = argmax_set(qk.row(t, s));
            const auto best = argmax_set(qstar.row(t, s));
            if (!std::includes(best.begin(), best.end(), greedy.begin(), greedy.end())) return false;
        }
    return true;
}

bool is_k_qvi_solvable(const TabularMdp& mdp, int k, StateScope scope) {
    check_k(mdp, k);
    const auto seq = q_sequence(mdp, k);
    return is_greedy_optimal(mdp, seq.back(), optimal_q(mdp), scope);
}

GapResult table_gap(const QTable& qk, const std::vector<std::vector<bool>>* mask) {
    GapResult out;
    out.solvable = true;
    double inf = std::numeric_limits<double>::infinity();
    double best_gap = inf;
    for (int t = 0; t < qk.horizon(); ++t)
        for (int s = 0; s < qk.num_states(); ++s) {
            if (mask && !(*mask)[t][s]) continue;
            auto row = qk.row(t, s);
            const auto top = argmax_set(row);
            if (static_cast<int>(top.size()) == qk.num_actions()) {
                ++out.skipped_pairs;
                continue;
            }
            const double max_all = *std::max_element(row.begin(), row.end());
            double max_rest = -inf;
            for (int a = 0; a < qk.num_actions(); ++a)
                if (!std::binary_search(top.begin(), top.end(), a)) max_rest = std::max(max_rest, row[a]);
            best_gap = std::min(best_gap, max_all - max_rest);
        }
    if (best_gap < inf) out.gap = best_gap;
    return out;
}

GapResult k_gap(const TabularMdp& mdp, int k, StateScope gap_scope, StateScope solvability_scope) {
    check_k(mdp, k);
    const auto seq = q_sequence(mdp, k);
    const auto& qk = seq.back();
    if (!is_greedy_optimal(mdp, qk, optimal_q(mdp), solvability_scope)) return GapResult{};
    if (gap_scope == StateScope::GreedyReachable) {
        const auto mask = greedy_reachable(mdp, qk);
        return table_gap(qk, &mask);
    }
    return table_gap(qk, nullptr);
}

double pessimal_greedy_return(const TabularMdp& mdp, const QTable& qk) {
    check_shape(mdp, qk);
    const int T = mdp.horizon(), S = mdp.num_states();
    std::vector<double> next_v(S, 0.0), v(S);
    for (int t = T - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            double worst = std::numeric_limits<double>::infinity();
            for (int a : argmax_set(qk.row(t, s))) {
                const double value =
                    mdp.reward(t, s, a) + (t + 1 < T ? expected_next(mdp, t, s, a, next_v) : 0.0);
                worst = std::min(worst, value);
            }
            v[s] = worst;
        }
        std::swap(v, next_v);
    }
    double j = 0.0;
    for (int s = 0; s < S; ++s)
        if (mdp.initial(s) > 0.0) j += mdp.initial(s) * next_v[s];
    return j;
}

double h_bar_from_gap(int k, std::optional<double> gap, int num_actions, bool* clamped) {
    if (clamped) *clamped = false;
    if (!gap) return static_cast<double>(k);
    if (*gap >= 1.0) {
        if (clamped) *clamped = *gap > 1.0;
        return static_cast<double>(k);
    }
    return k + std::log(1.0 / (*gap * *gap)) / std::log(static_cast<double>(num_actions));
}

HorizonReport effective_horizon(const TabularMdp& mdp, const HorizonOptions& options) {
    check_k(mdp, options.k_max);
    if (!(options.approx_threshold > 0.0 && options.approx_threshold <= 1.0))
        throw std::invalid_argument("approx_threshold must lie in (0, 1]");

    HorizonReport report;
    report.approx_threshold = options.approx_threshold;
    report.solvability_scope = options.solvability_scope;
    report.gap_scope = options.gap_scope;
    report.num_actions = mdp.num_actions();

    const auto extremes = return_extremes(mdp);
    report.optimal_return = extremes.best_policy;
    report.worst_return = extremes.worst_policy;
    const double target = extremes.worst_policy +
                          options.approx_threshold * (extremes.best_policy - extremes.worst_policy);

    const auto seq = q_sequence(mdp, options.k_max);
    const auto qstar = optimal_q(mdp);
    report.h_bar = std::numeric_limits<double>::infinity();

    for (int k = 1; k <= options.k_max; ++k) {
        const auto& qk = seq[k - 1];
        HorizonEntry e;
        e.k = k;
        e.qvi_solvable = is_greedy_optimal(mdp, qk, qstar, options.solvability_scope);
        e.pessimal_return = pessimal_greedy_return(mdp, qk);
        e.approx_solvable = e.pessimal_return >= target - kTieTolerance;
        if (e.qvi_solvable) {
            GapResult g;
            if (options.gap_scope == StateScope::GreedyReachable) {
                const auto mask = greedy_reachable(mdp, qk);
                g = table_gap(qk, &mask);
            } else {
                g = table_gap(qk, nullptr);
            }
            e.gap = g.gap;
            e.skipped_pairs = g.skipped_pairs;
            e.all_ties = !g.gap.has_value();
            e.h_bar = h_bar_from_gap(k, g.gap, mdp.num_actions(), &e.gap_clamped);
            if (!report.min_exact_k) report.min_exact_k = k;
            report.h_bar = std::min(report.h_bar, e.h_bar);
        } else {
            e.h_bar = std::numeric_limits<double>::infinity();
        }
        if (e.approx_solvable && !report.min_approx_k) report.min_approx_k = k;
        report.entries.push_back(e);
    }
    return report;
}

}  // namespace qvi
