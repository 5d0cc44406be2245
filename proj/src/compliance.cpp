#include "qvi/compliance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qvi/analysis.hpp"

namespace qvi {

std::vector<std::vector<double>> random_policy_state_distribution(const TabularMdp& mdp) {
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
    std::vector<std::vector<double>> dist(T, std::vector<double>(S, 0.0));
    dist[0] = mdp.initial_dist();
    for (int t = 0; t + 1 < T; ++t)
        for (int s = 0; s < S; ++s) {
            if (dist[t][s] == 0.0) continue;
            for (int a = 0; a < A; ++a) {
                auto row = mdp.successors(t, s, a);
                for (int n = 0; n < S; ++n) dist[t + 1][n] += dist[t][s] * row[n] / A;
            }
        }
    return dist;
}

double in_distribution_mse(const QEstimate& qhat, const QTable& q, int t, const std::vector<double>& dist) {
    double mse = 0.0;
    const int A = q.num_actions();
    for (int s = 0; s < q.num_states(); ++s) {
        if (dist[s] == 0.0) continue;
        double cell = 0.0;
        for (int a = 0; a < A; ++a) {
            const double e = qhat.value(s, a) - q(t, s, a);
            cell += e * e;
        }
        mse += dist[s] * cell / A;
    }
    return mse;
}

namespace {

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const auto n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Ordinary least squares y = slope * x + intercept.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    return {slope, my - slope * mx};
}

// One (s_t, a_t, s_{t+1}, reward-to-go) draw from uniform-random rollouts.
struct Draw {
    int s, a, next;
    double reward, reward_to_go;
};

Draw draw_at(const TabularMdp& mdp, int t, Rng& rng) {
    const int T = mdp.horizon(), A = mdp.num_actions();
    int s = rng.categorical(mdp.initial_dist());
    for (int u = 0; u < t; ++u) s = rng.categorical(mdp.successors(u, s, rng.uniform_int(A)));
    Draw d{s, rng.uniform_int(A), -1, 0.0, 0.0};
    d.reward = mdp.reward(t, s, d.a);
    double rtg = d.reward;
    int cur = s, act = d.a;
    for (int u = t; u + 1 < T; ++u) {
        cur = rng.categorical(mdp.successors(u, cur, act));
        if (u == t) d.next = cur;
        act = rng.uniform_int(A);
        rtg += mdp.reward(u + 1, cur, act);
    }
    d.reward_to_go = rtg;
    return d;
}

}  // namespace

ComplianceReport compliance_check(const RegressionOracle& oracle, const TabularMdp& mdp,
                                  const ComplianceOptions& options) {
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
    const int t = options.timestep;
    if (t < 0 || t >= T) throw std::invalid_argument("compliance_check: timestep out of range");
    if (options.sizes.empty()) throw std::invalid_argument("compliance_check: no sample sizes");
    for (std::size_t i = 1; i < options.sizes.size(); ++i)
        if (options.sizes[i] <= options.sizes[i - 1])
            throw std::invalid_argument("compliance_check: sizes must be strictly increasing");
    if (options.sizes.front() < 1 || options.trials < 1)
        throw std::invalid_argument("compliance_check: sizes and trials must be positive");
    if (oracle.num_states() != S || oracle.num_actions() != A)
        throw std::invalid_argument("compliance_check: oracle grid does not match the MDP");

    ComplianceReport report;
    report.oracle = oracle.name();
    report.timestep = t;

    const auto q_seq = q_sequence(mdp, std::min(2, T - t));
    const auto dist = random_policy_state_distribution(mdp);

    std::vector<double> log_m, log_mse;
    for (std::size_t si = 0; si < options.sizes.size(); ++si) {
        const int m = options.sizes[si];
        SizeEntry entry;
        entry.m = m;
        for (int trial = 0; trial < options.trials; ++trial) {
            Rng rng(options.seed, {1, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)});
            RegressionDataset data;
            data.timestep = t;
            data.depth = 1;
            data.samples.reserve(m);
            for (int j = 0; j < m; ++j) {
                const auto d = draw_at(mdp, t, rng);
                data.samples.push_back({d.s, d.a, clip01(d.reward_to_go)});
            }
            entry.trial_mse.push_back(in_distribution_mse(oracle.fit(data), q_seq[0], t, dist[t]));
        }
        entry.median_mse = median(entry.trial_mse);
        double total = 0.0;
        for (double x : entry.trial_mse) total += x;
        entry.mean_mse = total / entry.trial_mse.size();
        if (m > 1) report.c_f = std::max(report.c_f, entry.median_mse * m / std::log(static_cast<double>(m)));
        log_m.push_back(std::log(static_cast<double>(m)));
        // Guard log(0) when an oracle is exact on every trial.
        log_mse.push_back(std::log(std::max(entry.median_mse, 1e-300)));
        report.sizes.push_back(std::move(entry));
    }
    if (log_m.size() >= 2) std::tie(report.slope, report.log_intercept) = fit_line(log_m, log_mse);

    if (options.check_fqi && t + 1 < T) {
        report.has_fqi = true;
        report.fqi_m = options.sizes.back();
        report.perturbation_family =
            "V_hat(s') = clip(V(s') + eps * xi(s'), 0, 1), xi(s') iid uniform on {-1, +1} per trial; "
            "V = max_a Q^1_{t+1}; target Q^2_t";
        const auto& q1 = q_seq[0];
        const auto& q2 = q_seq[1];
        const auto& next_dist = dist[t + 1];
        std::vector<double> xs, ys;
        for (std::size_t ei = 0; ei < options.epsilons.size(); ++ei) {
            const double eps = options.epsilons[ei];
            PerturbationPoint pt;
            pt.epsilon = eps;
            for (int trial = 0; trial < options.trials; ++trial) {
                Rng rng(options.seed, {2, ei, static_cast<std::uint64_t>(trial)});
                std::vector<double> v(S), v_hat(S);
                for (int n = 0; n < S; ++n) {
                    v[n] = q1.max_value(t + 1, n);
                    const double xi = rng.uniform_int(2) == 0 ? -1.0 : 1.0;
                    v_hat[n] = clip01(v[n] + eps * xi);
                }
                double v_mse = 0.0;
                for (int n = 0; n < S; ++n) v_mse += next_dist[n] * (v_hat[n] - v[n]) * (v_hat[n] - v[n]);
                // The sample stream depends only on the trial, so every eps sees the same (s, a, s').
                Rng sample_rng(options.seed, {3, static_cast<std::uint64_t>(trial)});
                RegressionDataset data;
                data.timestep = t;
                data.depth = 2;
                data.samples.reserve(report.fqi_m);
                for (int j = 0; j < report.fqi_m; ++j) {
                    const auto d = draw_at(mdp, t, sample_rng);
                    data.samples.push_back({d.s, d.a, clip01(d.reward + v_hat[d.next])});
                }
                const double q_mse = in_distribution_mse(oracle.fit(data), q2, t, dist[t]);
                pt.v_rms += std::sqrt(v_mse) / options.trials;
                pt.q_rms += std::sqrt(q_mse) / options.trials;
            }
            if (eps == 0.0) report.rms_at_zero = pt.q_rms;
            xs.push_back(pt.v_rms);
            ys.push_back(pt.q_rms);
            report.points.push_back(pt);
        }
        if (xs.size() >= 2) {
            std::tie(report.alpha, report.intercept) = fit_line(xs, ys);
        } else if (!ys.empty()) {
            report.intercept = ys.front();
        }
        if (report.fqi_m > 1)
            report.c_g = report.intercept * report.intercept * report.fqi_m /
                         std::log(static_cast<double>(report.fqi_m));
    }
    return report;
}

}  // namespace qvi
