#include "qvi/environments.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qvi/mdp_io.hpp"
#include "qvi/rng.hpp"

namespace qvi {

namespace {

std::size_t tidx(int S, int A, int s, int a, int n) {
    return (static_cast<std::size_t>(s) * A + a) * S + n;
}

}  // namespace

TabularMdp make_chain(int length, double slip, double terminal_reward, std::vector<double> decoys) {
    if (length < 1) throw std::invalid_argument("make_chain: length must be >= 1");
    if (slip < 0.0 || slip > 1.0) throw std::invalid_argument("make_chain: slip must lie in [0, 1]");
    decoys.resize(length, 0.0);
    const int L = length, S = L + 1, A = 2, T = L;
    std::vector<double> initial(S, 0.0);
    initial[0] = 1.0;
    std::vector<std::vector<double>> rewards(T, std::vector<double>(S * A, 0.0));
    std::vector<std::vector<double>> transitions(T - 1, std::vector<double>(static_cast<std::size_t>(S) * A * S, 0.0));
    for (int t = 0; t < T; ++t)
        for (int p = 0; p < L; ++p) {
            if (p == L - 1) rewards[t][p * A + 0] = terminal_reward;
            rewards[t][p * A + 1] = decoys[t];
        }
    for (int t = 0; t + 1 < T; ++t) {
        auto& tr = transitions[t];
        for (int p = 0; p < L; ++p) {
            if (p == L - 1) {
                tr[tidx(S, A, p, 0, L)] = 1.0;
            } else {
                tr[tidx(S, A, p, 0, p + 1)] += 1.0 - slip;
                tr[tidx(S, A, p, 0, p)] += slip;
            }
            tr[tidx(S, A, p, 1, p)] = 1.0;
        }
        tr[tidx(S, A, L, 0, L)] = 1.0;
        tr[tidx(S, A, L, 1, L)] = 1.0;
    }
    MdpMetadata meta;
    meta.name = "chain";
    meta.params_json = nlohmann::json{{"generator", "chain"},
                                      {"length", length},
                                      {"slip", slip},
                                      {"terminal_reward", terminal_reward},
                                      {"decoys", decoys}}
                           .dump();
    return TabularMdp(T, S, A, std::move(initial), std::move(transitions), std::move(rewards), std::move(meta));
}

namespace {

std::vector<double> dirichlet_one(int n, Rng& rng) {
    std::vector<double> x(n);
    double total = 0.0;
    for (auto& v : x) {
        v = -std::log(1.0 - rng.uniform());
        total += v;
    }
    for (auto& v : x) v /= total;
    return x;
}

std::vector<std::vector<double>> sparse_rewards(int S, int A, int T, double fraction, Rng& rng) {
    std::vector<std::vector<double>> rewards(T, std::vector<double>(S * A, 0.0));
    for (auto& rt : rewards)
        for (auto& r : rt)
            if (rng.uniform() < fraction) r = rng.uniform();
    return rewards;
}

TabularMdp normalize_rewards(TabularMdp raw) {
    const double top = return_extremes(raw).almost_sure_max;
    if (!(top > 0.0)) return raw;
    auto rewards = raw.rewards();
    for (auto& rt : rewards)
        for (auto& r : rt) r /= top;
    return TabularMdp(raw.horizon(), raw.num_states(), raw.num_actions(), raw.initial_dist(), raw.transitions(),
                      std::move(rewards), raw.metadata());
}

void check_random_args(int S, int A, int T, double fraction) {
    if (S < 1 || A < 2 || T < 1) throw std::invalid_argument("random MDP: need S >= 1, A >= 2, T >= 1");
    if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("random MDP: reward_fraction outside [0, 1]");
}

MdpMetadata random_metadata(const char* kind, int S, int A, int T, double fraction, std::uint64_t seed) {
    MdpMetadata meta;
    meta.name = kind;
    meta.params_json = nlohmann::json{{"generator", kind},      {"num_states", S}, {"num_actions", A},
                                      {"horizon", T},           {"reward_fraction", fraction},
                                      {"seed", seed}}
                           .dump();
    return meta;
}

}  // namespace

TabularMdp make_random_mdp(int num_states, int num_actions, int horizon, double reward_fraction,
                           std::uint64_t seed) {
    check_random_args(num_states, num_actions, horizon, reward_fraction);
    const int S = num_states, A = num_actions, T = horizon;
    Rng rng(seed, {0x52414e44});
    auto initial = dirichlet_one(S, rng);
    std::vector<std::vector<double>> transitions(T - 1);
    for (auto& tr : transitions) {
        tr.reserve(static_cast<std::size_t>(S) * A * S);
        for (int i = 0; i < S * A; ++i) {
            auto row = dirichlet_one(S, rng);
            tr.insert(tr.end(), row.begin(), row.end());
        }
    }
    auto rewards = sparse_rewards(S, A, T, reward_fraction, rng);
    return normalize_rewards(TabularMdp(T, S, A, std::move(initial), std::move(transitions), std::move(rewards),
                                        random_metadata("random", S, A, T, reward_fraction, seed)));
}

TabularMdp make_random_deterministic_mdp(int num_states, int num_actions, int horizon, double reward_fraction,
                                         std::uint64_t seed) {
    check_random_args(num_states, num_actions, horizon, reward_fraction);
    const int S = num_states, A = num_actions, T = horizon;
    Rng rng(seed, {0x44455445});
    std::vector<double> initial(S, 0.0);
    initial[rng.uniform_int(S)] = 1.0;
    std::vector<std::vector<double>> transitions(T - 1, std::vector<double>(static_cast<std::size_t>(S) * A * S, 0.0));
    for (auto& tr : transitions)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) tr[tidx(S, A, s, a, rng.uniform_int(S))] = 1.0;
    auto rewards = sparse_rewards(S, A, T, reward_fraction, rng);
    return normalize_rewards(TabularMdp(T, S, A, std::move(initial), std::move(transitions), std::move(rewards),
                                        random_metadata("random-deterministic", S, A, T, reward_fraction, seed)));
}

TabularMdp sticky_transform(const TabularMdp& mdp, double p_sticky) {
    if (p_sticky < 0.0 || p_sticky > 1.0) throw std::invalid_argument("sticky_transform: p outside [0, 1]");
    const int S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    const int M = A + 1;  // memory values: executed action or none (= A)
    const double S2 = static_cast<double>(S) * M;
    if (S2 * A * S2 * T > kMaxDenseEntries)
        throw std::length_error("sticky_transform: augmented model exceeds the dense size guard");
    const int SA = S * M;
    auto aug = [M](int s, int m) { return s * M + m; };

    std::vector<double> initial(SA, 0.0);
    for (int s = 0; s < S; ++s) initial[aug(s, A)] = mdp.initial(s);

    // (executed action, probability) given memory m and chosen a.
    auto executed = [&](int m, int a) {
        std::vector<std::pair<int, double>> out;
        if (m == A || m == a || p_sticky == 0.0) {
            out.emplace_back(a, 1.0);
        } else {
            out.emplace_back(m, p_sticky);
            if (p_sticky < 1.0) out.emplace_back(a, 1.0 - p_sticky);
        }
        return out;
    };

    std::vector<std::vector<double>> rewards(T, std::vector<double>(static_cast<std::size_t>(SA) * A, 0.0));
    std::vector<std::vector<double>> transitions(T - 1,
                                                 std::vector<double>(static_cast<std::size_t>(SA) * A * SA, 0.0));
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int m = 0; m < M; ++m)
                for (int a = 0; a < A; ++a) {
                    const int from = aug(s, m);
                    for (auto [e, pe] : executed(m, a)) {
                        rewards[t][static_cast<std::size_t>(from) * A + a] += pe * mdp.reward(t, s, e);
                        if (t + 1 < T) {
                            auto row = mdp.successors(t, s, e);
                            for (int n = 0; n < S; ++n)
                                if (row[n] > 0.0) transitions[t][tidx(SA, A, from, a, aug(n, e))] += pe * row[n];
                        }
                    }
                }

    MdpMetadata meta = mdp.metadata();
    meta.name = (meta.name.empty() ? "mdp" : meta.name) + "+sticky";
    nlohmann::json params = meta.params_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(meta.params_json);
    params["sticky_probability"] = p_sticky;
    meta.params_json = params.dump();
    return TabularMdp(T, SA, A, std::move(initial), std::move(transitions), std::move(rewards), std::move(meta));
}

double needle_decoy_reward(int horizon, int num_actions) {
    if (horizon < 2) return 0.0;
    return (1.0 + 1.0 / num_actions) / (2.0 * (horizon - 1));
}

TabularMdp make_needle(int horizon, int num_actions) {
    if (horizon < 1 || num_actions < 2) throw std::invalid_argument("make_needle: need T >= 1, A >= 2");
    const int T = horizon, A = num_actions, S = 2;
    const int correct = A - 1;
    const double decoy = needle_decoy_reward(T, A);
    std::vector<double> initial{1.0, 0.0};
    std::vector<std::vector<double>> rewards(T, std::vector<double>(S * A, 0.0));
    std::vector<std::vector<double>> transitions(T - 1, std::vector<double>(static_cast<std::size_t>(S) * A * S, 0.0));
    for (int t = 0; t < T; ++t) {
        if (t == T - 1) rewards[t][0 * A + correct] = 1.0;
        for (int a = 0; a < A; ++a)
            if (t > 0) rewards[t][1 * A + a] = decoy;
    }
    for (int t = 0; t + 1 < T; ++t)
        for (int a = 0; a < A; ++a) {
            transitions[t][tidx(S, A, 0, a, a == correct ? 0 : 1)] = 1.0;
            transitions[t][tidx(S, A, 1, a, 1)] = 1.0;
        }
    MdpMetadata meta;
    meta.name = "needle";
    meta.params_json = nlohmann::json{{"generator", "needle"}, {"horizon", T}, {"num_actions", A}}.dump();
    return TabularMdp(T, S, A, std::move(initial), std::move(transitions), std::move(rewards), std::move(meta));
}

TabularMdp make_reference_mdp(double b0, double b1) {
    const int S = 3, A = 2, T = 2;
    std::vector<double> initial{1.0, 0.0, 0.0};
    std::vector<std::vector<double>> transitions(1, std::vector<double>(S * A * S, 0.0));
    auto& tr = transitions[0];
    tr[tidx(S, A, 0, 0, 1)] = 1.0;
    tr[tidx(S, A, 0, 1, 2)] = 1.0;
    for (int a = 0; a < A; ++a) {
        tr[tidx(S, A, 1, a, 1)] = 1.0;
        tr[tidx(S, A, 2, a, 2)] = 1.0;
    }
    std::vector<std::vector<double>> rewards{std::vector<double>(S * A, 0.0), {0.0, 0.0, 0.8, 0.2, b0, b1}};
    MdpMetadata meta;
    meta.name = "reference";
    meta.params_json = nlohmann::json{{"generator", "reference"}, {"b0", b0}, {"b1", b1}}.dump();
    return TabularMdp(T, S, A, std::move(initial), std::move(transitions), std::move(rewards), std::move(meta));
}

}  // namespace qvi
