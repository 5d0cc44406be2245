#include "qvi/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace qvi {

QEstimate::QEstimate(int num_states, int num_actions, std::vector<double> values)
    : num_states_(num_states), num_actions_(num_actions), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(num_states) * num_actions)
        throw std::invalid_argument("QEstimate: value table has wrong size");
    for (auto& v : values_) v = clip01(v);
}

double QEstimate::max_value(int s) const {
    auto r = row(s);
    return *std::max_element(r.begin(), r.end());
}

FeatureMap::FeatureMap(int num_states, int num_actions, int dim, std::vector<double> table)
    : num_states_(num_states), num_actions_(num_actions), dim_(dim), table_(std::move(table)) {
    if (num_states < 1 || num_actions < 1 || dim < 1)
        throw std::invalid_argument("FeatureMap: dimensions must be positive");
    if (table_.size() != static_cast<std::size_t>(num_states) * num_actions * dim)
        throw std::invalid_argument("FeatureMap: table size does not match S*A*d");
}

FeatureMap FeatureMap::one_hot(int num_states, int num_actions) {
    const int d = num_states * num_actions;
    std::vector<double> table(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) table[static_cast<std::size_t>(i) * d + i] = 1.0;
    return FeatureMap(num_states, num_actions, d, std::move(table));
}

FeatureMap FeatureMap::state_and_action(int num_states, int num_actions) {
    const int d = num_states + num_actions;
    std::vector<double> table(static_cast<std::size_t>(num_states) * num_actions * d, 0.0);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) {
            const auto base = (static_cast<std::size_t>(s) * num_actions + a) * d;
            table[base + s] = 1.0;
            table[base + num_states + a] = 1.0;
        }
    return FeatureMap(num_states, num_actions, d, std::move(table));
}

FeatureMap FeatureMap::from_json(const nlohmann::json& doc) {
    const int S = doc.at("num_states").get<int>();
    const int A = doc.at("num_actions").get<int>();
    const int d = doc.at("dim").get<int>();
    const auto& f = doc.at("features");
    if (!f.is_array() || static_cast<int>(f.size()) != S)
        throw std::invalid_argument("features: expected [S][A][d] nested arrays");
    std::vector<double> table;
    table.reserve(static_cast<std::size_t>(S) * A * d);
    for (const auto& per_state : f) {
        if (!per_state.is_array() || static_cast<int>(per_state.size()) != A)
            throw std::invalid_argument("features: expected A vectors per state");
        for (const auto& vec : per_state) {
            if (!vec.is_array() || static_cast<int>(vec.size()) != d)
                throw std::invalid_argument("features: vector length differs from dim");
            for (const auto& x : vec) table.push_back(x.get<double>());
        }
    }
    return FeatureMap(S, A, d, std::move(table));
}

nlohmann::json FeatureMap::to_json() const {
    nlohmann::json features = nlohmann::json::array();
    for (int s = 0; s < num_states_; ++s) {
        nlohmann::json per_state = nlohmann::json::array();
        for (int a = 0; a < num_actions_; ++a) {
            auto v = (*this)(s, a);
            per_state.push_back(std::vector<double>(v.begin(), v.end()));
        }
        features.push_back(std::move(per_state));
    }
    return {{"num_states", num_states_}, {"num_actions", num_actions_}, {"dim", dim_}, {"features", features}};
}

namespace {

void check_ids(const RegressionDataset& data, int num_states, int num_actions) {
    for (const auto& x : data.samples)
        if (x.state < 0 || x.state >= num_states || x.action < 0 || x.action >= num_actions)
            throw std::out_of_range("regression sample (s=" + std::to_string(x.state) +
                                    ", a=" + std::to_string(x.action) + ") outside the state-action grid");
}

}  // namespace

QEstimate tabular_mean_regress(const RegressionDataset& data, int num_states, int num_actions,
                               double unseen_value) {
    check_ids(data, num_states, num_actions);
    const auto cells = static_cast<std::size_t>(num_states) * num_actions;
    std::vector<double> sum(cells, 0.0);
    std::vector<int> count(cells, 0);
    for (const auto& x : data.samples) {
        const auto i = static_cast<std::size_t>(x.state) * num_actions + x.action;
        sum[i] += x.target;
        ++count[i];
    }
    std::vector<double> values(cells);
    for (std::size_t i = 0; i < cells; ++i) values[i] = count[i] > 0 ? sum[i] / count[i] : unseen_value;
    QEstimate q(num_states, num_actions, std::move(values));
    q.timestep = data.timestep;
    q.depth = data.depth;
    q.empty_data = data.samples.empty();
    return q;
}

QEstimate linear_lsq_regress(const RegressionDataset& data, const FeatureMap& features, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("ridge lambda must be nonnegative");
    const int S = features.num_states(), A = features.num_actions(), d = features.dim();
    check_ids(data, S, A);

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (const auto& x : data.samples) {
        auto phi = features(x.state, x.action);
        Eigen::Map<const Eigen::VectorXd> v(phi.data(), d);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(v);
        rhs += x.target * v;
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += lambda;

    Eigen::VectorXd w;
    bool pinv = false;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success && lambda > 0.0) {
        w = llt.solve(rhs);
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
        if (cod.rank() < d) {
            pinv = true;
            w = cod.solve(rhs);  // minimum-norm solution of the normal equations
        } else {
            w = llt.info() == Eigen::Success ? Eigen::VectorXd(llt.solve(rhs)) : Eigen::VectorXd(cod.solve(rhs));
        }
    }

    std::vector<double> values(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            auto phi = features(s, a);
            values[static_cast<std::size_t>(s) * A + a] = Eigen::Map<const Eigen::VectorXd>(phi.data(), d).dot(w);
        }
    QEstimate q(S, A, std::move(values));
    q.timestep = data.timestep;
    q.depth = data.depth;
    q.empty_data = data.samples.empty();
    q.used_pseudo_inverse = pinv;
    q.weights.assign(w.data(), w.data() + d);
    return q;
}

ExactQOracle::ExactQOracle(std::vector<QTable> sequence) : sequence_(std::move(sequence)) {
    if (sequence_.empty()) throw std::invalid_argument("ExactQOracle: empty Q sequence");
}

QEstimate ExactQOracle::fit(const RegressionDataset& data) const {
    if (data.depth < 1 || data.depth > static_cast<int>(sequence_.size()))
        throw std::out_of_range("ExactQOracle: no table for depth " + std::to_string(data.depth));
    const auto& q = sequence_[data.depth - 1];
    if (data.timestep < 0 || data.timestep >= q.horizon())
        throw std::out_of_range("ExactQOracle: timestep out of range");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(q.num_states()) * q.num_actions());
    for (int s = 0; s < q.num_states(); ++s)
        for (double v : q.row(data.timestep, s)) values.push_back(v);
    QEstimate out(q.num_states(), q.num_actions(), std::move(values));
    out.timestep = data.timestep;
    out.depth = data.depth;
    return out;
}

RegressionDataset monte_carlo_targets(const EpisodeBatch& batch, int t) {
    RegressionDataset data;
    data.timestep = t;
    data.depth = 1;
    data.samples.reserve(batch.episodes.size());
    for (const auto& ep : batch.episodes) {
        if (t < 0 || t >= ep.length()) throw std::out_of_range("monte_carlo_targets: timestep outside episode");
        data.samples.push_back({ep.states[t], ep.actions[t], clip01(ep.reward_to_go(t))});
    }
    return data;
}

RegressionDataset fqi_targets(const EpisodeBatch& batch, int t, const QEstimate& next_q) {
    RegressionDataset data;
    data.timestep = t;
    data.depth = next_q.depth + 1;
    data.samples.reserve(batch.episodes.size());
    for (const auto& ep : batch.episodes) {
        if (t < 0 || t + 1 >= ep.length())
            throw std::invalid_argument("fqi_targets: timestep " + std::to_string(t) +
                                        " has no successor; use Monte Carlo targets at the last timestep");
        const double y = ep.rewards[t] + next_q.max_value(ep.states[t + 1]);
        data.samples.push_back({ep.states[t], ep.actions[t], clip01(y)});
    }
    return data;
}

}  // namespace qvi
