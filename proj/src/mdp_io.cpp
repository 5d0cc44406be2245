#include "qvi/mdp_io.hpp"

#include <fstream>

namespace qvi {

using nlohmann::json;

json mdp_to_json(const TabularMdp& mdp) {
    const int T = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
    json doc;
    doc["horizon"] = T;
    doc["num_states"] = S;
    doc["num_actions"] = A;
    doc["initial_dist"] = mdp.initial_dist();
    json transitions = json::array();
    for (int t = 0; t + 1 < T; ++t) {
        json per_state = json::array();
        for (int s = 0; s < S; ++s) {
            json per_action = json::array();
            for (int a = 0; a < A; ++a) {
                auto row = mdp.successors(t, s, a);
                per_action.push_back(std::vector<double>(row.begin(), row.end()));
            }
            per_state.push_back(std::move(per_action));
        }
        transitions.push_back(std::move(per_state));
    }
    doc["transitions"] = std::move(transitions);
    json rewards = json::array();
    for (int t = 0; t < T; ++t) {
        json per_state = json::array();
        for (int s = 0; s < S; ++s) {
            std::vector<double> row(A);
            for (int a = 0; a < A; ++a) row[a] = mdp.reward(t, s, a);
            per_state.push_back(row);
        }
        rewards.push_back(std::move(per_state));
    }
    doc["rewards"] = std::move(rewards);
    const auto& meta = mdp.metadata();
    json m = json::object();
    if (!meta.name.empty()) m["name"] = meta.name;
    if (!meta.labels.empty()) m["labels"] = meta.labels;
    if (!meta.params_json.empty()) m["params"] = json::parse(meta.params_json);
    if (!m.empty()) doc["metadata"] = std::move(m);
    return doc;
}

namespace {

int read_dim(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_number_integer())
        throw StructuralError(std::string("missing or non-integer field '") + key + "'");
    return doc[key].get<int>();
}

const json& expect_array(const json& node, std::size_t size, const std::string& what) {
    if (!node.is_array() || node.size() != size)
        throw StructuralError(what + ": expected array of length " + std::to_string(size));
    return node;
}

}  // namespace

TabularMdp mdp_from_json(const json& doc) {
    if (!doc.is_object()) throw StructuralError("MDP document must be an object");
    const int T = read_dim(doc, "horizon");
    const int S = read_dim(doc, "num_states");
    const int A = read_dim(doc, "num_actions");
    if (T < 1 || S < 1 || A < 2) throw StructuralError("dimensions out of range");
    const double entries = static_cast<double>(S) * A * S * T;
    if (entries > kMaxDenseEntries)
        throw StructuralError("dense size S*A*S*T = " + std::to_string(entries) + " exceeds guard");

    std::vector<double> initial;
    try {
        initial = expect_array(doc.at("initial_dist"), S, "initial_dist").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw StructuralError(std::string("initial_dist: ") + e.what());
    }

    std::vector<std::vector<double>> transitions;
    const json empty = json::array();
    const json& tr = doc.contains("transitions") ? doc["transitions"] : empty;
    expect_array(tr, static_cast<std::size_t>(T - 1), "transitions");
    for (int t = 0; t + 1 < T; ++t) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(S) * A * S);
        const auto tag = "transitions[" + std::to_string(t) + "]";
        for (const auto& per_state : expect_array(tr[t], S, tag))
            for (const auto& row : expect_array(per_state, A, tag))
                for (const auto& p : expect_array(row, S, tag)) {
                    if (!p.is_number()) throw StructuralError(tag + ": non-numeric entry");
                    flat.push_back(p.get<double>());
                }
        transitions.push_back(std::move(flat));
    }

    std::vector<std::vector<double>> rewards;
    if (!doc.contains("rewards")) throw StructuralError("missing field 'rewards'");
    expect_array(doc["rewards"], T, "rewards");
    for (int t = 0; t < T; ++t) {
        std::vector<double> flat;
        const auto tag = "rewards[" + std::to_string(t) + "]";
        for (const auto& per_state : expect_array(doc["rewards"][t], S, tag))
            for (const auto& r : expect_array(per_state, A, tag)) {
                if (!r.is_number()) throw StructuralError(tag + ": non-numeric entry");
                flat.push_back(r.get<double>());
            }
        rewards.push_back(std::move(flat));
    }

    MdpMetadata meta;
    if (doc.contains("metadata")) {
        const auto& m = doc["metadata"];
        if (m.contains("name")) meta.name = m["name"].get<std::string>();
        if (m.contains("labels")) meta.labels = m["labels"].get<std::vector<std::string>>();
        if (m.contains("params")) meta.params_json = m["params"].dump();
    }
    return TabularMdp(T, S, A, std::move(initial), std::move(transitions), std::move(rewards), std::move(meta));
}

void save_mdp(const TabularMdp& mdp, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << mdp_to_json(mdp).dump(1) << "\n";
}

TabularMdp load_mdp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw StructuralError(std::string("parse error: ") + e.what());
    }
    return mdp_from_json(doc);
}

}  // namespace qvi
