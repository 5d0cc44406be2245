#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "qvi/mdp.hpp"

namespace qvi {

/// Dense entry guard: files with S*A*S*T above this are rejected.
inline constexpr double kMaxDenseEntries = 1e8;

/**
 * MDP document:
 *   { "horizon": T, "num_states": S, "num_actions": A,
 *     "initial_dist": [S],
 *     "transitions": [T-1][S][A][S],
 *     "rewards": [T][S][A],
 *     "metadata": { "name": ..., "labels": [...], "params": {...} } }
 * Schema in docs/mdp.schema.json.
 */
nlohmann::json mdp_to_json(const TabularMdp& mdp);

/// Throws StructuralError on malformed documents or size-guard failures.
TabularMdp mdp_from_json(const nlohmann::json& doc);

void save_mdp(const TabularMdp& mdp, const std::filesystem::path& path);
TabularMdp load_mdp(const std::filesystem::path& path);

}  // namespace qvi
