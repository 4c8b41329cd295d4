#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "tpine/cp_als.hpp"
#include "tpine/factor_model.hpp"
#include "tpine/knn_view.hpp"

namespace tpine {

/// Model directory layout: A.txt, B.txt, C.txt (matrix files), scales.txt
/// (d x 1 matrix file) and model.json holding the ALS config and fit history.
void save_model(const FactorModel<double>& model, const AlsConfig& config, const std::filesystem::path& dir);
FactorModel<double> load_model(const std::filesystem::path& dir);

nlohmann::json to_json(const AlsConfig& config);
std::string to_string(InitMethod init);
InitMethod parse_init_method(const std::string& s);

/// Directed "u v" edge list, one line per selected neighbour.
void save_knn_view(const KnnView& view, const std::filesystem::path& path);
/// Reads a directed edge list back into a KnnView over `num_nodes` nodes;
/// k is recorded as the largest out-degree found.
KnnView load_knn_view(const std::filesystem::path& path, Index num_nodes);

}  // namespace tpine
