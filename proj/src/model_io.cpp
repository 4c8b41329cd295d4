#include "tpine/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tpine/errors.hpp"
#include "tpine/io.hpp"

namespace tpine {

namespace fs = std::filesystem;

std::string to_string(InitMethod init) {
  return init == InitMethod::RandomUniform ? "random-uniform" : "random-normal";
}

InitMethod parse_init_method(const std::string& s) {
  if (s == "random-uniform") return InitMethod::RandomUniform;
  if (s == "random-normal") return InitMethod::RandomNormal;
  throw std::invalid_argument("unknown init method '" + s + "'");
}

nlohmann::json to_json(const AlsConfig& c) {
  return {{"rank", c.rank}, {"max_iters", c.max_iters}, {"tol", c.tol}, {"seed", c.seed}, {"init", to_string(c.init)}};
}

void save_model(const FactorModel<double>& model, const AlsConfig& config, const fs::path& dir) {
  model.check_shapes();
  fs::create_directories(dir);
  save_matrix(model.A, dir / "A.txt");
  save_matrix(model.B, dir / "B.txt");
  save_matrix(model.C, dir / "C.txt");
  save_matrix(model.scales, dir / "scales.txt");
  nlohmann::json meta = {{"config", to_json(config)},
                         {"rank", model.rank()},
                         {"num_nodes", model.num_nodes()},
                         {"num_views", model.num_views()},
                         {"iterations", model.iterations},
                         {"converged", model.converged},
                         {"fit_history", model.fit_history}};
  std::ofstream out(dir / "model.json", std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / "model.json").string());
  out << meta.dump(2) << '\n';
}

FactorModel<double> load_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("model directory " + dir.string() + " does not exist");
  FactorModel<double> model;
  model.A = load_matrix(dir / "A.txt");
  model.B = load_matrix(dir / "B.txt");
  model.C = load_matrix(dir / "C.txt");
  const Matrix<double> scales = load_matrix(dir / "scales.txt");
  if (scales.cols() != 1) throw DataError(dir.string() + "/scales.txt must be a single column");
  model.scales = scales.col(0);
  try {
    model.check_shapes();
  } catch (const std::invalid_argument& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
  if (model.A.rows() != model.B.rows()) throw DataError(dir.string() + ": A and B differ in row count");
  if (fs::exists(dir / "model.json")) {
    std::ifstream in(dir / "model.json");
    const auto meta = nlohmann::json::parse(in, nullptr, false);
    if (meta.is_discarded()) throw DataError(dir.string() + "/model.json is not valid JSON");
    model.fit_history = meta.value("fit_history", std::vector<double>{});
    model.iterations = meta.value("iterations", 0);
    model.converged = meta.value("converged", false);
  }
  return model;
}

void save_knn_view(const KnnView& view, const fs::path& path) { save_edge_list(view.edges(), path); }

KnnView load_knn_view(const fs::path& path, Index num_nodes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  KnnView view{num_nodes, 0, std::vector<std::vector<Index>>(num_nodes)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    Index u = -1, v = -1;
    std::string extra;
    if (!(fields >> u >> v) || (fields >> extra))
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'u v'");
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": node id out of range");
    if (u == v) throw DataError(path.string() + ":" + std::to_string(lineno) + ": K-NN view cannot contain self-loops");
    view.out_edges[u].push_back(v);
  }
  for (const auto& row : view.out_edges) view.k = std::max<Index>(view.k, static_cast<Index>(row.size()));
  return view;
}

}  // namespace tpine
