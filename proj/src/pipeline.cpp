#include "tpine/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>

#include "tpine/checksum.hpp"
#include "tpine/errors.hpp"
#include "tpine/io.hpp"
#include "tpine/knn_view.hpp"
#include "tpine/model_io.hpp"
#include "tpine/tensor.hpp"

namespace tpine {

namespace {

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string param_name(SweepParam p) { return p == SweepParam::K ? "k" : "d"; }

}  // namespace

void PipelineConfig::validate() const {
  if (edges.empty()) throw std::invalid_argument("edge list path is required");
  if (use_knn_view && features.empty()) throw std::invalid_argument("feature path is required for the K-NN view");
  if (labels.empty()) throw std::invalid_argument("label path is required");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (!(inverse_l2 > 0)) throw std::invalid_argument("inverse L2 strength must be > 0");
  if (num_nodes && *num_nodes < 1) throw std::invalid_argument("node count must be >= 1");
  if (train_fractions.empty()) throw std::invalid_argument("at least one train fraction is required");
  for (double f : train_fractions)
    if (!(f > 0 && f < 1)) throw std::invalid_argument("train fractions must lie in (0, 1)");
  if (prune_threshold && !(*prune_threshold >= 0)) throw std::invalid_argument("prune threshold must be >= 0");
  als.validate();
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j = {{"edges", c.edges.string()},
                      {"features", c.features.string()},
                      {"labels", c.labels.string()},
                      {"k", c.k},
                      {"use_knn_view", c.use_knn_view},
                      {"als", to_json(c.als)},
                      {"embedding_source", to_string(c.source)},
                      {"train_fractions", c.train_fractions},
                      {"repeats", c.repeats},
                      {"inverse_l2", c.inverse_l2},
                      {"prune_threshold", nullptr},
                      {"node_ids", nullptr},
                      {"num_nodes", nullptr}};
  if (c.prune_threshold) j["prune_threshold"] = *c.prune_threshold;
  if (c.node_ids) j["node_ids"] = c.node_ids->string();
  if (c.num_nodes) j["num_nodes"] = *c.num_nodes;
  return j;
}

fs::path default_run_dir() {
  const char* root_env = std::getenv("TPINE_RUN_ROOT");
  const fs::path root = root_env && *root_env ? fs::path(root_env) : fs::path("runs");
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "run-%Y%m%d-%H%M%S", &utc);
  fs::path dir = root / stamp;
  for (int i = 1; fs::exists(dir); ++i) dir = root / (std::string(stamp) + "-" + std::to_string(i));
  return dir;
}

RunResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  RunResult result;
  result.run_dir = config.run_dir.empty() ? default_run_dir() : config.run_dir;
  const fs::path& dir = result.run_dir;
  fs::create_directories(dir);
  fs::remove(dir / "FAILED");

  nlohmann::json& manifest = result.manifest;
  manifest = {{"config", to_json(config)}, {"status", "running"}, {"stages", nlohmann::json::array()}};

  auto stage = [&](const std::string& name, const std::function<nlohmann::json()>& body) {
    try {
      nlohmann::json info = body();
      info["name"] = name;
      if (!info.contains("status")) info["status"] = "ok";
      manifest["stages"].push_back(std::move(info));
    } catch (const std::exception& e) {
      manifest["status"] = "failed";
      manifest["failed_stage"] = name;
      manifest["error"] = e.what();
      manifest["stages"].push_back({{"name", name}, {"status", "failed"}, {"error", e.what()}});
      std::ofstream(dir / "FAILED") << "stage: " << name << "\nerror: " << e.what() << '\n';
      write_json(manifest, dir / "manifest.json");
      throw StageError(name, std::current_exception(), e.what());
    }
  };

  Graph graph;
  FeatureMatrix features;
  KnnView knn;
  Tensor3<double> tensor;
  FactorModel<double> model;
  EmbeddingMatrix embedding;
  LabelSet labels;
  Index num_nodes = 0;

  stage("build-knn", [&]() -> nlohmann::json {
    nlohmann::json inputs = {{"edges", {{"path", config.edges.string()}, {"sha256", sha256_file(config.edges)}}}};
    std::optional<Index> fixed = config.num_nodes;
    if (config.node_ids) {
      inputs["node_ids"] = {{"path", config.node_ids->string()}, {"sha256", sha256_file(*config.node_ids)}};
      const auto ids = load_id_map(*config.node_ids);
      if (fixed && *fixed != static_cast<Index>(ids.ids.size()))
        throw DataError("node count " + std::to_string(*fixed) + " disagrees with id map size " +
                        std::to_string(ids.ids.size()));
      fixed = static_cast<Index>(ids.ids.size());
    }
    graph = load_edge_list(config.edges, fixed);
    num_nodes = graph.num_nodes;
    nlohmann::json info = {{"graph",
                            {{"num_nodes", graph.num_nodes},
                             {"num_edges", graph.edges.size()},
                             {"self_loops_dropped", graph.self_loops_dropped},
                             {"duplicates_dropped", graph.duplicates_dropped}}}};
    if (!config.use_knn_view) {
      manifest["inputs"] = inputs;
      info["status"] = "skipped";
      return info;
    }
    inputs["features"] = {{"path", config.features.string()}, {"sha256", sha256_file(config.features)}};
    manifest["inputs"] = inputs;
    features = load_features(config.features, fixed);
    if (!fixed && features.num_nodes() != num_nodes) {
      num_nodes = std::max(num_nodes, features.num_nodes());
      graph.num_nodes = num_nodes;
      features.values.conservativeResize(num_nodes, features.num_features());
    }
    knn = build_knn_view(features, config.k);
    save_knn_view(knn, dir / "knn_view.txt");
    const auto short_nodes = knn.short_nodes();
    {
      std::ofstream out(dir / "knn_shortfall.csv", std::ios::trunc);
      out << "node,out_degree\n";
      for (Index v : short_nodes) out << v << ',' << knn.out_edges[v].size() << '\n';
    }
    info["graph"]["num_nodes"] = num_nodes;
    info["knn"] = {{"k", config.k},
                   {"num_features", features.num_features()},
                   {"directed_edges", knn.num_edges()},
                   {"full_count", config.k * num_nodes},
                   {"nodes_below_k", short_nodes.size()}};
    return info;
  });

  stage("stack", [&]() -> nlohmann::json {
    tensor = config.use_knn_view ? stack_views<double>(graph, knn) : adjacency_only<double>(graph);
    return {{"dims", {tensor.dim(0), tensor.dim(1), tensor.dim(2)}}, {"nnz", tensor.nnz()}};
  });

  stage("decompose", [&]() -> nlohmann::json {
    model = decompose(tensor, config.als);
    save_model(model, config.als, dir / "model");
    return {{"iterations", model.iterations},
            {"converged", model.converged},
            {"final_fit", model.fit_history.empty() ? 0.0 : model.fit_history.back()}};
  });
  manifest["fit_history"] = model.fit_history;

  stage("embed", [&]() -> nlohmann::json {
    embedding = extract_embeddings(model, config.source);
    save_embeddings(embedding, dir / "embeddings.txt");
    return {{"source", to_string(config.source)}, {"dim", embedding.dim()}};
  });

  auto eval_config = [&](double fraction) {
    EvalConfig ec;
    ec.train_fraction = fraction;
    ec.repeats = config.repeats;
    ec.seed = config.als.seed;
    ec.train.inverse_l2 = config.inverse_l2;
    return ec;
  };

  stage("evaluate", [&]() -> nlohmann::json {
    manifest["inputs"]["labels"] = {{"path", config.labels.string()}, {"sha256", sha256_file(config.labels)}};
    labels = align_labels(load_labels(config.labels), num_nodes);
    nlohmann::json reports = nlohmann::json::array();
    for (double fraction : config.train_fractions) {
      result.evaluations.push_back(evaluate(embedding, labels, eval_config(fraction)));
      reports.push_back(to_json(result.evaluations.back()));
    }
    write_json(reports, dir / "evaluation.json");
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& r : result.evaluations)
      summary.push_back({{"train_fraction", r.train_fraction}, {"micro_f1_mean", r.micro_f1_mean}});
    return {{"labeled_nodes", labels.labeled_nodes().size()}, {"num_labels", labels.num_labels}, {"summary", summary}};
  });

  stage("interpret", [&]() -> nlohmann::json {
    save_view_weights_csv(view_weights(model, config.prune_threshold), dir / "view_weights.csv");
    if (!config.prune_threshold) return nlohmann::json::object();
    const EmbeddingMatrix base =
        embedding.dim() == model.rank() ? embedding : extract_embeddings(model, EmbeddingSource::A);
    result.pruning = pruning_report(model, base, labels, *config.prune_threshold,
                                    eval_config(config.train_fractions.front()));
    write_json(to_json(*result.pruning), dir / "pruning.json");
    return {{"threshold", *config.prune_threshold},
            {"removed", result.pruning->removed.size()},
            {"micro_f1_delta", result.pruning->micro_f1_delta}};
  });

  manifest["status"] = "ok";
  manifest["evaluations"] = nlohmann::json::array();
  for (const auto& r : result.evaluations) manifest["evaluations"].push_back(to_json(r));
  if (result.pruning) manifest["pruning"] = to_json(*result.pruning);
  write_json(manifest, dir / "manifest.json");
  return result;
}

SweepParam parse_sweep_param(const std::string& s) {
  if (s == "k" || s == "K") return SweepParam::K;
  if (s == "d" || s == "rank") return SweepParam::Rank;
  throw std::invalid_argument("sweep parameter must be 'k' or 'd', got '" + s + "'");
}

std::vector<SweepRow> sweep(const PipelineConfig& config, SweepParam param, const std::vector<Index>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (std::set<Index>(values.begin(), values.end()).size() != values.size())
    throw std::invalid_argument("sweep values contain duplicates");
  const fs::path root = config.run_dir.empty() ? default_run_dir() : config.run_dir;
  fs::create_directories(root);

  std::vector<SweepRow> rows;
  for (Index value : values) {
    PipelineConfig sub = config;
    (param == SweepParam::K ? sub.k : sub.als.rank) = value;
    sub.train_fractions = {config.train_fractions.front()};
    sub.prune_threshold.reset();
    sub.run_dir = root / (param_name(param) + "=" + std::to_string(value));
    SweepRow row{value, std::nullopt, "ok"};
    try {
      row.report = run_pipeline(sub).evaluations.front();
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  save_sweep_csv(rows, param, root / "sweep.csv");
  return rows;
}

void save_sweep_csv(const std::vector<SweepRow>& rows, SweepParam param, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << param_name(param) << ",micro_f1_mean,micro_f1_std,macro_f1_mean,status\n";
  for (const auto& row : rows) {
    out << row.value << ',';
    if (row.report)
      out << format_double(row.report->micro_f1_mean) << ',' << format_double(row.report->micro_f1_std) << ','
          << format_double(row.report->macro_f1_mean) << ",ok\n";
    else {
      std::string msg = row.status;
      std::replace(msg.begin(), msg.end(), '"', '\'');
      out << ",,,\"" << msg << "\"\n";
    }
  }
}

}  // namespace tpine
