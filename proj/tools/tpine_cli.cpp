// Command-line front end: build-knn, decompose, embed, evaluate, interpret,
// reconstruct, run, sweep, convert-linqs.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tpine/errors.hpp"
#include "tpine/io.hpp"
#include "tpine/knn_view.hpp"
#include "tpine/linqs.hpp"
#include "tpine/model_io.hpp"
#include "tpine/pipeline.hpp"
#include "tpine/tensor.hpp"

namespace {

using namespace tpine;

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumerical = 3;

int exit_code_for(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    try {
      e.rethrow_cause();
    } catch (const DataError&) {
      return kData;
    } catch (const NumericalError&) {
      return kNumerical;
    } catch (const std::invalid_argument&) {
      return kUsage;
    } catch (const std::filesystem::filesystem_error&) {
      return kData;
    } catch (...) {
      return kNumerical;
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kNumerical;
}

void write_text(const nlohmann::json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

struct AlsFlags {
  Index rank = 128;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int max_iters = 100;
  std::string init = "random-uniform";

  void add(CLI::App* cmd) {
    cmd->add_option("--rank,-d", rank, "CP rank / embedding dimension")->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--tol", tol, "stop when |fit change| < tol")->capture_default_str();
    cmd->add_option("--max-iters", max_iters, "ALS sweep limit")->capture_default_str();
    cmd->add_option("--init", init, "random-uniform | random-normal")->capture_default_str();
  }
  AlsConfig config() const {
    AlsConfig c;
    c.rank = rank;
    c.seed = seed;
    c.tol = tol;
    c.max_iters = max_iters;
    c.init = parse_init_method(init);
    return c;
  }
};

struct PipelineFlags {
  PipelineConfig config;
  AlsFlags als;
  std::string source = "A";
  std::string run_dir;
  std::string node_ids;
  Index num_nodes = 0;
  double prune = -1;
  bool no_knn = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--edges", config.edges, "edge list")->required();
    cmd->add_option("--features", config.features, "node features");
    cmd->add_option("--labels", config.labels, "node labels")->required();
    cmd->add_option("--nodes", node_ids, "external id map (fixes the node count)");
    cmd->add_option("--num-nodes", num_nodes, "node count override");
    cmd->add_option("--k", config.k, "neighbours per node")->capture_default_str();
    cmd->add_flag("--no-knn", no_knn, "factorize the adjacency view alone");
    als.add(cmd);
    cmd->add_option("--source", source, "embedding source: A | B | A-concat-B")->capture_default_str();
    cmd->add_option("--train-fractions", config.train_fractions, "train fractions")->capture_default_str();
    cmd->add_option("--repeats", config.repeats, "random splits per fraction")->capture_default_str();
    cmd->add_option("--inverse-l2", config.inverse_l2, "logistic regression C")->capture_default_str();
    cmd->add_option("--prune-threshold", prune, "dimension pruning threshold");
    cmd->add_option("--run-dir", run_dir, "output directory (default $TPINE_RUN_ROOT/run-<time>)");
  }
  PipelineConfig finish() {
    config.als = als.config();
    config.source = parse_embedding_source(source);
    config.use_knn_view = !no_knn;
    if (!run_dir.empty()) config.run_dir = run_dir;
    if (!node_ids.empty()) config.node_ids = node_ids;
    if (num_nodes > 0) config.num_nodes = num_nodes;
    if (prune >= 0) config.prune_threshold = prune;
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view tensor node embeddings: K-NN view + adjacency, CP-ALS, evaluation"};
  app.require_subcommand(1);

  // build-knn
  std::string features_path, knn_out;
  Index k = 10;
  auto* build_knn = app.add_subcommand("build-knn", "Build the directed cosine K-NN view from features");
  build_knn->add_option("--features", features_path, "node features")->required();
  build_knn->add_option("--k", k, "neighbours per node")->required();
  build_knn->add_option("--out", knn_out, "output edge list")->required();
  Index knn_nodes = 0;
  build_knn->add_option("--num-nodes", knn_nodes, "node count override");

  // decompose
  std::string adj_path, knn_path, model_out;
  Index decomp_nodes = 0;
  AlsFlags decomp_als;
  auto* decomp = app.add_subcommand("decompose", "CP-ALS on the stacked adjacency / K-NN tensor");
  decomp->add_option("--adj", adj_path, "adjacency edge list")->required();
  decomp->add_option("--knn", knn_path, "K-NN directed edge list (omit for adjacency only)");
  decomp->add_option("--num-nodes", decomp_nodes, "node count override");
  decomp_als.add(decomp);
  decomp->add_option("--out", model_out, "model directory")->required();

  // embed
  std::string model_dir, emb_out, source = "A";
  double embed_prune = -1;
  auto* embed = app.add_subcommand("embed", "Extract node embeddings from a model");
  embed->add_option("--model", model_dir, "model directory")->required();
  embed->add_option("--source", source, "A | B | A-concat-B")->capture_default_str();
  embed->add_option("--out", emb_out, "embedding file")->required();
  embed->add_option("--prune-threshold", embed_prune, "drop low-weight dimensions");

  // evaluate
  std::string emb_path, labels_path, report_out;
  EvalConfig eval_cfg;
  auto* eval = app.add_subcommand("evaluate", "One-vs-rest logistic regression, micro/macro F1");
  eval->add_option("--embeddings", emb_path, "embedding file")->required();
  eval->add_option("--labels", labels_path, "label file")->required();
  eval->add_option("--train-fraction", eval_cfg.train_fraction)->capture_default_str();
  eval->add_option("--repeats", eval_cfg.repeats)->capture_default_str();
  eval->add_option("--seed", eval_cfg.seed)->capture_default_str();
  eval->add_option("--inverse-l2", eval_cfg.train.inverse_l2)->capture_default_str();
  eval->add_option("--out", report_out, "report JSON")->required();

  // interpret
  std::string interp_model, interp_out, interp_labels, interp_report, interp_emb;
  double threshold = 0.12;
  bool prune_eval = false;
  EvalConfig interp_eval;
  auto* interp = app.add_subcommand("interpret", "View weights from factor C; optional pruning evaluation");
  interp->add_option("--model", interp_model, "model directory")->required();
  interp->add_option("--threshold", threshold)->capture_default_str();
  interp->add_option("--out", interp_out, "view weight CSV")->required();
  interp->add_flag("--prune-eval", prune_eval, "evaluate before/after pruning (needs --labels, --report)");
  interp->add_option("--labels", interp_labels);
  interp->add_option("--embeddings", interp_emb, "embedding file (default: scaled A from the model)");
  interp->add_option("--report", interp_report, "pruning report JSON");
  interp->add_option("--train-fraction", interp_eval.train_fraction)->capture_default_str();
  interp->add_option("--repeats", interp_eval.repeats)->capture_default_str();
  interp->add_option("--seed", interp_eval.seed)->capture_default_str();

  // reconstruct
  std::string recon_model, recon_out;
  Index recon_view = 0;
  auto* recon = app.add_subcommand("reconstruct", "Dense reconstruction of one view as CSV");
  recon->add_option("--model", recon_model, "model directory")->required();
  recon->add_option("--view", recon_view, "view index (0 = adjacency, 1 = K-NN)")->capture_default_str();
  recon->add_option("--out", recon_out, "CSV output")->required();

  // run / sweep
  PipelineFlags run_flags;
  auto* run = app.add_subcommand("run", "Full pipeline into one run directory");
  run_flags.add(run);

  PipelineFlags sweep_flags;
  std::string sweep_param;
  std::vector<Index> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sensitivity over k or d");
  sweep_flags.add(sweep_cmd);
  sweep_cmd->add_option("--param", sweep_param, "k or d")->required();
  sweep_cmd->add_option("--values", sweep_values, "values to try")->required();

  // convert-linqs
  std::vector<std::filesystem::path> contents, cites;
  std::string convert_out;
  auto* convert = app.add_subcommand("convert-linqs", "Convert .content/.cites files to the text formats");
  convert->add_option("--content", contents, ".content file(s)")->required();
  convert->add_option("--cites", cites, ".cites file(s)")->required();
  convert->add_option("--out-dir", convert_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*build_knn) {
      auto features = load_features(features_path, knn_nodes > 0 ? std::optional<Index>(knn_nodes) : std::nullopt);
      auto view = build_knn_view(features, k);
      save_knn_view(view, knn_out);
      std::cout << "directed edges: " << view.num_edges() << " (k * |V| = " << k * view.num_nodes << ")\n";
      if (auto short_nodes = view.short_nodes(); !short_nodes.empty())
        std::cout << short_nodes.size() << " nodes have fewer than k positive similarities\n";
    } else if (*decomp) {
      const auto cfg = decomp_als.config();
      auto graph = load_edge_list(adj_path, decomp_nodes > 0 ? std::optional<Index>(decomp_nodes) : std::nullopt);
      auto tensor = knn_path.empty() ? adjacency_only<double>(graph)
                                     : stack_views<double>(graph, load_knn_view(knn_path, graph.num_nodes));
      auto model = decompose(tensor, cfg);
      save_model(model, cfg, model_out);
      std::cout << "iterations: " << model.iterations << ", converged: " << std::boolalpha << model.converged
                << ", fit: " << model.fit_history.back() << '\n';
    } else if (*embed) {
      auto model = load_model(model_dir);
      auto emb = extract_embeddings(model, parse_embedding_source(source));
      if (embed_prune >= 0) {
        auto pruned = prune_dimensions(emb, model, embed_prune);
        std::cout << "removed " << pruned.removed.size() << " of " << model.rank() << " dimensions\n";
        emb = pruned.embedding;
      }
      save_embeddings(emb, emb_out);
    } else if (*eval) {
      auto emb = load_embeddings(emb_path);
      auto labels = align_labels(load_labels(labels_path), emb.num_nodes());
      auto report = evaluate(emb, labels, eval_cfg);
      write_text(to_json(report), report_out);
      std::cout << "micro-F1 " << report.micro_f1_mean << " +/- " << report.micro_f1_std << ", macro-F1 "
                << report.macro_f1_mean << '\n';
    } else if (*interp) {
      auto model = load_model(interp_model);
      save_view_weights_csv(view_weights(model, threshold), interp_out);
      if (prune_eval) {
        if (interp_labels.empty() || interp_report.empty())
          throw std::invalid_argument("--prune-eval needs --labels and --report");
        auto emb = interp_emb.empty() ? extract_embeddings(model, EmbeddingSource::A) : load_embeddings(interp_emb);
        auto labels = align_labels(load_labels(interp_labels), emb.num_nodes());
        auto report = pruning_report(model, emb, labels, threshold, interp_eval);
        write_text(to_json(report), interp_report);
        std::cout << "removed " << report.removed.size() << " dimensions; micro-F1 " << report.before.micro_f1_mean
                  << " -> " << report.after.micro_f1_mean << '\n';
      }
    } else if (*recon) {
      save_csv(reconstruct_view(load_model(recon_model), recon_view), recon_out);
    } else if (*run) {
      auto result = run_pipeline(run_flags.finish());
      std::cout << "run directory: " << result.run_dir.string() << '\n';
      for (const auto& r : result.evaluations)
        std::cout << "train " << r.train_fraction << ": micro-F1 " << r.micro_f1_mean << '\n';
    } else if (*sweep_cmd) {
      auto cfg = sweep_flags.finish();
      if (cfg.run_dir.empty()) cfg.run_dir = default_run_dir();
      auto rows = sweep(cfg, parse_sweep_param(sweep_param), sweep_values);
      std::cout << "sweep written to " << (cfg.run_dir / "sweep.csv").string() << '\n';
      for (const auto& row : rows)
        std::cout << sweep_param << '=' << row.value << ": "
                  << (row.report ? std::to_string(row.report->micro_f1_mean) : row.status) << '\n';
    } else if (*convert) {
      auto data = read_linqs(contents, cites);
      write_dataset(data, convert_out);
      std::cout << data.nodes.ids.size() << " nodes, " << data.graph.edges.size() << " edges, "
                << data.features.num_features() << " features, " << data.label_names.size() << " labels";
      if (data.dangling_citations) std::cout << " (" << data.dangling_citations << " citations to unknown ids dropped)";
      std::cout << '\n';
    }
  } catch (...) {
    return exit_code_for(std::current_exception());
  }
  return 0;
}
