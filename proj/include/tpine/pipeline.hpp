#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpine/cp_als.hpp"
#include "tpine/embedding.hpp"
#include "tpine/eval.hpp"
#include "tpine/interpret.hpp"

namespace tpine {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path edges;
  fs::path features;
  fs::path labels;
  std::optional<fs::path> node_ids;   // sidecar id map; fixes the node count
  std::optional<Index> num_nodes;
  Index k = 10;
  bool use_knn_view = true;           // false: adjacency-only tensor
  AlsConfig als;
  EmbeddingSource source = EmbeddingSource::A;
  std::vector<double> train_fractions{0.1, 0.5, 0.9};
  Index repeats = 10;
  double inverse_l2 = 1.0;
  std::optional<double> prune_threshold;
  fs::path run_dir;                   // empty: default_run_dir()

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);

/// `$TPINE_RUN_ROOT` (or ./runs) / run-<UTC timestamp>.
fs::path default_run_dir();

/// Failure inside one pipeline stage; `cause()` rethrows the original error.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, std::exception_ptr cause, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)), cause_(cause) {}

  const std::string& stage() const { return stage_; }
  [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

 private:
  std::string stage_;
  std::exception_ptr cause_;
};

struct RunResult {
  fs::path run_dir;
  nlohmann::json manifest;
  std::vector<EvalReport> evaluations;  // one per train fraction
  std::optional<PruningReport> pruning;
};

/// Stages: build-knn, stack, decompose, embed, evaluate, interpret. Every
/// intermediate artifact lands in the run directory alongside manifest.json;
/// on failure a FAILED marker names the stage and cause.
RunResult run_pipeline(const PipelineConfig& config);

enum class SweepParam { K, Rank };
SweepParam parse_sweep_param(const std::string& s);

struct SweepRow {
  Index value = 0;
  std::optional<EvalReport> report;
  std::string status;  // "ok" or the failure message
};

/// One pipeline run per value (sub-directories "<param>=<value>" of the run
/// directory), everything else held fixed. Failures are recorded per row.
/// Scores come from the first configured train fraction. Writes sweep.csv.
std::vector<SweepRow> sweep(const PipelineConfig& config, SweepParam param, const std::vector<Index>& values);

void save_sweep_csv(const std::vector<SweepRow>& rows, SweepParam param, const fs::path& path);

}  // namespace tpine
