#include "tpine/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tpine/errors.hpp"
#include "tpine/io.hpp"

namespace tpine {

void save_view_weights_csv(const ViewWeightTable& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "dimension";
  for (Index l = 0; l < table.num_views(); ++l) out << ",view_" << l;
  if (table.threshold) out << ",max_weight,kept";
  out << '\n';
  for (Index r = 0; r < table.num_dims(); ++r) {
    out << r;
    for (Index l = 0; l < table.num_views(); ++l) out << ',' << format_double(table.weights(l, r));
    if (table.threshold) {
      const double w = table.weights.col(r).maxCoeff();
      out << ',' << format_double(w) << ',' << (w < *table.threshold ? 0 : 1);
    }
    out << '\n';
  }
}

double pearson(const Eigen::Ref<const Vector<double>>& a, const Eigen::Ref<const Vector<double>>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
  const Vector<double> ca = a.array() - a.mean();
  const Vector<double> cb = b.array() - b.mean();
  const double na = ca.norm(), nb = cb.norm();
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

std::vector<double> dimension_correlation(const EmbeddingMatrix& emb, const std::vector<Index>& removed) {
  if (emb.num_nodes() < 3) throw std::invalid_argument("dimension_correlation needs >= 3 nodes");
  std::vector<bool> is_removed(emb.dim(), false);
  for (Index r : removed) {
    if (r < 0 || r >= emb.dim()) throw std::invalid_argument("removed dimension out of range");
    is_removed[r] = true;
  }
  std::vector<Index> kept;
  for (Index r = 0; r < emb.dim(); ++r)
    if (!is_removed[r]) kept.push_back(r);
  if (kept.size() < 2) throw std::invalid_argument("dimension_correlation needs >= 2 surviving dimensions");

  std::vector<double> out;
  out.reserve(removed.size());
  for (Index r : removed) {
    double best = 0;
    for (Index k : kept) best = std::max(best, std::abs(pearson(emb.matrix().col(r), emb.matrix().col(k))));
    out.push_back(best);
  }
  return out;
}

nlohmann::json to_json(const PruningReport& r) {
  return {{"threshold", r.threshold},
          {"removed_dimensions", r.removed},
          {"kept_dimensions", r.kept},
          {"num_removed", r.removed.size()},
          {"before", to_json(r.before)},
          {"after", to_json(r.after)},
          {"micro_f1_delta", r.micro_f1_delta},
          {"removed_max_abs_pearson", r.removed_max_correlation}};
}

}  // namespace tpine
