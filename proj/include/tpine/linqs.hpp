#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tpine/data.hpp"
#include "tpine/io.hpp"

namespace tpine {

/// A citation dataset in the LINQS layout: `.content` rows of
/// "<id> <0/1 word flags...> <class>" and `.cites` rows of "<cited> <citing>".
/// Several file pairs (e.g. the four WebKB universities) merge into one graph.
struct LinqsDataset {
  IdMap nodes;
  std::vector<std::string> label_names;
  Graph graph;
  FeatureMatrix features;
  LabelSet labels;
  Index dangling_citations = 0;  // cites rows naming an id with no content row
};

LinqsDataset read_linqs(const std::vector<std::filesystem::path>& content_files,
                        const std::vector<std::filesystem::path>& cites_files);

/// Writes edges.txt, features.txt, labels.txt, nodes.txt and label_names.txt.
void write_dataset(const LinqsDataset& data, const std::filesystem::path& dir);

}  // namespace tpine
