#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "idnet/corpus.hpp"
#include "idnet/metrics.hpp"

namespace idnet {

enum class GraphFormat { graphml, dot };

GraphFormat parse_graph_format(std::string_view text);

struct GraphExport {
  const WeightedNetwork& network;
  const Vocabulary& vocabulary;
  const CommunityAssignment& communities;
  /// Share of publications per term; empty means zeros.
  std::span<const double> publication_share = {};
};

/// Nodes in vocabulary order with label, publication share and community id;
/// edges (i < j, non-zero weight) in index order with 12-digit weights.
std::string format_graphml(const GraphExport& graph);
std::string format_dot(const GraphExport& graph);

void export_graph(const GraphExport& graph, GraphFormat format, const std::filesystem::path& path);

}  // namespace idnet
