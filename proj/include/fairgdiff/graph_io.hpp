#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fairgdiff/graph.hpp"

namespace fairgdiff {

/// Column mapping for CSV ingestion. Raw sensitive columns may hold strings;
/// `sensitive_positive_value` maps equality with that raw value to 1 and
/// everything else to 0. When unset the column must already be 0/1.
struct NodeSchema {
  std::string id_column;
  std::string sensitive_column;
  std::optional<std::string> label_column;
  std::optional<std::string> sensitive_positive_value;
  /// Columns to use as features. Empty means: every remaining column that
  /// parses as a number (id, sensitive and label columns are always removed).
  std::vector<std::string> feature_columns;
};

struct LoadStats {
  int dropped_self_loops = 0;
  int deduplicated_edges = 0;
};

/// Raw ingestion: CSV node table with header plus a two-column edge list
/// (whitespace or comma separated node ids). Node ids are remapped densely
/// to 0..n-1 in order of first appearance in the node table. Duplicate and
/// reversed edges are deduplicated, self-loops dropped and counted.
AttributedGraph load_graph(const std::filesystem::path& node_table,
                           const std::filesystem::path& edge_list,
                           const NodeSchema& schema,
                           LoadStats* stats = nullptr);

/// Canonical JSON graph format, the bit-exact round-trip target:
/// {"schema_version":1, "name":..., "n":..., "edges":[[i,j],...] (i<j, sorted),
///  "features":[[...],...], "sensitive":[...], "labels":[...]|null}
void save_graph(const AttributedGraph& graph, const std::filesystem::path& path);
AttributedGraph load_graph(const std::filesystem::path& json_path);

}  // namespace fairgdiff
