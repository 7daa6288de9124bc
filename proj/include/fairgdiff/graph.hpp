#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fairgdiff {

using BinaryMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Undirected attributed graph. The adjacency matrix is symmetric binary
/// with a zero diagonal; `features` holds the non-sensitive attributes only
/// (the sensitive column is kept separately in `sensitive`).
struct AttributedGraph {
  int n = 0;
  BinaryMatrix adjacency;
  Eigen::MatrixXd features;              // n x (d-1)
  Eigen::VectorXi sensitive;             // values in {0, 1}
  std::optional<Eigen::VectorXi> labels; // values in {0, 1} when present
  std::string name;

  std::int64_t edge_count() const;

  /// All edges as (i, j) with i < j, sorted lexicographically.
  std::vector<std::pair<int, int>> edges() const;

  Eigen::VectorXi degrees() const;

  bool has_edge(int i, int j) const {
    return adjacency(i, j) != 0;
  }

  /// Builds a graph from an i<j edge list; adjacency is symmetrized.
  static AttributedGraph from_edges(int n,
                                    const std::vector<std::pair<int, int>>& edges,
                                    Eigen::MatrixXd features,
                                    Eigen::VectorXi sensitive,
                                    std::optional<Eigen::VectorXi> labels,
                                    std::string name);

  /// Applies a node permutation: node i of the result is node perm[i] of
  /// this graph. Adjacency, features, sensitive and labels move together.
  AttributedGraph permuted(const std::vector<int>& perm) const;
};

struct Violation {
  std::string invariant;
  std::string detail;
};

/// Checks all structural invariants and reports every violation found.
/// Never throws and never mutates.
std::vector<Violation> validate(const AttributedGraph& graph);

}  // namespace fairgdiff
