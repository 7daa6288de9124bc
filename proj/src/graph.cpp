#include "fairgdiff/graph.hpp"

#include <cmath>
#include <sstream>

#include "fairgdiff/error.hpp"

namespace fairgdiff {

std::int64_t AttributedGraph::edge_count() const {
  std::int64_t twice = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) twice += adjacency(i, j) != 0;
  return twice / 2;
}

std::vector<std::pair<int, int>> AttributedGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adjacency(i, j) != 0) out.emplace_back(i, j);
  return out;
}

Eigen::VectorXi AttributedGraph::degrees() const {
  Eigen::VectorXi deg = Eigen::VectorXi::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (adjacency(i, j) != 0) deg[i] += 1;
  return deg;
}

AttributedGraph AttributedGraph::from_edges(
    int n, const std::vector<std::pair<int, int>>& edges,
    Eigen::MatrixXd features, Eigen::VectorXi sensitive,
    std::optional<Eigen::VectorXi> labels, std::string name) {
  AttributedGraph g;
  g.n = n;
  g.adjacency = BinaryMatrix::Zero(n, n);
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw precondition_error("edge endpoint out of range");
    if (i == j) continue;
    g.adjacency(i, j) = 1;
    g.adjacency(j, i) = 1;
  }
  g.features = std::move(features);
  g.sensitive = std::move(sensitive);
  g.labels = std::move(labels);
  g.name = std::move(name);
  return g;
}

AttributedGraph AttributedGraph::permuted(const std::vector<int>& perm) const {
  AttributedGraph g;
  g.n = n;
  g.name = name;
  g.adjacency = BinaryMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.adjacency(i, j) = adjacency(perm[i], perm[j]);
  g.features.resize(n, features.cols());
  g.sensitive.resize(n);
  for (int i = 0; i < n; ++i) {
    g.features.row(i) = features.row(perm[i]);
    g.sensitive[i] = sensitive[perm[i]];
  }
  if (labels) {
    Eigen::VectorXi lab(n);
    for (int i = 0; i < n; ++i) lab[i] = (*labels)[perm[i]];
    g.labels = lab;
  }
  return g;
}

std::vector<Violation> validate(const AttributedGraph& graph) {
  std::vector<Violation> out;
  const int n = graph.n;
  auto at = [](int i, int j) {
    std::ostringstream os;
    os << "(" << i << "," << j << ")";
    return os.str();
  };
  if (n < 0) {
    out.push_back({"node-count", "n is negative"});
    return out;
  }
  if (graph.adjacency.rows() != n || graph.adjacency.cols() != n)
    out.push_back({"adjacency-shape", "adjacency is not n x n"});
  else {
    for (int i = 0; i < n; ++i) {
      if (graph.adjacency(i, i) != 0)
        out.push_back({"zero-diagonal", "self-loop at node " + std::to_string(i)});
      for (int j = i + 1; j < n; ++j) {
        if (graph.adjacency(i, j) != graph.adjacency(j, i))
          out.push_back({"symmetry", "asymmetric entry at " + at(i, j)});
        if (graph.adjacency(i, j) > 1)
          out.push_back({"binary-adjacency", "non-binary entry at " + at(i, j)});
      }
    }
  }
  if (graph.sensitive.size() != n)
    out.push_back({"sensitive-length", "sensitive vector is not length n"});
  else
    for (int i = 0; i < n; ++i)
      if (graph.sensitive[i] != 0 && graph.sensitive[i] != 1)
        out.push_back({"sensitive-domain",
                       "sensitive[" + std::to_string(i) + "] = " +
                           std::to_string(graph.sensitive[i])});
  if (graph.labels) {
    if (graph.labels->size() != n)
      out.push_back({"labels-length", "label vector is not length n"});
    else
      for (int i = 0; i < n; ++i)
        if ((*graph.labels)[i] != 0 && (*graph.labels)[i] != 1)
          out.push_back({"labels-domain",
                         "labels[" + std::to_string(i) + "] = " +
                             std::to_string((*graph.labels)[i])});
  }
  if (graph.features.rows() != n)
    out.push_back({"features-shape", "feature matrix does not have n rows"});
  for (int i = 0; i < graph.features.rows(); ++i)
    for (int j = 0; j < graph.features.cols(); ++j)
      if (!std::isfinite(graph.features(i, j))) {
        out.push_back({"features-finite", "non-finite feature at " + at(i, j)});
        i = static_cast<int>(graph.features.rows());  // one report is enough
        break;
      }
  return out;
}

}  // namespace fairgdiff
