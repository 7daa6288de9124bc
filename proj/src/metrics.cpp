#include "fairgdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fairgdiff/error.hpp"
#include "fairgdiff/rng.hpp"

namespace fairgdiff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t choose2(std::int64_t d) { return d * (d - 1) / 2; }
std::int64_t choose3(std::int64_t d) { return d * (d - 1) * (d - 2) / 6; }

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

GraphStats graph_stats(const AttributedGraph& graph) {
  if (graph.n < 1) throw precondition_error("graph_stats: graph has no nodes");
  const int n = graph.n;
  GraphStats s;

  const Eigen::VectorXi deg = graph.degrees();
  const std::int64_t deg_sum = deg.cast<std::int64_t>().sum();
  const std::int64_t edge_count = deg_sum / 2;
  s.max_degree = deg.maxCoeff();
  s.avg_degree = static_cast<double>(deg_sum) / n;

  for (int v = 0; v < n; ++v) {
    s.wedge_count += choose2(deg[v]);
    s.claw_count += choose3(deg[v]);
  }

  // triangles: common-neighbor count per edge, each triangle seen 3 times
  std::int64_t tri3 = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!graph.adjacency(i, j)) continue;
      for (int k = 0; k < n; ++k)
        if (graph.adjacency(i, k) && graph.adjacency(j, k)) ++tri3;
    }
  }
  s.triangle_count = tri3 / 3;

  // Gini over the degree sequence via the mean-absolute-difference identity
  if (deg_sum == 0) {
    s.gini = kNaN;
  } else {
    std::vector<std::int64_t> sorted(deg.data(), deg.data() + n);
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += static_cast<double>(2 * (i + 1) - n - 1) * sorted[i];
    s.gini = acc / (static_cast<double>(n) * deg_sum);
  }

  if (edge_count == 0) {
    s.edge_dist_entropy = kNaN;
  } else {
    double h = 0.0;
    for (int v = 0; v < n; ++v) {
      if (deg[v] == 0) continue;
      const double p = static_cast<double>(deg[v]) / (2.0 * edge_count);
      h -= p * std::log(p);
    }
    s.edge_dist_entropy = h;
  }

  s.clustering_coeff = s.wedge_count == 0
                           ? kNaN
                           : 3.0 * s.triangle_count / s.wedge_count;

  // Pearson degree correlation over directed edge endpoints
  {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::int64_t m2 = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (graph.adjacency(i, j)) {
          const double x = deg[i], y = deg[j];
          sx += x;
          sy += y;
          sxx += x * x;
          syy += y * y;
          sxy += x * y;
          ++m2;
        }
    if (m2 == 0) {
      s.assortativity = kNaN;
    } else {
      const double mx = sx / m2, my = sy / m2;
      const double vx = sxx / m2 - mx * mx, vy = syy / m2 - my * my;
      const double cov = sxy / m2 - mx * my;
      s.assortativity =
          (vx <= 0.0 || vy <= 0.0) ? kNaN : cov / std::sqrt(vx * vy);
    }
  }

  UnionFind uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (graph.adjacency(i, j)) uf.unite(i, j);
  std::vector<int> comp_size(n, 0);
  for (int i = 0; i < n; ++i) ++comp_size[uf.find(i)];
  for (int c : comp_size) {
    if (c > 0) ++s.num_components;
    s.largest_cc = std::max(s.largest_cc, c);
  }
  return s;
}

double topology_bias_ratio(const AttributedGraph& graph, int edge_state) {
  if (edge_state != 0 && edge_state != 1)
    throw precondition_error("topology_bias_ratio: edge state must be 0 or 1");
  std::int64_t same_pairs = 0, cross_pairs = 0;
  std::int64_t same_hits = 0, cross_hits = 0;
  for (int i = 0; i < graph.n; ++i) {
    for (int j = i + 1; j < graph.n; ++j) {
      const bool same = graph.sensitive[i] == graph.sensitive[j];
      const bool hit = (graph.adjacency(i, j) != 0) == (edge_state == 1);
      if (same) {
        ++same_pairs;
        same_hits += hit;
      } else {
        ++cross_pairs;
        cross_hits += hit;
      }
    }
  }
  if (same_pairs == 0 || cross_pairs == 0)
    throw precondition_error(
        "topology_bias_ratio: need both a same-group and a cross-group pair");
  const double p_same = static_cast<double>(same_hits) / same_pairs;
  const double p_cross = static_cast<double>(cross_hits) / cross_pairs;
  if (p_cross == 0.0)
    throw precondition_error(
        "topology_bias_ratio: undefined ratio, cross-group probability is 0");
  return p_same / p_cross;
}

namespace {

double group_rate(const Eigen::VectorXi& predictions,
                  const Eigen::VectorXi& mask_values, int group,
                  const Eigen::VectorXi* positives) {
  std::int64_t count = 0, hits = 0;
  for (int i = 0; i < predictions.size(); ++i) {
    if (mask_values[i] != group) continue;
    if (positives && (*positives)[i] != 1) continue;
    ++count;
    hits += predictions[i] == 1;
  }
  if (count == 0)
    throw precondition_error(positives
                                 ? "delta_eo: a sensitive group has no positive-label nodes"
                                 : "delta_dp: a sensitive group is empty");
  return static_cast<double>(hits) / count;
}

}  // namespace

double delta_dp(const Eigen::VectorXi& predictions,
                const Eigen::VectorXi& sensitive) {
  if (predictions.size() != sensitive.size())
    throw precondition_error("delta_dp: length mismatch");
  return std::abs(group_rate(predictions, sensitive, 0, nullptr) -
                  group_rate(predictions, sensitive, 1, nullptr));
}

double delta_eo(const Eigen::VectorXi& predictions,
                const Eigen::VectorXi& labels,
                const Eigen::VectorXi& sensitive) {
  if (predictions.size() != labels.size() ||
      predictions.size() != sensitive.size())
    throw precondition_error("delta_eo: length mismatch");
  return std::abs(group_rate(predictions, sensitive, 0, &labels) -
                  group_rate(predictions, sensitive, 1, &labels));
}

double relative_diff(double reference, double candidate) {
  if (reference == 0.0)
    throw precondition_error("relative_diff: reference is zero");
  return std::abs(reference - candidate) / std::abs(reference);
}

namespace {

// Linear-interpolated empirical quantile of a sorted sample, with the
// midpoint convention Q((i+0.5)/n) = x_(i).
double quantile(const std::vector<double>& sorted, double u) {
  const int n = static_cast<int>(sorted.size());
  const double pos = u * n - 0.5;
  if (pos <= 0.0) return sorted.front();
  if (pos >= n - 1) return sorted.back();
  const int lo = static_cast<int>(std::floor(pos));
  const double frac = pos - lo;
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double w1_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  const int m = static_cast<int>(std::max(a.size(), b.size()));
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    const double u = (j + 0.5) / m;
    acc += std::abs(quantile(a, u) - quantile(b, u));
  }
  return acc / m;
}

}  // namespace

double wasserstein_group_gap(const Eigen::MatrixXd& embeddings,
                             const Eigen::VectorXi& sensitive, int projections,
                             std::uint64_t seed) {
  if (embeddings.rows() != sensitive.size())
    throw precondition_error("wasserstein_group_gap: row/sensitive mismatch");
  if (embeddings.cols() < 1 || projections < 1)
    throw precondition_error(
        "wasserstein_group_gap: need k >= 1 and projections >= 1");
  std::vector<int> g0, g1;
  for (int i = 0; i < sensitive.size(); ++i)
    (sensitive[i] == 0 ? g0 : g1).push_back(i);
  if (g0.empty() || g1.empty())
    throw precondition_error("wasserstein_group_gap: a sensitive group is empty");

  const int k = static_cast<int>(embeddings.cols());
  Rng rng(seed);
  double total = 0.0;
  for (int p = 0; p < projections; ++p) {
    Eigen::VectorXd dir(k);
    double norm2 = 0.0;
    do {
      for (int j = 0; j < k; ++j) dir[j] = rng.normal();
      norm2 = dir.squaredNorm();
    } while (norm2 == 0.0);
    dir /= std::sqrt(norm2);

    std::vector<double> a, b;
    a.reserve(g0.size());
    b.reserve(g1.size());
    for (int i : g0) a.push_back(embeddings.row(i).dot(dir));
    for (int i : g1) b.push_back(embeddings.row(i).dot(dir));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    total += w1_sorted(a, b);
  }
  return total / projections;
}

double hypervolume(double utility, double dp, double eo,
                   const std::array<double, 3>& refs) {
  return std::abs(utility - refs[0]) * std::abs(dp - refs[1]) *
         std::abs(eo - refs[2]);
}

double ndcg_at_k(const Eigen::VectorXd& scores, const Eigen::VectorXi& relevant,
                 int k) {
  if (scores.size() != relevant.size())
    throw precondition_error("ndcg_at_k: length mismatch");
  if (k < 1) throw precondition_error("ndcg_at_k: k must be >= 1");
  const int m = static_cast<int>(scores.size());
  const int n_rel = relevant.sum();
  if (n_rel == 0) return 0.0;

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });

  const int cutoff = std::min(k, m);
  double dcg = 0.0;
  for (int p = 0; p < cutoff; ++p)
    if (relevant[order[p]] == 1) dcg += 1.0 / std::log2(p + 2.0);
  double idcg = 0.0;
  for (int p = 0; p < std::min(cutoff, n_rel); ++p)
    idcg += 1.0 / std::log2(p + 2.0);
  return dcg / idcg;
}

double micro_f1(const Eigen::VectorXi& predictions,
                const Eigen::VectorXi& truth) {
  if (predictions.size() != truth.size() || predictions.size() == 0)
    throw precondition_error("micro_f1: need equal nonzero lengths");
  std::int64_t correct = 0;
  for (int i = 0; i < predictions.size(); ++i)
    correct += predictions[i] == truth[i];
  return static_cast<double>(correct) / predictions.size();
}

}  // namespace fairgdiff
