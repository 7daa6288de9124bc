#include "fairgdiff/sbm.hpp"

#include <algorithm>

#include "fairgdiff/error.hpp"
#include "fairgdiff/rng.hpp"

namespace fairgdiff {

AttributedGraph gen_homophily_sbm(const SbmSpec& spec) {
  if (spec.n_per_group < 2)
    throw precondition_error("gen_homophily_sbm: n_per_group must be >= 2");
  if (!(spec.p_inter >= 0.0 && spec.p_inter <= spec.p_intra &&
        spec.p_intra <= 1.0))
    throw precondition_error(
        "gen_homophily_sbm: need 0 <= p_inter <= p_intra <= 1");
  if (spec.feature_dim < 1)
    throw precondition_error("gen_homophily_sbm: feature_dim must be >= 1");

  const int n = 2 * spec.n_per_group;
  Rng rng(spec.seed);

  AttributedGraph g;
  g.n = n;
  g.name = "sbm";
  g.sensitive.resize(n);
  for (int i = 0; i < n; ++i) g.sensitive[i] = i < spec.n_per_group ? 0 : 1;

  g.adjacency = BinaryMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p =
          g.sensitive[i] == g.sensitive[j] ? spec.p_intra : spec.p_inter;
      if (rng.uniform() < p) {
        g.adjacency(i, j) = 1;
        g.adjacency(j, i) = 1;
      }
    }
  }

  g.features.resize(n, spec.feature_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < spec.feature_dim; ++j)
      g.features(i, j) = rng.normal() +
                         (g.sensitive[i] == 1 ? spec.feature_group_shift : 0.0);

  // Noisy threshold on the first feature, cut at the pooled median. The
  // noise keeps labels from being a deterministic function of the features,
  // so graph structure still carries usable signal for a classifier.
  std::vector<double> score(n);
  for (int i = 0; i < n; ++i) score[i] = g.features(i, 0) + 0.5 * rng.normal();
  std::vector<double> sorted = score;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double cut = sorted[n / 2];
  Eigen::VectorXi labels(n);
  for (int i = 0; i < n; ++i) labels[i] = score[i] > cut ? 1 : 0;
  g.labels = labels;
  return g;
}

std::vector<AugmentedVariant> augment_detailed(const AttributedGraph& graph,
                                               int count, double edge_dropout,
                                               std::uint64_t seed) {
  if (!(edge_dropout >= 0.0 && edge_dropout < 1.0))
    throw precondition_error("augment: edge_dropout must be in [0, 1)");
  if (count < 1) throw precondition_error("augment: count must be >= 1");

  std::vector<AugmentedVariant> out;
  out.reserve(count);
  std::vector<int> identity(graph.n);
  for (int i = 0; i < graph.n; ++i) identity[i] = i;
  out.push_back({graph, identity});

  Rng rng(seed);
  for (int v = 1; v < count; ++v) {
    auto perm = rng.permutation(graph.n);
    AttributedGraph variant = graph.permuted(perm);
    if (edge_dropout > 0.0) {
      for (auto [i, j] : variant.edges()) {
        if (rng.uniform() < edge_dropout) {
          variant.adjacency(i, j) = 0;
          variant.adjacency(j, i) = 0;
        }
      }
    }
    variant.name = graph.name + "#" + std::to_string(v);
    out.push_back({std::move(variant), std::move(perm)});
  }
  return out;
}

std::vector<AttributedGraph> augment(const AttributedGraph& graph, int count,
                                     double edge_dropout, std::uint64_t seed) {
  auto detailed = augment_detailed(graph, count, edge_dropout, seed);
  std::vector<AttributedGraph> out;
  out.reserve(detailed.size());
  for (auto& v : detailed) out.push_back(std::move(v.graph));
  return out;
}

}  // namespace fairgdiff
