#pragma once

#include <cstdint>
#include <vector>

#include "fairgdiff/graph.hpp"

namespace fairgdiff {

/// Two-block stochastic block model with planted sensitive-attribute
/// homophily: p_intra > p_inter makes same-group edges more likely, which is
/// exactly the bias the pipeline is meant to remove.
struct SbmSpec {
  int n_per_group = 100;
  double p_intra = 0.10;
  double p_inter = 0.02;
  int feature_dim = 8;
  double feature_group_shift = 1.0;
  std::uint64_t seed = 0;
};

/// Generates the biased graph. Group membership doubles as the sensitive
/// attribute. Features are unit-variance normal with the group-1 mean
/// shifted by feature_group_shift on every dimension. Labels come from a
/// noisy threshold on the first feature (median cut, so they are balanced);
/// the rule never looks at the group, so label utility is learnable from
/// features alone.
AttributedGraph gen_homophily_sbm(const SbmSpec& spec);

/// `count` training variants of one graph. Variant 0 is the input untouched;
/// every other variant applies an independent node permutation and drops
/// each edge independently with probability edge_dropout.
std::vector<AttributedGraph> augment(const AttributedGraph& graph, int count,
                                     double edge_dropout, std::uint64_t seed);

struct AugmentedVariant {
  AttributedGraph graph;
  std::vector<int> permutation;  // node i of the variant = perm[i] of the input
};

/// Same as augment but keeps each variant's permutation so callers can move
/// node-aligned side data (treatment matrices) along with the graph.
std::vector<AugmentedVariant> augment_detailed(const AttributedGraph& graph,
                                               int count, double edge_dropout,
                                               std::uint64_t seed);

}  // namespace fairgdiff
