#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "fairgdiff/graph.hpp"

namespace fairgdiff {

/// Scalar structure statistics of one graph. Metrics whose denominator
/// vanishes (entropy and clustering with no edges/wedges, gini on an empty
/// degree sequence, assortativity with constant degrees) are reported as NaN.
struct GraphStats {
  int max_degree = 0;
  double avg_degree = 0.0;
  int largest_cc = 0;
  std::int64_t wedge_count = 0;
  std::int64_t claw_count = 0;
  std::int64_t triangle_count = 0;
  double gini = 0.0;
  double edge_dist_entropy = 0.0;
  double clustering_coeff = 0.0;
  double assortativity = 0.0;
  int num_components = 0;
};

GraphStats graph_stats(const AttributedGraph& graph);

/// Topology-bias ratio T_x = P(A_ij = x | s_i = s_j) / P(A_ij = x | s_i != s_j)
/// over unordered distinct node pairs. 1 means structure independent of s.
double topology_bias_ratio(const AttributedGraph& graph, int edge_state);

/// |P(yhat=1 | s=0) - P(yhat=1 | s=1)|
double delta_dp(const Eigen::VectorXi& predictions,
                const Eigen::VectorXi& sensitive);

/// |P(yhat=1 | y=1, s=0) - P(yhat=1 | y=1, s=1)|
double delta_eo(const Eigen::VectorXi& predictions,
                const Eigen::VectorXi& labels,
                const Eigen::VectorXi& sensitive);

/// |reference - candidate| / |reference|
double relative_diff(double reference, double candidate);

/// Sliced 1-Wasserstein distance between the two sensitive groups' rows of
/// `embeddings`: mean over seeded random unit directions of the exact 1-D W1
/// between the projected samples (quantile alignment with linear
/// interpolation when group sizes differ). For k=1 and projections=1 this is
/// the exact 1-D W1.
double wasserstein_group_gap(const Eigen::MatrixXd& embeddings,
                             const Eigen::VectorXi& sensitive, int projections,
                             std::uint64_t seed);

/// |utility - refs[0]| * |dp - refs[1]| * |eo - refs[2]|. Inputs are in
/// percentage points; refs hold the least favorable value per coordinate.
double hypervolume(double utility, double dp, double eo,
                   const std::array<double, 3>& refs);

/// NDCG@k of the score-induced ranking against binary relevance. Zero when
/// nothing is relevant. Ties rank by candidate index.
double ndcg_at_k(const Eigen::VectorXd& scores, const Eigen::VectorXi& relevant,
                 int k);

/// Micro-averaged F1; equals accuracy for binary single-label prediction.
double micro_f1(const Eigen::VectorXi& predictions,
                const Eigen::VectorXi& truth);

/// Utility + fairness summary for one (method, task) evaluation.
struct FairnessReport {
  std::string utility_name;  // "accuracy", "ndcg_at_10", or "micro_f1"
  double utility = 0.0;
  double delta_dp = 0.0;
  double delta_eo = 0.0;
  double t0_ratio = 0.0;
  double t1_ratio = 0.0;
  double hypervolume = 0.0;
  std::optional<double> wasserstein;
};

}  // namespace fairgdiff
