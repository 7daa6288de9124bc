#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fairgdiff/graph.hpp"

namespace fairgdiff {

enum class TreatmentKind { factual, counterfactual };

/// Symmetric binary pair matrix with unit diagonal. The diagonal is a
/// convention only; nothing downstream reads it.
struct TreatmentMatrix {
  int n = 0;
  BinaryMatrix values;
  TreatmentKind kind = TreatmentKind::factual;

  bool operator==(const TreatmentMatrix& other) const {
    return n == other.n && kind == other.kind && values == other.values;
  }

  /// Node i of the result is node perm[i] of this matrix.
  TreatmentMatrix permuted(const std::vector<int>& perm) const;
};

/// T^F_ij = 1 iff s_i = s_j for i != j; diagonal 1.
TreatmentMatrix factual_treatment(const Eigen::VectorXi& sensitive);

/// Order-invariant pair feature: elementwise sum of the two nodes'
/// non-sensitive feature vectors.
Eigen::VectorXd pair_representation(const AttributedGraph& graph, int i, int j);

struct CfStats {
  std::int64_t universe_size = 0;
  std::int64_t flipped = 0;
  /// True when one treatment class had no candidate pairs at all, which
  /// leaves every entry factual.
  bool missing_opposite_class = false;
};

/// Nearest-opposite-pair matching. The pair universe is every observed edge
/// plus up to candidate_budget uniformly sampled non-edges per treatment
/// class (all of them when the budget covers the class, which makes the
/// result independent of the seed). For each universe pair the nearest pair
/// of the opposite factual treatment is searched by Euclidean distance
/// between pair representations, ties broken by lexicographically smallest
/// pair; the treatment is flipped iff that distance is <= xi.
TreatmentMatrix counterfactual_treatment(const AttributedGraph& graph,
                                         const TreatmentMatrix& t_factual,
                                         double xi,
                                         std::int64_t candidate_budget,
                                         std::uint64_t seed,
                                         CfStats* stats = nullptr);

/// Logistic link-formation model over [pair representation, treatment bit].
struct LinkFormationModel {
  Eigen::VectorXd weights;  // feature weights then one treatment weight
  double bias = 0.0;

  double logit(const Eigen::VectorXd& pair_repr, int treatment) const;
  double probability(const Eigen::VectorXd& pair_repr, int treatment) const;
};

/// Mean binary cross-entropy of the logistic model on a fixed batch.
/// `params` stacks the weight vector and the bias last; rows of `inputs`
/// are [pair representation, treatment]. Writes the analytic gradient when
/// `grad` is given.
double link_model_loss(const Eigen::VectorXd& params,
                       const Eigen::MatrixXd& inputs,
                       const Eigen::VectorXi& labels,
                       Eigen::VectorXd* grad = nullptr);

/// Full-batch gradient descent on BCE over all edges plus an equal number
/// of seeded uniformly sampled non-edges. Zero epochs returns the zero
/// initialization (probability one half everywhere).
LinkFormationModel fit_link_model(const AttributedGraph& graph,
                                  const TreatmentMatrix& t_factual, int epochs,
                                  double lr, std::uint64_t seed,
                                  std::vector<double>* loss_trace = nullptr);

/// Scores every unordered pair under t_cf and keeps the top target_edges
/// as edges (ties by lexicographic pair order). target_edges = -1 means the
/// input's edge count. Features, sensitive and labels are carried over
/// unchanged.
AttributedGraph counterfactual_adjacency(const LinkFormationModel& model,
                                         const TreatmentMatrix& t_cf,
                                         const AttributedGraph& graph,
                                         std::int64_t target_edges = -1);

/// {"kind":..., "n":..., "ones":[[i,j],...]} with i<j sorted.
void save_treatment(const TreatmentMatrix& t, const std::filesystem::path& path);
TreatmentMatrix load_treatment(const std::filesystem::path& path);

}  // namespace fairgdiff
