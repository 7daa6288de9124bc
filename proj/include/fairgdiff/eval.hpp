#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fairgdiff/autoencoder.hpp"
#include "fairgdiff/graph.hpp"
#include "fairgdiff/param_store.hpp"

namespace fairgdiff {

/// Train/val/test node split proportions. Fractions must be positive and
/// sum to 1 within 1e-12.
struct SplitSpec {
  double train_frac = 0.5;
  double val_frac = 0.25;
  double test_frac = 0.25;
  std::uint64_t seed = 0;
};

struct NodeSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

/// Seeded node split, stratified by label when labels exist. Within each
/// stratum sizes follow the fractions by largest remainder, so the example
/// fractions produce exact counts. Ids in each part are sorted.
NodeSplit split_nodes(const AttributedGraph& graph, const SplitSpec& spec);

struct ClassifierConfig {
  int epochs = 200;
  double lr = 1e-2;
  int hidden = 16;
  std::uint64_t seed = 0;
};

/// Minimal graph-convolution node classifier: two rounds of
/// normalized-adjacency propagation with a nonlinearity and a linear head
/// emitting one logit per node.
struct ClassifierParams {
  ClassifierConfig config;
  int feature_dim = 0;
  bool trained = false;
  ParamStore store;
};

ClassifierParams init_classifier(const ClassifierConfig& config,
                                 int feature_dim);

/// Predicted 0/1 label per node (logit > 0).
Eigen::VectorXi classify_nodes(const ClassifierParams& params,
                               const AttributedGraph& graph);

/// Mean binary cross-entropy of the node logits over `ids`. Writes the
/// analytic gradient for every parameter when grad is given.
double classifier_loss(const ClassifierParams& params,
                       const AttributedGraph& graph,
                       const std::vector<int>& ids,
                       Eigen::VectorXd* grad = nullptr);

struct ClassifierOutcome {
  ClassifierParams params;
  double accuracy = 0.0;
  double delta_dp = 0.0;
  double delta_eo = 0.0;
};

/// Cross-entropy training on the train ids with the epoch snapshot that
/// maximizes val accuracy kept; accuracy and the parity gaps are computed on
/// the test ids. Deterministic given config.seed.
ClassifierOutcome train_node_classifier(const AttributedGraph& graph,
                                        const NodeSplit& split,
                                        const ClassifierConfig& config,
                                        std::vector<double>* loss_trace =
                                            nullptr);

/// Per-node embeddings from the encoder's last message-passing layer.
Eigen::MatrixXd embed_nodes(const AttributedGraph& graph,
                            const AutoencoderParams& params);

struct LinkEval {
  double ndcg = 0.0;
  /// |P(predicted | same group) - P(predicted | cross group)| over the
  /// per-node top-k candidate lists.
  double delta_dp = 0.0;
  /// Micro-F1 of an 80/20 logistic probe predicting the sensitive value
  /// from the embeddings.
  double leakage_micro_f1 = 0.0;
  int eval_nodes = 0;
};

/// Holds out a seeded fraction of edges, scores every non-adjacent pair by
/// embedding dot product, and reports mean NDCG@k over nodes with at least
/// one held-out neighbor plus the link-level parity gap and the attribute
/// leakage probe.
LinkEval link_prediction_eval(const AttributedGraph& graph,
                              const Eigen::MatrixXd& embeddings,
                              double holdout_frac, int k, std::uint64_t seed);

/// Drops each same-sensitive-group edge independently with probability
/// delta; cross-group edges are never touched.
AttributedGraph fairdrop_baseline(const AttributedGraph& graph, double delta,
                                  std::uint64_t seed);

struct MethodEntry {
  std::string name;
  AttributedGraph graph;
};

struct CompareConfig {
  SplitSpec split;
  ClassifierConfig classifier;
  double holdout_frac = 0.2;
  int k = 10;
  std::uint64_t seed = 0;
  /// Encoder used for link-prediction embeddings; the link task is marked
  /// as errored when absent.
  const AutoencoderParams* encoder = nullptr;
};

/// One (method, task) evaluation. For the link task the utility is NDCG@k
/// and the delta_eo column carries the leakage probe micro-F1 (the closest
/// equal-opportunity analogue a ranking task admits). Cells of failed
/// computations hold NaN and `error` says why.
struct ComparisonRow {
  std::string method;
  std::string task;
  std::string utility_name;
  double utility = 0.0;
  double delta_dp = 0.0;
  double delta_eo = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  double hypervolume = 0.0;
  double wasserstein = 0.0;  // embedding group gap, link task only
  std::string error;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

inline constexpr const char* kTaskNodeClassification = "node_classification";
inline constexpr const char* kTaskLinkPrediction = "link_prediction";

/// Runs the requested tasks on every method graph and assembles one row per
/// (method, task), sorted by method then task. Hypervolume per row uses
/// percentage-point scaling with the reference point at the worst observed
/// value of each of (utility, delta_dp, delta_eo) within the task. A failed
/// task marks that method's row instead of aborting the table.
ComparisonTable compare_methods(const std::vector<MethodEntry>& methods,
                                const std::vector<std::string>& tasks,
                                const CompareConfig& config);

/// Columns: method,task,utility_name,utility,delta_dp,delta_eo,t0,t1,
/// hypervolume. NaN cells are left empty.
void write_comparison_csv(const ComparisonTable& table,
                          const std::filesystem::path& path);

/// JSON mirror carrying the config echo, seed, and per-row error messages.
void write_comparison_json(const ComparisonTable& table,
                           const CompareConfig& config,
                           const std::filesystem::path& path);

}  // namespace fairgdiff
