#include "fairgdiff/treatment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <utility>

#include <json.hpp>

#include "fairgdiff/error.hpp"
#include "fairgdiff/rng.hpp"

namespace fairgdiff {

using nlohmann::json;

TreatmentMatrix TreatmentMatrix::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != n)
    throw precondition_error("treatment permutation length mismatch");
  TreatmentMatrix out;
  out.n = n;
  out.kind = kind;
  out.values.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.values(i, j) = values(perm[i], perm[j]);
  return out;
}

TreatmentMatrix factual_treatment(const Eigen::VectorXi& sensitive) {
  const int n = static_cast<int>(sensitive.size());
  if (n == 0) throw precondition_error("factual_treatment: empty vector");
  TreatmentMatrix t;
  t.n = n;
  t.kind = TreatmentKind::factual;
  t.values.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      t.values(i, j) = (i == j || sensitive[i] == sensitive[j]) ? 1 : 0;
  return t;
}

Eigen::VectorXd pair_representation(const AttributedGraph& graph, int i, int j) {
  return (graph.features.row(i) + graph.features.row(j)).transpose();
}

namespace {

struct UniversePair {
  int i, j;
  Eigen::VectorXd repr;
};

// Samples `budget` distinct entries of `pool` uniformly, or all of them when
// the budget covers the pool (no draws in that case, so exact mode does not
// depend on the seed).
std::vector<std::pair<int, int>> sample_pairs(
    std::vector<std::pair<int, int>> pool, std::int64_t budget, Rng& rng) {
  if (budget >= static_cast<std::int64_t>(pool.size())) return pool;
  for (std::int64_t k = 0; k < budget; ++k) {
    const auto j = k + static_cast<std::int64_t>(
                           rng.below(static_cast<std::uint64_t>(pool.size() - k)));
    std::swap(pool[k], pool[j]);
  }
  pool.resize(budget);
  return pool;
}

}  // namespace

TreatmentMatrix counterfactual_treatment(const AttributedGraph& graph,
                                         const TreatmentMatrix& t_factual,
                                         double xi,
                                         std::int64_t candidate_budget,
                                         std::uint64_t seed, CfStats* stats) {
  if (xi < 0) throw precondition_error("counterfactual_treatment: xi < 0");
  if (candidate_budget < 1)
    throw precondition_error("counterfactual_treatment: candidate_budget < 1");
  if (t_factual.n != graph.n)
    throw precondition_error("counterfactual_treatment: size mismatch");

  const int n = graph.n;
  std::vector<std::pair<int, int>> nonedges_t1, nonedges_t0;
  std::vector<std::pair<int, int>> universe = graph.edges();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (graph.adjacency(i, j)) continue;
      (t_factual.values(i, j) ? nonedges_t1 : nonedges_t0).emplace_back(i, j);
    }

  Rng rng(seed);
  auto picked1 = sample_pairs(std::move(nonedges_t1), candidate_budget, rng);
  auto picked0 = sample_pairs(std::move(nonedges_t0), candidate_budget, rng);
  universe.insert(universe.end(), picked1.begin(), picked1.end());
  universe.insert(universe.end(), picked0.begin(), picked0.end());
  std::sort(universe.begin(), universe.end());

  std::vector<UniversePair> class_of[2];
  for (auto [i, j] : universe)
    class_of[t_factual.values(i, j)].push_back(
        {i, j, pair_representation(graph, i, j)});

  CfStats local;
  local.universe_size = static_cast<std::int64_t>(universe.size());

  TreatmentMatrix out;
  out.n = n;
  out.kind = TreatmentKind::counterfactual;
  out.values = t_factual.values;

  if (class_of[0].empty() || class_of[1].empty()) {
    local.missing_opposite_class = true;
    if (stats) *stats = local;
    return out;
  }

  const double xi2 = xi * xi;
  for (int own = 0; own < 2; ++own) {
    const auto& candidates = class_of[1 - own];
    for (const auto& p : class_of[own]) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : candidates) {
        const double d2 = (p.repr - q.repr).squaredNorm();
        if (d2 < best) best = d2;
      }
      if (best <= xi2) {
        out.values(p.i, p.j) = out.values(p.j, p.i) =
            static_cast<std::uint8_t>(1 - own);
        ++local.flipped;
      }
    }
  }
  if (stats) *stats = local;
  return out;
}

double LinkFormationModel::logit(const Eigen::VectorXd& pair_repr,
                                 int treatment) const {
  const auto d = weights.size();
  return weights.head(d - 1).dot(pair_repr) + weights[d - 1] * treatment + bias;
}

double LinkFormationModel::probability(const Eigen::VectorXd& pair_repr,
                                       int treatment) const {
  return 1.0 / (1.0 + std::exp(-logit(pair_repr, treatment)));
}

double link_model_loss(const Eigen::VectorXd& params,
                       const Eigen::MatrixXd& inputs,
                       const Eigen::VectorXi& labels, Eigen::VectorXd* grad) {
  const auto m = inputs.rows();
  const auto d = inputs.cols();
  if (params.size() != d + 1)
    throw precondition_error("link_model_loss: params must be weights + bias");
  if (labels.size() != m)
    throw precondition_error("link_model_loss: label count mismatch");
  if (m == 0) throw precondition_error("link_model_loss: empty batch");

  if (grad) *grad = Eigen::VectorXd::Zero(d + 1);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const double z = inputs.row(r).dot(params.head(d)) + params[d];
    const double y = labels[r];
    // log(1 + e^z) - y z, written to stay finite for large |z|
    loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) -
            y * z;
    if (grad) {
      const double p = 1.0 / (1.0 + std::exp(-z));
      grad->head(d) += (p - y) * inputs.row(r).transpose();
      (*grad)[d] += p - y;
    }
  }
  if (grad) *grad /= static_cast<double>(m);
  return loss / static_cast<double>(m);
}

LinkFormationModel fit_link_model(const AttributedGraph& graph,
                                  const TreatmentMatrix& t_factual, int epochs,
                                  double lr, std::uint64_t seed,
                                  std::vector<double>* loss_trace) {
  if (t_factual.n != graph.n)
    throw precondition_error("fit_link_model: size mismatch");
  const auto edges = graph.edges();
  std::vector<std::pair<int, int>> nonedges;
  for (int i = 0; i < graph.n; ++i)
    for (int j = i + 1; j < graph.n; ++j)
      if (!graph.adjacency(i, j)) nonedges.emplace_back(i, j);
  if (edges.empty() || nonedges.empty())
    throw precondition_error(
        "fit_link_model: need at least one edge and one non-edge");

  Rng rng(seed);
  auto negatives = sample_pairs(std::move(nonedges),
                                static_cast<std::int64_t>(edges.size()), rng);
  std::sort(negatives.begin(), negatives.end());

  const auto d = graph.features.cols() + 1;
  const auto m = static_cast<Eigen::Index>(edges.size() + negatives.size());
  Eigen::MatrixXd inputs(m, d);
  Eigen::VectorXi labels(m);
  Eigen::Index r = 0;
  for (auto [i, j] : edges) {
    inputs.row(r).head(d - 1) = pair_representation(graph, i, j).transpose();
    inputs(r, d - 1) = t_factual.values(i, j);
    labels[r++] = 1;
  }
  for (auto [i, j] : negatives) {
    inputs.row(r).head(d - 1) = pair_representation(graph, i, j).transpose();
    inputs(r, d - 1) = t_factual.values(i, j);
    labels[r++] = 0;
  }

  Eigen::VectorXd params = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd grad(d + 1);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double loss = link_model_loss(params, inputs, labels, &grad);
    if (!std::isfinite(loss))
      throw divergence_error("fit_link_model: non-finite loss at epoch " +
                             std::to_string(epoch));
    if (loss_trace) loss_trace->push_back(loss);
    params -= lr * grad;
  }

  LinkFormationModel model;
  model.weights = params.head(d);
  model.bias = params[d];
  return model;
}

AttributedGraph counterfactual_adjacency(const LinkFormationModel& model,
                                         const TreatmentMatrix& t_cf,
                                         const AttributedGraph& graph,
                                         std::int64_t target_edges) {
  if (t_cf.n != graph.n)
    throw precondition_error("counterfactual_adjacency: size mismatch");
  if (target_edges < -1)
    throw precondition_error("counterfactual_adjacency: target_edges < 0");
  if (target_edges == -1) target_edges = graph.edge_count();

  struct Scored {
    double score;
    int i, j;
  };
  std::vector<Scored> scored;
  scored.reserve(static_cast<std::size_t>(graph.n) * (graph.n - 1) / 2);
  for (int i = 0; i < graph.n; ++i)
    for (int j = i + 1; j < graph.n; ++j)
      scored.push_back({model.logit(pair_representation(graph, i, j),
                                    t_cf.values(i, j)),
                        i, j});
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  const auto keep = std::min<std::int64_t>(
      target_edges, static_cast<std::int64_t>(scored.size()));
  AttributedGraph out = graph;
  out.adjacency.setZero();
  for (std::int64_t k = 0; k < keep; ++k) {
    out.adjacency(scored[k].i, scored[k].j) = 1;
    out.adjacency(scored[k].j, scored[k].i) = 1;
  }
  return out;
}

void save_treatment(const TreatmentMatrix& t,
                    const std::filesystem::path& path) {
  json doc;
  doc["kind"] = t.kind == TreatmentKind::factual ? "factual" : "counterfactual";
  doc["n"] = t.n;
  json ones = json::array();
  for (int i = 0; i < t.n; ++i)
    for (int j = i + 1; j < t.n; ++j)
      if (t.values(i, j)) ones.push_back({i, j});
  doc["ones"] = std::move(ones);
  std::ofstream out(path);
  if (!out) throw data_error("cannot write treatment file: " + path.string());
  out << doc.dump(2) << "\n";
}

TreatmentMatrix load_treatment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open treatment file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw data_error("malformed treatment file " + path.string() + ": " +
                     e.what());
  }
  TreatmentMatrix t;
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "factual") {
    t.kind = TreatmentKind::factual;
  } else if (kind == "counterfactual") {
    t.kind = TreatmentKind::counterfactual;
  } else {
    throw data_error("unknown treatment kind: " + kind);
  }
  t.n = doc.at("n").get<int>();
  if (t.n <= 0) throw data_error("treatment file has nonpositive n");
  t.values = BinaryMatrix::Identity(t.n, t.n);
  for (const auto& pair : doc.at("ones")) {
    const int i = pair.at(0).get<int>();
    const int j = pair.at(1).get<int>();
    if (i < 0 || j < 0 || i >= t.n || j >= t.n || i == j)
      throw data_error("treatment file has an out-of-range pair");
    t.values(i, j) = t.values(j, i) = 1;
  }
  return t;
}

}  // namespace fairgdiff
