#include "fairgdiff/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "fairgdiff/error.hpp"
#include "fairgdiff/metrics.hpp"
#include "fairgdiff/rng.hpp"

namespace fairgdiff {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_split_spec(const SplitSpec& spec) {
  if (!(spec.train_frac > 0.0) || !(spec.val_frac > 0.0) ||
      !(spec.test_frac > 0.0)) {
    throw config_error("split fractions must be positive");
  }
  double sum = spec.train_frac + spec.val_frac + spec.test_frac;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw config_error("split fractions must sum to 1");
  }
}

/// D^{-1/2} (A + I) D^{-1/2} with D the self-loop-augmented degrees.
Eigen::MatrixXd normalized_adjacency(const AttributedGraph& graph) {
  Eigen::MatrixXd a = graph.adjacency.cast<double>();
  a.diagonal().array() += 1.0;
  Eigen::VectorXd dinv = a.rowwise().sum().array().rsqrt().matrix();
  return dinv.asDiagonal() * a * dinv.asDiagonal();
}

struct ClassifierTrace {
  Eigen::MatrixXd ahat;  // n x n
  Eigen::MatrixXd m1;    // ahat * x
  Eigen::MatrixXd z1, h1;
  Eigen::MatrixXd m2;    // ahat * h1
  Eigen::MatrixXd z2, h2;
  Eigen::VectorXd logits;
};

ClassifierTrace classifier_forward(const ClassifierParams& params,
                                   const AttributedGraph& graph) {
  if (graph.features.cols() != params.feature_dim) {
    throw precondition_error("feature dimension does not match classifier");
  }
  const ParamStore& store = params.store;
  auto w1 = store.view("prop1.w");
  auto b1 = store.view("prop1.b");
  auto w2 = store.view("prop2.w");
  auto b2 = store.view("prop2.b");
  auto wh = store.view("head.w");
  auto bh = store.view("head.b");

  ClassifierTrace tr;
  tr.ahat = normalized_adjacency(graph);
  tr.m1 = tr.ahat * graph.features;
  tr.z1 = (tr.m1 * w1.transpose()).rowwise() + b1.row(0);
  tr.h1 = tr.z1.unaryExpr(&shifted_softplus);
  tr.m2 = tr.ahat * tr.h1;
  tr.z2 = (tr.m2 * w2.transpose()).rowwise() + b2.row(0);
  tr.h2 = tr.z2.unaryExpr(&shifted_softplus);
  tr.logits = tr.h2 * wh.row(0).transpose();
  tr.logits.array() += bh(0, 0);
  return tr;
}

double bce_with_logit(double logit, double y) {
  return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
}

double accuracy_on(const Eigen::VectorXd& logits, const Eigen::VectorXi& labels,
                   const std::vector<int>& ids) {
  if (ids.empty()) return kNan;
  int hit = 0;
  for (int id : ids) {
    int pred = logits(id) > 0.0 ? 1 : 0;
    if (pred == labels(id)) ++hit;
  }
  return double(hit) / double(ids.size());
}

Eigen::VectorXi subset(const Eigen::VectorXi& v, const std::vector<int>& ids) {
  Eigen::VectorXi out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out(i) = v(ids[i]);
  return out;
}

std::string fmt_cell(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

NodeSplit split_nodes(const AttributedGraph& graph, const SplitSpec& spec) {
  check_split_spec(spec);
  std::vector<std::vector<int>> strata;
  if (graph.labels) {
    std::vector<int> values;
    for (int i = 0; i < graph.n; ++i) {
      int y = (*graph.labels)(i);
      if (std::find(values.begin(), values.end(), y) == values.end()) {
        values.push_back(y);
      }
    }
    std::sort(values.begin(), values.end());
    for (int y : values) {
      std::vector<int> ids;
      for (int i = 0; i < graph.n; ++i) {
        if ((*graph.labels)(i) == y) ids.push_back(i);
      }
      strata.push_back(std::move(ids));
    }
  } else {
    std::vector<int> ids(graph.n);
    std::iota(ids.begin(), ids.end(), 0);
    strata.push_back(std::move(ids));
  }

  Rng rng(spec.seed);
  NodeSplit out;
  const double fracs[3] = {spec.train_frac, spec.val_frac, spec.test_frac};
  std::vector<int>* parts[3] = {&out.train, &out.val, &out.test};
  for (auto& ids : strata) {
    rng.shuffle(ids);
    int m = int(ids.size());
    int counts[3];
    double rem[3];
    int assigned = 0;
    for (int k = 0; k < 3; ++k) {
      double want = fracs[k] * m;
      counts[k] = int(std::floor(want + 1e-9));
      rem[k] = want - counts[k];
      assigned += counts[k];
    }
    int order[3] = {0, 1, 2};
    std::stable_sort(order, order + 3,
                     [&](int a, int b) { return rem[a] > rem[b]; });
    for (int extra = 0; extra < m - assigned; ++extra) ++counts[order[extra]];
    int at = 0;
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < counts[k]; ++c) parts[k]->push_back(ids[at++]);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

ClassifierParams init_classifier(const ClassifierConfig& config,
                                 int feature_dim) {
  if (config.epochs < 1 || config.hidden < 1 || !(config.lr > 0.0) ||
      feature_dim < 1) {
    throw config_error("invalid classifier configuration");
  }
  ClassifierParams params;
  params.config = config;
  params.feature_dim = feature_dim;
  params.store.add("prop1.w", config.hidden, feature_dim);
  params.store.add("prop1.b", 1, config.hidden);
  params.store.add("prop2.w", config.hidden, config.hidden);
  params.store.add("prop2.b", 1, config.hidden);
  params.store.add("head.w", 1, config.hidden);
  params.store.add("head.b", 1, 1);
  return params;
}

Eigen::VectorXi classify_nodes(const ClassifierParams& params,
                               const AttributedGraph& graph) {
  ClassifierTrace tr = classifier_forward(params, graph);
  Eigen::VectorXi out(graph.n);
  for (int i = 0; i < graph.n; ++i) out(i) = tr.logits(i) > 0.0 ? 1 : 0;
  return out;
}

double classifier_loss(const ClassifierParams& params,
                       const AttributedGraph& graph,
                       const std::vector<int>& ids,
                       Eigen::VectorXd* grad) {
  if (!graph.labels) throw precondition_error("graph has no labels");
  if (ids.empty()) throw precondition_error("empty id set");
  for (int id : ids) {
    if (id < 0 || id >= graph.n) throw precondition_error("id out of range");
  }
  ClassifierTrace tr = classifier_forward(params, graph);
  const Eigen::VectorXi& y = *graph.labels;

  double loss = 0.0;
  for (int id : ids) loss += bce_with_logit(tr.logits(id), double(y(id)));
  loss /= double(ids.size());
  if (grad == nullptr) return loss;

  const ParamStore& store = params.store;
  Eigen::VectorXd& g = *grad;
  g.setZero(store.size());
  auto gv = [&](const std::string& name) { return store.view_in(name, g); };

  Eigen::VectorXd dlogits = Eigen::VectorXd::Zero(graph.n);
  for (int id : ids) {
    dlogits(id) = (sigmoid(tr.logits(id)) - double(y(id))) / double(ids.size());
  }
  gv("head.w") += (tr.h2.transpose() * dlogits).transpose();
  gv("head.b")(0, 0) += dlogits.sum();

  auto wh = store.view("head.w");
  Eigen::MatrixXd dh2 = dlogits * wh.row(0);
  Eigen::MatrixXd dz2 =
      (dh2.array() * tr.z2.unaryExpr(&sigmoid).array()).matrix();
  gv("prop2.w") += dz2.transpose() * tr.m2;
  gv("prop2.b") += dz2.colwise().sum();

  auto w2 = store.view("prop2.w");
  Eigen::MatrixXd dh1 = tr.ahat.transpose() * (dz2 * w2);
  Eigen::MatrixXd dz1 =
      (dh1.array() * tr.z1.unaryExpr(&sigmoid).array()).matrix();
  gv("prop1.w") += dz1.transpose() * tr.m1;
  gv("prop1.b") += dz1.colwise().sum();
  return loss;
}

ClassifierOutcome train_node_classifier(const AttributedGraph& graph,
                                        const NodeSplit& split,
                                        const ClassifierConfig& config,
                                        std::vector<double>* loss_trace) {
  if (!graph.labels) throw precondition_error("graph has no labels");
  if (split.train.empty()) throw precondition_error("empty train split");

  ClassifierOutcome out;
  out.params = init_classifier(config, int(graph.features.cols()));
  Rng rng(config.seed);
  out.params.store.init_normal(rng);

  AdamOptimizer opt(out.params.store.size(), config.lr);
  Eigen::VectorXd grad(out.params.store.size());
  Eigen::VectorXd best = out.params.store.flat();
  double best_val = -1.0;
  if (loss_trace) loss_trace->clear();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss = classifier_loss(out.params, graph, split.train, &grad);
    if (!std::isfinite(loss)) {
      throw divergence_error("classifier loss diverged at epoch " +
                             std::to_string(epoch));
    }
    if (loss_trace) loss_trace->push_back(loss);
    opt.step(out.params.store.flat(), grad);

    if (!split.val.empty()) {
      ClassifierTrace tr = classifier_forward(out.params, graph);
      double acc = accuracy_on(tr.logits, *graph.labels, split.val);
      if (acc > best_val) {
        best_val = acc;
        best = out.params.store.flat();
      }
    } else {
      best = out.params.store.flat();
    }
  }
  out.params.store.flat() = best;
  out.params.trained = true;

  ClassifierTrace tr = classifier_forward(out.params, graph);
  out.accuracy = accuracy_on(tr.logits, *graph.labels, split.test);
  Eigen::VectorXi preds(split.test.size());
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    preds(i) = tr.logits(split.test[i]) > 0.0 ? 1 : 0;
  }
  out.delta_dp = delta_dp(preds, subset(graph.sensitive, split.test));
  out.delta_eo = delta_eo(preds, subset(*graph.labels, split.test),
                          subset(graph.sensitive, split.test));
  return out;
}

Eigen::MatrixXd embed_nodes(const AttributedGraph& graph,
                            const AutoencoderParams& params) {
  return node_embeddings(params, graph);
}

LinkEval link_prediction_eval(const AttributedGraph& graph,
                              const Eigen::MatrixXd& embeddings,
                              double holdout_frac, int k, std::uint64_t seed) {
  if (!(holdout_frac > 0.0) || !(holdout_frac < 1.0)) {
    throw precondition_error("holdout_frac must lie in (0, 1)");
  }
  if (k < 1) throw precondition_error("k must be positive");
  if (embeddings.rows() != graph.n) {
    throw precondition_error("one embedding row per node required");
  }
  std::vector<std::pair<int, int>> edge_list = graph.edges();
  int held = int(std::floor(holdout_frac * double(edge_list.size())));
  if (held < 1) throw precondition_error("not enough edges to hold out");

  Rng rng(seed);
  rng.shuffle(edge_list);
  BinaryMatrix remaining = graph.adjacency;
  BinaryMatrix heldout = BinaryMatrix::Zero(graph.n, graph.n);
  for (int e = 0; e < held; ++e) {
    auto [i, j] = edge_list[e];
    remaining(i, j) = remaining(j, i) = 0;
    heldout(i, j) = heldout(j, i) = 1;
  }

  LinkEval out;
  double ndcg_sum = 0.0;
  std::vector<int> pred_flags, same_flags;
  for (int u = 0; u < graph.n; ++u) {
    if (heldout.row(u).cast<int>().sum() == 0) continue;
    std::vector<int> cands;
    for (int v = 0; v < graph.n; ++v) {
      if (v != u && remaining(u, v) == 0) cands.push_back(v);
    }
    Eigen::VectorXd scores(cands.size());
    Eigen::VectorXi relevant(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c) {
      scores(c) = embeddings.row(u).dot(embeddings.row(cands[c]));
      relevant(c) = heldout(u, cands[c]);
    }
    ndcg_sum += ndcg_at_k(scores, relevant, k);
    ++out.eval_nodes;

    std::vector<int> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scores(a) > scores(b);
    });
    int k_eff = std::min<int>(k, int(cands.size()));
    std::vector<char> in_top(cands.size(), 0);
    for (int r = 0; r < k_eff; ++r) in_top[order[r]] = 1;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      pred_flags.push_back(in_top[c]);
      same_flags.push_back(graph.sensitive(u) == graph.sensitive(cands[c]));
    }
  }
  out.ndcg = ndcg_sum / double(out.eval_nodes);
  out.delta_dp = delta_dp(
      Eigen::Map<Eigen::VectorXi>(pred_flags.data(), pred_flags.size()),
      Eigen::Map<Eigen::VectorXi>(same_flags.data(), same_flags.size()));

  std::vector<int> ids(graph.n);
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(ids);
  int n_train = std::max(1, std::min(graph.n - 1,
                                     int(std::floor(0.8 * graph.n + 1e-9))));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(embeddings.cols());
  double b = 0.0;
  for (int epoch = 0; epoch < 500; ++epoch) {
    Eigen::VectorXd gw = Eigen::VectorXd::Zero(embeddings.cols());
    double gb = 0.0;
    for (int i = 0; i < n_train; ++i) {
      int id = ids[i];
      double d = sigmoid(embeddings.row(id).dot(w) + b) -
                 double(graph.sensitive(id));
      gw += d * embeddings.row(id).transpose();
      gb += d;
    }
    w -= (0.1 / n_train) * gw;
    b -= (0.1 / n_train) * gb;
  }
  Eigen::VectorXi probe_pred(graph.n - n_train), probe_truth(graph.n - n_train);
  for (int i = n_train; i < graph.n; ++i) {
    int id = ids[i];
    probe_pred(i - n_train) =
        embeddings.row(id).dot(w) + b > 0.0 ? 1 : 0;
    probe_truth(i - n_train) = graph.sensitive(id);
  }
  out.leakage_micro_f1 = micro_f1(probe_pred, probe_truth);
  return out;
}

AttributedGraph fairdrop_baseline(const AttributedGraph& graph, double delta,
                                  std::uint64_t seed) {
  if (!(delta >= 0.0) || !(delta <= 1.0)) {
    throw precondition_error("delta must lie in [0, 1]");
  }
  AttributedGraph out = graph;
  Rng rng(seed);
  for (auto [i, j] : graph.edges()) {
    if (graph.sensitive(i) != graph.sensitive(j)) continue;
    if (rng.uniform() < delta) out.adjacency(i, j) = out.adjacency(j, i) = 0;
  }
  return out;
}

ComparisonTable compare_methods(const std::vector<MethodEntry>& methods,
                                const std::vector<std::string>& tasks,
                                const CompareConfig& config) {
  if (methods.size() < 2) throw precondition_error("need at least 2 methods");
  if (tasks.empty()) throw config_error("no tasks requested");
  for (const auto& task : tasks) {
    if (task != kTaskNodeClassification && task != kTaskLinkPrediction) {
      throw config_error("unknown task: " + task);
    }
  }
  check_split_spec(config.split);

  ComparisonTable table;
  for (const auto& task : tasks) {
    for (const auto& method : methods) {
      ComparisonRow row;
      row.method = method.name;
      row.task = task;
      row.utility = row.delta_dp = row.delta_eo = kNan;
      row.hypervolume = row.wasserstein = kNan;
      try {
        row.t0 = topology_bias_ratio(method.graph, 0);
      } catch (const Error& e) {
        row.t0 = kNan;
        row.error = e.what();
      }
      try {
        row.t1 = topology_bias_ratio(method.graph, 1);
      } catch (const Error& e) {
        row.t1 = kNan;
        row.error = e.what();
      }
      try {
        if (task == kTaskNodeClassification) {
          row.utility_name = "accuracy";
          NodeSplit split = split_nodes(method.graph, config.split);
          ClassifierOutcome res =
              train_node_classifier(method.graph, split, config.classifier);
          row.utility = res.accuracy;
          row.delta_dp = res.delta_dp;
          row.delta_eo = res.delta_eo;
        } else {
          row.utility_name = "ndcg_at_" + std::to_string(config.k);
          if (config.encoder == nullptr) {
            throw precondition_error("no encoder provided for link task");
          }
          Eigen::MatrixXd emb = embed_nodes(method.graph, *config.encoder);
          LinkEval le = link_prediction_eval(
              method.graph, emb, config.holdout_frac, config.k, config.seed);
          row.utility = le.ndcg;
          row.delta_dp = le.delta_dp;
          row.delta_eo = le.leakage_micro_f1;
          row.wasserstein =
              wasserstein_group_gap(emb, method.graph.sensitive, 8, config.seed);
        }
      } catch (const Error& e) {
        row.error = e.what();
      }
      table.rows.push_back(std::move(row));
    }
  }

  for (const auto& task : tasks) {
    double ref_u = kNan, ref_dp = kNan, ref_eo = kNan;
    for (const auto& row : table.rows) {
      if (row.task != task) continue;
      if (std::isfinite(row.utility) &&
          !(row.utility >= ref_u)) ref_u = row.utility;
      if (std::isfinite(row.delta_dp) &&
          !(row.delta_dp <= ref_dp)) ref_dp = row.delta_dp;
      if (std::isfinite(row.delta_eo) &&
          !(row.delta_eo <= ref_eo)) ref_eo = row.delta_eo;
    }
    for (auto& row : table.rows) {
      if (row.task != task) continue;
      if (std::isfinite(row.utility) && std::isfinite(row.delta_dp) &&
          std::isfinite(row.delta_eo) && std::isfinite(ref_u)) {
        row.hypervolume = hypervolume(
            100.0 * row.utility, 100.0 * row.delta_dp, 100.0 * row.delta_eo,
            {100.0 * ref_u, 100.0 * ref_dp, 100.0 * ref_eo});
      }
    }
  }

  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) {
                     if (a.method != b.method) return a.method < b.method;
                     return a.task < b.task;
                   });
  return table;
}

void write_comparison_csv(const ComparisonTable& table,
                          const std::filesystem::path& path) {
  std::ofstream ofs(path);
  if (!ofs) throw data_error("cannot write " + path.string());
  ofs << "method,task,utility_name,utility,delta_dp,delta_eo,t0,t1,"
         "hypervolume\n";
  for (const auto& row : table.rows) {
    ofs << row.method << ',' << row.task << ',' << row.utility_name << ','
        << fmt_cell(row.utility) << ',' << fmt_cell(row.delta_dp) << ','
        << fmt_cell(row.delta_eo) << ',' << fmt_cell(row.t0) << ','
        << fmt_cell(row.t1) << ',' << fmt_cell(row.hypervolume) << '\n';
  }
}

void write_comparison_json(const ComparisonTable& table,
                           const CompareConfig& config,
                           const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["seed"] = config.seed;
  doc["config"] = {
      {"split",
       {{"train_frac", config.split.train_frac},
        {"val_frac", config.split.val_frac},
        {"test_frac", config.split.test_frac},
        {"seed", config.split.seed}}},
      {"classifier",
       {{"epochs", config.classifier.epochs},
        {"lr", config.classifier.lr},
        {"hidden", config.classifier.hidden},
        {"seed", config.classifier.seed}}},
      {"holdout_frac", config.holdout_frac},
      {"k", config.k},
  };
  doc["notes"] = {
      {"link_delta_dp",
       "gap between same-group and cross-group prediction rates over the "
       "per-node top-k candidate lists"},
      {"link_delta_eo",
       "micro-F1 of a logistic probe predicting the sensitive value from "
       "the embeddings (lower means less leakage)"},
      {"embedding_source",
       "per-node states of the graph autoencoder's last message-passing "
       "layer"},
      {"hypervolume_scale", "percentage points, references at the worst "
                            "observed value per metric within a task"},
  };
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = {
        {"method", row.method},         {"task", row.task},
        {"utility_name", row.utility_name}, {"utility", row.utility},
        {"delta_dp", row.delta_dp},     {"delta_eo", row.delta_eo},
        {"t0", row.t0},                 {"t1", row.t1},
        {"hypervolume", row.hypervolume},
    };
    if (row.task == kTaskLinkPrediction) r["wasserstein"] = row.wasserstein;
    if (!row.error.empty()) r["error"] = row.error;
    doc["rows"].push_back(std::move(r));
  }
  std::ofstream ofs(path);
  if (!ofs) throw data_error("cannot write " + path.string());
  ofs << doc.dump(2) << '\n';
}

}  // namespace fairgdiff
