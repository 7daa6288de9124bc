#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "fairgdiff/autoencoder.hpp"
#include "fairgdiff/error.hpp"
#include "fairgdiff/eval.hpp"
#include "fairgdiff/graph.hpp"
#include "fairgdiff/metrics.hpp"
#include "fairgdiff/rng.hpp"
#include "fairgdiff/sbm.hpp"
#include "oracles/oracles.hpp"

using namespace fairgdiff;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fairgdiff_eval_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

AttributedGraph bare_graph(int n) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 1);
  Eigen::VectorXi s(n);
  for (int i = 0; i < n; ++i) s(i) = i % 2;
  return AttributedGraph::from_edges(n, {}, x, s, std::nullopt, "bare");
}

AttributedGraph labeled_six() {
  Eigen::MatrixXd x(6, 3);
  Rng rng(41);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
  Eigen::VectorXi s(6), y(6);
  s << 0, 1, 0, 1, 0, 1;
  y << 0, 1, 1, 0, 1, 0;
  return AttributedGraph::from_edges(
      6, {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 5}}, x, s, y, "six");
}

/// Disjoint pairs (2i, 2i+1); every node has exactly one neighbor, so any
/// held-out subset leaves its endpoints with a single relevant candidate.
AttributedGraph matching_graph(int pairs) {
  int n = 2 * pairs;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < pairs; ++i) edges.push_back({2 * i, 2 * i + 1});
  Eigen::MatrixXd x(n, 2);
  Rng rng(19);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) x(i, j) = rng.normal();
  Eigen::VectorXi s(n);
  for (int i = 0; i < n; ++i) s(i) = i % 2;
  return AttributedGraph::from_edges(n, edges, x, s, std::nullopt, "matching");
}

AttributedGraph small_sbm(int per_group, std::uint64_t seed) {
  SbmSpec spec;
  spec.n_per_group = per_group;
  spec.p_intra = 0.25;
  spec.p_inter = 0.08;
  spec.feature_dim = 4;
  spec.seed = seed;
  return gen_homophily_sbm(spec);
}

bool is_partition(int n, const NodeSplit& split) {
  std::vector<int> all;
  all.insert(all.end(), split.train.begin(), split.train.end());
  all.insert(all.end(), split.val.begin(), split.val.end());
  all.insert(all.end(), split.test.begin(), split.test.end());
  std::sort(all.begin(), all.end());
  if (int(all.size()) != n) return false;
  for (int i = 0; i < n; ++i) {
    if (all[i] != i) return false;
  }
  return true;
}

int count_label(const AttributedGraph& g, const std::vector<int>& ids,
                int value) {
  int c = 0;
  for (int id : ids) c += (*g.labels)(id) == value ? 1 : 0;
  return c;
}

}  // namespace

TEST_CASE("split sizes follow the fractions exactly") {
  auto g = bare_graph(400);
  SplitSpec spec;
  auto split = split_nodes(g, spec);
  CHECK(split.train.size() == 200);
  CHECK(split.val.size() == 100);
  CHECK(split.test.size() == 100);
  CHECK(is_partition(400, split));

  Eigen::VectorXi y(400);
  for (int i = 0; i < 400; ++i) y(i) = i < 200 ? 0 : 1;
  g.labels = y;
  split = split_nodes(g, spec);
  CHECK(split.train.size() == 200);
  CHECK(split.val.size() == 100);
  CHECK(split.test.size() == 100);
  CHECK(is_partition(400, split));
  CHECK(count_label(g, split.train, 1) == 100);
  CHECK(count_label(g, split.val, 1) == 50);
  CHECK(count_label(g, split.test, 1) == 50);

  auto h = bare_graph(100);
  SplitSpec uneven{0.2, 0.35, 0.45, 0};
  auto us = split_nodes(h, uneven);
  CHECK(us.train.size() == 20);
  CHECK(us.val.size() == 35);
  CHECK(us.test.size() == 45);
  CHECK(is_partition(100, us));
}

TEST_CASE("split stratifies uneven label classes by largest remainder") {
  auto g = bare_graph(10);
  Eigen::VectorXi y(10);
  y << 0, 0, 0, 0, 0, 0, 0, 1, 1, 1;
  g.labels = y;
  auto split = split_nodes(g, SplitSpec{0.5, 0.25, 0.25, 2});
  CHECK(split.train.size() == 4);
  CHECK(split.val.size() == 3);
  CHECK(split.test.size() == 3);
  CHECK(is_partition(10, split));
  CHECK(count_label(g, split.train, 1) == 1);
  CHECK(count_label(g, split.val, 1) == 1);
  CHECK(count_label(g, split.test, 1) == 1);
}

TEST_CASE("split is deterministic and seed-sensitive") {
  auto g = bare_graph(400);
  SplitSpec spec;
  spec.seed = 9;
  auto a = split_nodes(g, spec);
  auto b = split_nodes(g, spec);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  spec.seed = 10;
  auto c = split_nodes(g, spec);
  CHECK(a.train != c.train);
}

TEST_CASE("split rejects malformed fractions") {
  auto g = bare_graph(10);
  CHECK_THROWS_AS(split_nodes(g, SplitSpec{0.5, 0.25, 0.2, 0}), Error);
  CHECK_THROWS_AS(split_nodes(g, SplitSpec{1.0, 0.0, 0.0, 0}), Error);
  CHECK_THROWS_AS(split_nodes(g, SplitSpec{1.2, -0.1, -0.1, 0}), Error);
}

TEST_CASE("classifier loss matches a by-hand forward pass") {
  auto g = labeled_six();
  auto params = init_classifier(ClassifierConfig{50, 1e-2, 4, 0}, 3);
  std::vector<int> all = {0, 1, 2, 3, 4, 5};

  CHECK(classifier_loss(params, g, all) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(classify_nodes(params, g).sum() == 0);

  params.store.view("head.b")(0, 0) = 3.0;
  double want = 0.0;
  for (int i = 0; i < 6; ++i) {
    double y = double((*g.labels)(i));
    want += 3.0 - 3.0 * y + std::log1p(std::exp(-3.0));
  }
  want /= 6.0;
  CHECK(classifier_loss(params, g, all) == doctest::Approx(want).epsilon(1e-12));
  CHECK(classify_nodes(params, g).sum() == 6);

  CHECK(classifier_loss(params, g, {0}) ==
        doctest::Approx(3.0 - 3.0 * double((*g.labels)(0)) +
                        std::log1p(std::exp(-3.0)))
            .epsilon(1e-12));
}

TEST_CASE("classifier loss reads labels only at the requested ids") {
  auto g = labeled_six();
  auto params = init_classifier(ClassifierConfig{50, 1e-2, 4, 3}, 3);
  Rng rng(8);
  params.store.init_normal(rng);
  std::vector<int> ids = {0, 2, 4};
  double base = classifier_loss(params, g, ids);
  auto h = g;
  (*h.labels)(1) = 1 - (*h.labels)(1);
  (*h.labels)(5) = 1 - (*h.labels)(5);
  CHECK(classifier_loss(params, h, ids) == base);
}

TEST_CASE("classifier gradient matches central finite differences") {
  auto g = labeled_six();
  auto params = init_classifier(ClassifierConfig{50, 1e-2, 8, 0}, 3);
  Rng rng(15);
  params.store.init_normal(rng);
  std::vector<int> ids = {0, 2, 3, 5};

  Eigen::VectorXd grad;
  classifier_loss(params, g, ids, &grad);
  REQUIRE(grad.size() >= 100);

  auto probe = params;
  const auto fd = oracle::fd_gradient(
      [&](const Eigen::VectorXd& x) {
        probe.store.flat() = x;
        return classifier_loss(probe, g, ids);
      },
      params.store.flat(), 1e-5);
  CHECK(oracle::max_rel_err(grad, fd, 1e-6) <= 1e-4);
}

TEST_CASE("separable features with empty adjacency classify almost perfectly") {
  int n = 60;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXi y(n), s(n);
  Rng rng(23);
  for (int i = 0; i < n; ++i) {
    y(i) = i < n / 2 ? 0 : 1;
    s(i) = i % 2;
    x(i, 0) = 2.0 * y(i) - 1.0;
    x(i, 1) = 0.1 * rng.normal();
  }
  auto g = AttributedGraph::from_edges(n, {}, x, s, y, "separable");
  auto split = split_nodes(g, SplitSpec{0.5, 0.25, 0.25, 3});
  auto out = train_node_classifier(g, split, ClassifierConfig{300, 0.05, 8, 4});
  CHECK(out.accuracy >= 0.95);
  CHECK(out.delta_eo == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out.params.trained);
}

TEST_CASE("constant positive labels give accuracy one and zero gaps") {
  auto g = small_sbm(15, 21);
  g.labels = Eigen::VectorXi::Ones(g.n);
  auto split = split_nodes(g, SplitSpec{0.5, 0.25, 0.25, 5});
  auto out = train_node_classifier(g, split, ClassifierConfig{200, 1e-2, 8, 6});
  CHECK(out.accuracy == 1.0);
  CHECK(out.delta_dp == 0.0);
  CHECK(out.delta_eo == 0.0);
}

TEST_CASE("all-negative labels are rejected by the equal-opportunity gap") {
  auto g = small_sbm(15, 22);
  g.labels = Eigen::VectorXi::Zero(g.n);
  auto split = split_nodes(g, SplitSpec{0.5, 0.25, 0.25, 5});
  CHECK_THROWS_AS(
      train_node_classifier(g, split, ClassifierConfig{30, 1e-2, 8, 6}), Error);
}

TEST_CASE("classifier training loss trends downward") {
  auto g = small_sbm(20, 24);
  auto split = split_nodes(g, SplitSpec{0.5, 0.25, 0.25, 7});
  std::vector<double> trace;
  train_node_classifier(g, split, ClassifierConfig{200, 1e-2, 16, 8}, &trace);
  REQUIRE(trace.size() == 200);
  double lead = std::accumulate(trace.begin(), trace.begin() + 20, 0.0) / 20.0;
  double trail = std::accumulate(trace.end() - 20, trace.end(), 0.0) / 20.0;
  CHECK(trail < lead);
}

TEST_CASE("classifier training is deterministic and seed-sensitive") {
  auto g = small_sbm(20, 25);
  auto split = split_nodes(g, SplitSpec{0.5, 0.25, 0.25, 9});
  ClassifierConfig cfg{80, 1e-2, 8, 11};
  auto a = train_node_classifier(g, split, cfg);
  auto b = train_node_classifier(g, split, cfg);
  CHECK(a.params.store == b.params.store);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.delta_dp == b.delta_dp);
  CHECK(a.delta_eo == b.delta_eo);
  cfg.seed = 12;
  auto c = train_node_classifier(g, split, cfg);
  CHECK(a.params.store.flat() != c.params.store.flat());
}

TEST_CASE("classifier rejects graphs without labels") {
  auto g = small_sbm(10, 26);
  g.labels.reset();
  NodeSplit split{{0, 1, 2}, {3, 4}, {5, 6}};
  CHECK_THROWS_AS(
      train_node_classifier(g, split, ClassifierConfig{10, 1e-2, 4, 0}), Error);
  CHECK_THROWS_AS(classifier_loss(init_classifier(ClassifierConfig{}, 4), g,
                                  {0, 1}),
                  Error);
}

TEST_CASE("embeddings are zero for zero weights and permutation-equivariant") {
  AutoencoderConfig cfg;
  cfg.n_max = 24;
  cfg.latent_dim = 4;
  cfg.hidden_dim = 6;
  auto g = small_sbm(10, 27);
  auto params = init_autoencoder(cfg, int(g.features.cols()));
  CHECK(embed_nodes(g, params).norm() == 0.0);

  Rng rng(33);
  params.store.init_normal(rng);
  Eigen::MatrixXd emb = embed_nodes(g, params);
  CHECK(emb.rows() == g.n);
  CHECK(emb.cols() == cfg.hidden_dim);

  auto perm = rng.permutation(g.n);
  Eigen::MatrixXd emb_p = embed_nodes(g.permuted(perm), params);
  double worst = 0.0;
  for (int i = 0; i < g.n; ++i) {
    worst = std::max(worst, (emb_p.row(i) - emb.row(perm[i])).norm());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("oracle embeddings rank every held-out partner first") {
  auto g = matching_graph(4);
  Eigen::MatrixXd emb =
      Eigen::MatrixXd::Identity(8, 8) + g.adjacency.cast<double>();
  auto le = link_prediction_eval(g, emb, 0.5, 10, 17);
  CHECK(le.eval_nodes == 4);
  CHECK(le.ndcg == 1.0);
}

TEST_CASE("random embeddings score at the permutation-null ndcg") {
  auto g = matching_graph(15);
  const int n = g.n;
  const int kCands = n - 1;

  Rng null_rng(404);
  Eigen::VectorXd desc(kCands);
  for (int i = 0; i < kCands; ++i) desc(i) = double(kCands - i);
  double chance = 0.0;
  const int trials = 30000;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> rel(kCands, 0);
    rel[0] = 1;
    null_rng.shuffle(rel);
    Eigen::VectorXi rv = Eigen::Map<Eigen::VectorXi>(rel.data(), kCands);
    chance += ndcg_at_k(desc, rv, 10);
  }
  chance /= trials;

  double mean = 0.0;
  const int runs = 30;
  for (int r = 0; r < runs; ++r) {
    Rng erng(500 + r);
    Eigen::MatrixXd emb(n, 8);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 8; ++j) emb(i, j) = erng.normal();
    auto le = link_prediction_eval(g, emb, 1.0 / 3.0, 10, 7);
    CHECK(le.eval_nodes == 10);
    mean += le.ndcg;
  }
  mean /= runs;
  CHECK(std::abs(mean - chance) <= 0.05);
}

TEST_CASE("link ranking metrics are invariant under positive rescaling") {
  auto g = small_sbm(15, 28);
  Rng rng(51);
  Eigen::MatrixXd emb(g.n, 5);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < 5; ++j) emb(i, j) = rng.normal();
  auto a = link_prediction_eval(g, emb, 0.25, 5, 11);
  auto b = link_prediction_eval(g, Eigen::MatrixXd(3.7 * emb), 0.25, 5, 11);
  CHECK(a.ndcg == b.ndcg);
  CHECK(a.delta_dp == b.delta_dp);
  CHECK(a.eval_nodes == b.eval_nodes);
}

TEST_CASE("leakage probe recovers the sensitive value from separable embeddings") {
  auto g = small_sbm(15, 29);
  Rng rng(52);
  Eigen::MatrixXd emb(g.n, 3);
  for (int i = 0; i < g.n; ++i) {
    emb(i, 0) = 2.0 * g.sensitive(i) - 1.0;
    emb(i, 1) = 0.1 * rng.normal();
    emb(i, 2) = 0.1 * rng.normal();
  }
  auto le = link_prediction_eval(g, emb, 0.2, 5, 13);
  CHECK(le.leakage_micro_f1 >= 0.9);
}

TEST_CASE("link evaluation rejects malformed inputs") {
  auto g = matching_graph(4);
  Eigen::MatrixXd emb = Eigen::MatrixXd::Zero(8, 2);
  CHECK_THROWS_AS(link_prediction_eval(g, emb, 0.0, 5, 0), Error);
  CHECK_THROWS_AS(link_prediction_eval(g, emb, 1.0, 5, 0), Error);
  CHECK_THROWS_AS(link_prediction_eval(g, emb, 0.5, 0, 0), Error);
  CHECK_THROWS_AS(
      link_prediction_eval(g, Eigen::MatrixXd::Zero(7, 2), 0.5, 5, 0), Error);
  CHECK_THROWS_AS(link_prediction_eval(g, emb, 0.1, 5, 0), Error);
}

TEST_CASE("fairdrop keeps the graph at delta zero and strips same-group edges at one") {
  auto g = small_sbm(30, 30);
  auto same = fairdrop_baseline(g, 0.0, 3);
  CHECK(same.adjacency == g.adjacency);

  auto purged = fairdrop_baseline(g, 1.0, 3);
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (g.sensitive(i) == g.sensitive(j)) {
        CHECK(purged.adjacency(i, j) == 0);
      } else {
        CHECK(purged.adjacency(i, j) == g.adjacency(i, j));
      }
    }
  }
  CHECK(topology_bias_ratio(purged, 1) == 0.0);
  CHECK(purged.features == g.features);
  CHECK(purged.sensitive == g.sensitive);
}

TEST_CASE("fairdrop removes about half the same-group edges at delta 0.5") {
  SbmSpec spec;
  spec.n_per_group = 80;
  spec.p_intra = 0.3;
  spec.p_inter = 0.05;
  spec.seed = 31;
  auto g = gen_homophily_sbm(spec);

  std::int64_t same_before = 0;
  for (auto [i, j] : g.edges()) {
    if (g.sensitive(i) == g.sensitive(j)) ++same_before;
  }
  REQUIRE(same_before > 1000);

  auto dropped = fairdrop_baseline(g, 0.5, 7);
  std::int64_t same_after = 0;
  for (auto [i, j] : dropped.edges()) {
    if (g.sensitive(i) == g.sensitive(j)) ++same_after;
    else CHECK(g.has_edge(i, j));
  }
  double removed = double(same_before - same_after);
  double sigma = std::sqrt(0.25 * double(same_before));
  CHECK(std::abs(removed - 0.5 * double(same_before)) <= 4.0 * sigma);

  auto again = fairdrop_baseline(g, 0.5, 7);
  CHECK(again.adjacency == dropped.adjacency);
  CHECK_THROWS_AS(fairdrop_baseline(g, -0.1, 0), Error);
  CHECK_THROWS_AS(fairdrop_baseline(g, 1.1, 0), Error);
}

namespace {

CompareConfig tiny_compare_config(const AutoencoderParams* encoder) {
  CompareConfig cfg;
  cfg.split = SplitSpec{0.5, 0.25, 0.25, 5};
  cfg.classifier = ClassifierConfig{60, 0.02, 8, 6};
  cfg.holdout_frac = 0.2;
  cfg.k = 10;
  cfg.seed = 7;
  cfg.encoder = encoder;
  return cfg;
}

AutoencoderParams untrained_encoder(const AttributedGraph& g) {
  AutoencoderConfig cfg;
  cfg.n_max = 64;
  cfg.latent_dim = 4;
  cfg.hidden_dim = 8;
  auto params = init_autoencoder(cfg, int(g.features.cols()));
  Rng rng(61);
  params.store.init_normal(rng);
  return params;
}

}  // namespace

TEST_CASE("identical methods produce identical comparison rows") {
  auto g = small_sbm(15, 32);
  auto enc = untrained_encoder(g);
  auto table = compare_methods(
      {{"alpha", g}, {"beta", g}},
      {kTaskNodeClassification, kTaskLinkPrediction},
      tiny_compare_config(&enc));
  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows[0].method == "alpha");
  CHECK(table.rows[0].task == kTaskLinkPrediction);
  CHECK(table.rows[1].task == kTaskNodeClassification);
  CHECK(table.rows[2].method == "beta");
  for (int k = 0; k < 2; ++k) {
    const auto& a = table.rows[k];
    const auto& b = table.rows[k + 2];
    CHECK(a.task == b.task);
    CHECK(a.utility == b.utility);
    CHECK(a.delta_dp == b.delta_dp);
    CHECK(a.delta_eo == b.delta_eo);
    CHECK(a.t0 == b.t0);
    CHECK(a.t1 == b.t1);
    CHECK(a.hypervolume == b.hypervolume);
    CHECK(a.error.empty());
  }
}

TEST_CASE("comparison hypervolumes match the metric on worst-value references") {
  auto g = small_sbm(15, 33);
  auto enc = untrained_encoder(g);
  auto table = compare_methods(
      {{"original", g}, {"fairdrop", fairdrop_baseline(g, 0.7, 9)}},
      {kTaskNodeClassification, kTaskLinkPrediction},
      tiny_compare_config(&enc));
  REQUIRE(table.rows.size() == 4);

  for (const char* task : {kTaskNodeClassification, kTaskLinkPrediction}) {
    double ref_u = 1e300, ref_dp = -1e300, ref_eo = -1e300;
    for (const auto& row : table.rows) {
      if (row.task != task) continue;
      REQUIRE(row.error.empty());
      ref_u = std::min(ref_u, row.utility);
      ref_dp = std::max(ref_dp, row.delta_dp);
      ref_eo = std::max(ref_eo, row.delta_eo);
    }
    for (const auto& row : table.rows) {
      if (row.task != task) continue;
      double want = hypervolume(
          100.0 * row.utility, 100.0 * row.delta_dp, 100.0 * row.delta_eo,
          {100.0 * ref_u, 100.0 * ref_dp, 100.0 * ref_eo});
      CHECK(std::abs(row.hypervolume - want) <= 1e-12);
    }
  }
}

TEST_CASE("adding a method changes other rows only through the references") {
  auto g = small_sbm(15, 34);
  auto cfg = tiny_compare_config(nullptr);
  std::vector<MethodEntry> two = {{"original", g},
                                  {"fairdrop", fairdrop_baseline(g, 0.5, 9)}};
  std::vector<MethodEntry> three = two;
  three.push_back({"purged", fairdrop_baseline(g, 1.0, 9)});

  auto t2 = compare_methods(two, {kTaskNodeClassification}, cfg);
  auto t3 = compare_methods(three, {kTaskNodeClassification}, cfg);

  for (const auto& r2 : t2.rows) {
    for (const auto& r3 : t3.rows) {
      if (r3.method != r2.method) continue;
      CHECK(r3.utility == r2.utility);
      CHECK(r3.delta_dp == r2.delta_dp);
      CHECK(r3.delta_eo == r2.delta_eo);
      CHECK(r3.t1 == r2.t1);
    }
  }

  auto refs_of = [](const ComparisonTable& t) {
    std::array<double, 3> refs = {1e300, -1e300, -1e300};
    for (const auto& row : t.rows) {
      refs[0] = std::min(refs[0], row.utility);
      refs[1] = std::max(refs[1], row.delta_dp);
      refs[2] = std::max(refs[2], row.delta_eo);
    }
    return refs;
  };
  if (refs_of(t2) == refs_of(t3)) {
    for (const auto& r2 : t2.rows) {
      for (const auto& r3 : t3.rows) {
        if (r3.method == r2.method) CHECK(r3.hypervolume == r2.hypervolume);
      }
    }
  }
}

TEST_CASE("full same-group removal lowers the closed-pair bias ratio") {
  auto g = small_sbm(20, 35);
  auto table = compare_methods(
      {{"original", g}, {"purged", fairdrop_baseline(g, 1.0, 4)}},
      {kTaskNodeClassification}, tiny_compare_config(nullptr));
  const ComparisonRow* orig = nullptr;
  const ComparisonRow* purged = nullptr;
  for (const auto& row : table.rows) {
    if (row.method == "original") orig = &row;
    if (row.method == "purged") purged = &row;
  }
  REQUIRE(orig != nullptr);
  REQUIRE(purged != nullptr);
  CHECK(purged->t1 == 0.0);
  CHECK(purged->t1 < orig->t1);
}

TEST_CASE("failing methods are marked without aborting the table") {
  auto g = small_sbm(15, 36);
  auto unlabeled = g;
  unlabeled.labels.reset();
  auto table = compare_methods({{"good", g}, {"unlabeled", unlabeled}},
                               {kTaskNodeClassification},
                               tiny_compare_config(nullptr));
  REQUIRE(table.rows.size() == 2);
  const auto& good = table.rows[0];
  const auto& bad = table.rows[1];
  CHECK(good.method == "good");
  CHECK(good.error.empty());
  CHECK(std::isfinite(good.utility));
  CHECK(std::isfinite(good.hypervolume));
  CHECK(bad.method == "unlabeled");
  CHECK(!bad.error.empty());
  CHECK(std::isnan(bad.utility));
  CHECK(std::isnan(bad.hypervolume));
  CHECK(std::isfinite(bad.t1));
}

TEST_CASE("link task without an encoder is marked per row") {
  auto g = small_sbm(20, 37);
  auto table = compare_methods(
      {{"a", g}, {"b", g}}, {kTaskNodeClassification, kTaskLinkPrediction},
      tiny_compare_config(nullptr));
  for (const auto& row : table.rows) {
    if (row.task == kTaskLinkPrediction) {
      CHECK(!row.error.empty());
      CHECK(std::isnan(row.utility));
    } else {
      CHECK(row.error.empty());
      CHECK(std::isfinite(row.utility));
    }
  }
}

TEST_CASE("comparison rejects degenerate requests") {
  auto g = small_sbm(10, 38);
  auto cfg = tiny_compare_config(nullptr);
  CHECK_THROWS_AS(compare_methods({{"only", g}}, {kTaskNodeClassification}, cfg),
                  Error);
  CHECK_THROWS_AS(compare_methods({{"a", g}, {"b", g}}, {}, cfg), Error);
  CHECK_THROWS_AS(compare_methods({{"a", g}, {"b", g}}, {"clustering"}, cfg),
                  Error);
  auto bad = cfg;
  bad.split.test_frac = 0.5;
  CHECK_THROWS_AS(
      compare_methods({{"a", g}, {"b", g}}, {kTaskNodeClassification}, bad),
      Error);
}

TEST_CASE("comparison table round-trips through csv and json") {
  TempDir tmp;
  auto g = small_sbm(12, 39);
  auto unlabeled = g;
  unlabeled.labels.reset();
  auto cfg = tiny_compare_config(nullptr);
  auto table = compare_methods({{"good", g}, {"unlabeled", unlabeled}},
                               {kTaskNodeClassification}, cfg);

  auto csv_path = tmp.path / "table.csv";
  auto json_path = tmp.path / "table.json";
  write_comparison_csv(table, csv_path);
  write_comparison_json(table, cfg, json_path);

  std::ifstream csv(csv_path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] ==
        "method,task,utility_name,utility,delta_dp,delta_eo,t0,t1,hypervolume");
  CHECK(lines[1].rfind("good,node_classification,accuracy,", 0) == 0);
  CHECK(lines[2].rfind("unlabeled,node_classification,accuracy,,,", 0) == 0);

  std::ifstream jf(json_path);
  nlohmann::json doc = nlohmann::json::parse(jf);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["seed"] == 7);
  CHECK(doc["config"]["k"] == 10);
  CHECK(doc["config"]["split"]["train_frac"] == 0.5);
  REQUIRE(doc["rows"].size() == 2);
  CHECK(doc["rows"][0]["method"] == "good");
  CHECK(doc["rows"][0]["utility"].is_number());
  CHECK(doc["rows"][1]["utility"].is_null());
  CHECK(doc["rows"][1].contains("error"));
}
