// Brute-force reference implementations for tests. Everything here is
// written independently of the library code paths it checks: plain loops,
// exhaustive enumeration, no shared helpers.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Adjacency = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct BruteStats {
  int max_degree = 0;
  double avg_degree = 0.0;
  int largest_cc = 0;
  std::int64_t wedges = 0;
  std::int64_t claws = 0;
  std::int64_t triangles = 0;
  double gini = 0.0;
  double entropy = 0.0;
  double clustering = 0.0;
  double assortativity = 0.0;
  int components = 0;
};

// Enumerates all vertex pairs and triples directly.
BruteStats brute_stats(const Adjacency& adj);

// Frequency ratio over explicitly materialized pair lists.
double brute_bias_ratio(const Adjacency& adj, const Eigen::VectorXi& sensitive,
                        int edge_state);

// Exact 1-D W1 between two samples: area between empirical CDFs.
double exact_w1(std::vector<double> a, std::vector<double> b);

// Exhaustive nearest-opposite-pair matching over ALL unordered pairs:
// pair (i,j) flips its treatment iff some pair with the opposite factual
// treatment lies within Euclidean distance xi of x_i + x_j.
Adjacency brute_counterfactual(const Eigen::MatrixXd& features,
                               const Adjacency& t_factual, double xi);

// Central finite difference of f at x, one coordinate at a time.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double eps = 1e-5);

// Largest relative component gap, with an absolute floor for tiny entries.
double max_rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want,
                   double floor = 1e-8);

}  // namespace oracle
