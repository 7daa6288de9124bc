#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fairgdiff {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Rng;

/// Named parameter blocks backed by one flat vector, so optimizers and
/// finite-difference checks can treat the model as a single R^P point while
/// forward passes read shaped row-major views.
class ParamStore {
 public:
  /// Declares a rows x cols block. Must happen before any view is taken;
  /// returns the block's offset into the flat vector.
  Eigen::Index add(const std::string& name, Eigen::Index rows,
                   Eigen::Index cols);

  Eigen::Map<RowMatrixXd> view(const std::string& name);
  Eigen::Map<const RowMatrixXd> view(const std::string& name) const;

  /// Shaped views into an external vector laid out like this store (used to
  /// read or fill gradients by block name).
  Eigen::Map<const RowMatrixXd> view_in(const std::string& name,
                                        const Eigen::VectorXd& flat) const;
  Eigen::Map<RowMatrixXd> view_in(const std::string& name,
                                  Eigen::VectorXd& flat) const;

  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::Index size() const { return flat_.size(); }

  /// Fills every block with normal draws scaled by 1/sqrt(fan_in) and
  /// zeroes every block whose name ends in ".b".
  void init_normal(Rng& rng);

  struct BlockInfo {
    std::string name;
    Eigen::Index offset, rows, cols;
  };
  const std::vector<BlockInfo>& blocks() const { return blocks_; }

  bool operator==(const ParamStore& other) const;

 private:
  const BlockInfo& info(const std::string& name) const;

  std::vector<BlockInfo> blocks_;
  std::map<std::string, std::size_t> index_;
  Eigen::VectorXd flat_;
};

/// Adam with bias correction; deterministic, allocation-free after the
/// first step.
class AdamOptimizer {
 public:
  AdamOptimizer(Eigen::Index size, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace fairgdiff
