#include "fairgdiff/param_store.hpp"

#include <cmath>

#include "fairgdiff/error.hpp"
#include "fairgdiff/rng.hpp"

namespace fairgdiff {

Eigen::Index ParamStore::add(const std::string& name, Eigen::Index rows,
                             Eigen::Index cols) {
  if (index_.count(name))
    throw precondition_error("parameter block already exists: " + name);
  if (rows < 1 || cols < 1)
    throw precondition_error("parameter block needs positive shape: " + name);
  const Eigen::Index offset = flat_.size();
  blocks_.push_back({name, offset, rows, cols});
  index_[name] = blocks_.size() - 1;
  flat_.conservativeResize(offset + rows * cols);
  flat_.tail(rows * cols).setZero();
  return offset;
}

const ParamStore::BlockInfo& ParamStore::info(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw precondition_error("unknown parameter block: " + name);
  return blocks_[it->second];
}

Eigen::Map<RowMatrixXd> ParamStore::view(const std::string& name) {
  const auto& b = info(name);
  return {flat_.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const RowMatrixXd> ParamStore::view(const std::string& name) const {
  const auto& b = info(name);
  return {flat_.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const RowMatrixXd> ParamStore::view_in(
    const std::string& name, const Eigen::VectorXd& flat) const {
  if (flat.size() != flat_.size())
    throw precondition_error("external vector does not match store layout");
  const auto& b = info(name);
  return {flat.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<RowMatrixXd> ParamStore::view_in(const std::string& name,
                                            Eigen::VectorXd& flat) const {
  if (flat.size() != flat_.size())
    throw precondition_error("external vector does not match store layout");
  const auto& b = info(name);
  return {flat.data() + b.offset, b.rows, b.cols};
}

void ParamStore::init_normal(Rng& rng) {
  for (const auto& b : blocks_) {
    const bool is_bias = b.name.size() > 1 && b.name.ends_with(".b");
    const double scale = is_bias ? 0.0 : 1.0 / std::sqrt(double(b.cols));
    for (Eigen::Index k = 0; k < b.rows * b.cols; ++k)
      flat_[b.offset + k] = scale == 0.0 ? 0.0 : scale * rng.normal();
  }
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& a = blocks_[i];
    const auto& b = other.blocks_[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols) return false;
  }
  return flat_ == other.flat_;
}

AdamOptimizer::AdamOptimizer(Eigen::Index size, double lr, double beta1,
                             double beta2, double eps)
    : lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw precondition_error("optimizer size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, double(t_));
  const double c2 = 1.0 - std::pow(beta2_, double(t_));
  params.array() -=
      lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace fairgdiff
