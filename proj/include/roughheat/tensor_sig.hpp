#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace roughheat {

/// Element of the truncated tensor algebra T^N(R^d), N <= 3, with the scalar
/// level fixed to one (group-like elements) or zero (Lie/nilpotent elements).
/// Levels are stored flat: level 1 (d), level 2 (d*d, row-major), level 3.
class TruncatedSignature {
 public:
  TruncatedSignature() = default;
  TruncatedSignature(int dim, int depth);

  int dim() const { return dim_; }
  int depth() const { return depth_; }

  double& at(int i) { return data_[i]; }
  double& at(int i, int j) { return data_[dim_ + i * dim_ + j]; }
  double& at(int i, int j, int k) { return data_[dim_ + dim_ * dim_ + (i * dim_ + j) * dim_ + k]; }
  double at(int i) const { return data_[i]; }
  double at(int i, int j) const { return data_[dim_ + i * dim_ + j]; }
  double at(int i, int j, int k) const {
    return data_[dim_ + dim_ * dim_ + (i * dim_ + j) * dim_ + k];
  }

  std::span<double> level(int k);
  std::span<const double> level(int k) const;
  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }

  Eigen::VectorXd level1() const;
  Eigen::MatrixXd level2() const;

  static std::size_t level_offset(int dim, int k);

 private:
  int dim_ = 0;
  int depth_ = 0;
  std::vector<double> data_;
};

TruncatedSignature identity_signature(int dim, int depth);
TruncatedSignature segment_signature(const Eigen::VectorXd& delta, int depth);
TruncatedSignature chen_mul(const TruncatedSignature& a, const TruncatedSignature& b);
TruncatedSignature dilate_sig(const TruncatedSignature& s, double c);
TruncatedSignature inverse(const TruncatedSignature& s);

/// Tensor logarithm of a group-like element; result has zero scalar part.
TruncatedSignature sig_log(const TruncatedSignature& s);
/// Tensor exponential of an element with zero scalar part.
TruncatedSignature sig_exp(const TruncatedSignature& lie);
/// d/ds exp(L + s E) at s = 0, as an element with zero scalar part.
TruncatedSignature sig_exp_derivative(const TruncatedSignature& lie, const TruncatedSignature& dir);

/// Product of two elements with zero scalar part (truncated).
TruncatedSignature mul_nilpotent(const TruncatedSignature& a, const TruncatedSignature& b);
TruncatedSignature operator+(const TruncatedSignature& a, const TruncatedSignature& b);
TruncatedSignature operator-(const TruncatedSignature& a, const TruncatedSignature& b);
TruncatedSignature operator*(double c, const TruncatedSignature& a);

/// Frobenius norm of a level.
double level_norm(const TruncatedSignature& s, int k);
double max_abs_diff(const TruncatedSignature& a, const TruncatedSignature& b);

/// Embed a signature over R^d into R^{d2} via coordinate map idx (size d).
TruncatedSignature embed_lie(const TruncatedSignature& lie, int new_dim, const std::vector<int>& idx);

}  // namespace roughheat
