#pragma once

#include <vector>

#include "roughheat/grid_path.hpp"
#include "roughheat/tensor_sig.hpp"

namespace roughheat {

/// Rough path on a grid: one signature per cell plus the Chen-folded prefixes.
/// Inside a cell the path is read as the geodesic exp(theta * log S).
class RoughPathGrid {
 public:
  RoughPathGrid() = default;
  RoughPathGrid(std::vector<double> times, std::vector<TruncatedSignature> cells);

  int dim() const { return dim_; }
  int depth() const { return depth_; }
  int cells_count() const { return static_cast<int>(cells_.size()); }
  const std::vector<double>& times() const { return times_; }
  const TruncatedSignature& cell(int k) const { return cells_[k]; }
  const std::vector<TruncatedSignature>& cells() const { return cells_; }
  const TruncatedSignature& prefix(int k) const { return prefixes_[k]; }
  /// Signature over [t_j, t_k].
  TruncatedSignature increment(int j, int k) const;

 private:
  int dim_ = 0;
  int depth_ = 0;
  std::vector<double> times_;
  std::vector<TruncatedSignature> cells_;
  std::vector<TruncatedSignature> prefixes_;
};

/// Test hook: when set, every prefix built afterwards gets its level 2 shifted by 1e-6.
void set_chen_fault(bool on);
bool chen_fault();

RoughPathGrid lift_grid_path(const GridPath& x, int depth);
RoughPathGrid dilate(const RoughPathGrid& x, double c);
/// Extend by a time coordinate lambda_t = c t, placed last.
RoughPathGrid pair_with_time(const RoughPathGrid& x, double c);
/// Young translation by a path gamma given on the same grid; `refine` sub-cells per cell.
RoughPathGrid young_translate(const RoughPathGrid& x, const GridPath& gamma, int refine = 4);

/// Cross terms of the translation, read off the joint signature of (x, gamma) over [0,1].
struct YoungTerms {
  Eigen::MatrixXd A1, A2;                     // int x (x) dgamma,  int gamma (x) dx
  std::vector<double> B1, B2, B3, C1, C2, C3;  // d^3 row-major
  TruncatedSignature x_sig, gamma_sig;
};
YoungTerms young_terms(const RoughPathGrid& x, const GridPath& gamma, int refine = 4);

/// Joint rough path over R^{2d}: first d coordinates from x, last d from gamma.
RoughPathGrid joint_with_path(const RoughPathGrid& x, const GridPath& gamma, int refine = 4);

}  // namespace roughheat
