#pragma once

#include <Eigen/Dense>
#include <vector>

namespace roughheat {

/// Uniform grid t_k = k/M on [0,1].
std::vector<double> uniform_grid(int M);

/// Path sampled on a grid, piecewise-linear in between. values is (M+1) x d.
struct GridPath {
  std::vector<double> times;
  Eigen::MatrixXd values;

  GridPath() = default;
  GridPath(std::vector<double> t, Eigen::MatrixXd v);

  int cells() const { return static_cast<int>(times.size()) - 1; }
  int dim() const { return static_cast<int>(values.cols()); }
  Eigen::VectorXd at(int k) const { return values.row(k).transpose(); }
  Eigen::VectorXd increment(int k) const { return (values.row(k + 1) - values.row(k)).transpose(); }
  /// Cell increments as an M x d matrix.
  Eigen::MatrixXd increments() const;
};

GridPath operator+(const GridPath& a, const GridPath& b);
GridPath operator*(double c, const GridPath& a);

/// Index of t in the grid, or -1 when t is not a grid point (tolerance 1e-12).
int grid_index(const std::vector<double>& grid, double t);

}  // namespace roughheat
