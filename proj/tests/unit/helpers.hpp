#pragma once

#include <Eigen/Dense>
#include <initializer_list>

#include "roughheat/grid_path.hpp"
#include "roughheat/parallel.hpp"

namespace rh_test {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Random-walk polyline on the uniform grid, starting at zero.
inline roughheat::GridPath random_polyline(roughheat::RandomStream& rng, int M, int d, double scale) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(M + 1, d);
  for (int k = 1; k <= M; ++k)
    for (int i = 0; i < d; ++i) v(k, i) = v(k - 1, i) + scale * rng.normal() / std::sqrt(double(M));
  return roughheat::GridPath(roughheat::uniform_grid(M), v);
}

inline roughheat::GridPath line_path(const Eigen::VectorXd& v, int M) {
  const auto t = roughheat::uniform_grid(M);
  Eigen::MatrixXd vals(M + 1, v.size());
  for (int k = 0; k <= M; ++k) vals.row(k) = t[k] * v.transpose();
  return roughheat::GridPath(t, vals);
}

}  // namespace rh_test
