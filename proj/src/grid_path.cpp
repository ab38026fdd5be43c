#include "roughheat/grid_path.hpp"

#include <algorithm>
#include <cmath>

#include "roughheat/error.hpp"

namespace roughheat {

std::vector<double> uniform_grid(int M) {
  require(M >= 1, "grid", "grid needs at least one cell");
  std::vector<double> t(M + 1);
  for (int k = 0; k <= M; ++k) t[k] = static_cast<double>(k) / M;
  return t;
}

GridPath::GridPath(std::vector<double> t, Eigen::MatrixXd v) : times(std::move(t)), values(std::move(v)) {
  require(times.size() >= 2, "grid", "path needs at least two grid points");
  require(static_cast<Eigen::Index>(times.size()) == values.rows(), "grid", "times/values size mismatch");
  for (std::size_t k = 1; k < times.size(); ++k)
    require(times[k] > times[k - 1], "grid", "grid must be strictly increasing");
  require(values.allFinite(), "grid", "path values must be finite");
}

Eigen::MatrixXd GridPath::increments() const {
  const int M = cells();
  return values.bottomRows(M) - values.topRows(M);
}

GridPath operator+(const GridPath& a, const GridPath& b) {
  require(a.times == b.times && a.dim() == b.dim(), "grid", "paths live on different grids");
  return GridPath(a.times, a.values + b.values);
}

GridPath operator*(double c, const GridPath& a) { return GridPath(a.times, c * a.values); }

int grid_index(const std::vector<double>& grid, double t) {
  auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-12);
  if (it != grid.end() && std::abs(*it - t) <= 1e-12) return static_cast<int>(it - grid.begin());
  return -1;
}

}  // namespace roughheat
