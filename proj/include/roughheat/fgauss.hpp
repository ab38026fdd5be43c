#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roughheat/grid_path.hpp"

namespace roughheat {

/// Hurst parameter with an optional exact rational form p/q.
struct Hurst {
  double value = 0.5;
  std::optional<std::pair<long, long>> rational;

  Hurst() = default;
  explicit Hurst(double h);
  Hurst(long p, long q);
  /// Accepts "p/q" or a decimal.
  static Hurst parse(const std::string& text);
  std::string to_string() const;
  /// floor(1/H): the rough path depth needed for this roughness.
  int depth() const;
  double inverse() const;
};

double fbm_cov(double s, double t, double H);

struct FbmSpec {
  Hurst hurst;
  int dim = 1;
  int M = 256;

  FbmSpec() = default;
  FbmSpec(Hurst h, int d, int m);
  std::vector<double> times() const { return uniform_grid(M); }
};

/// Gamma_pq = E[dw_p dw_q] for a one-dimensional fBm on the FbmSpec grid.
Eigen::MatrixXd increment_gram(const FbmSpec& spec);
/// [R(t_k, t_l)] for grid times t_1..t_M.
Eigen::MatrixXd grid_covariance(const FbmSpec& spec);

/// Draws grid fBm paths from a Cholesky factor of the increment Gram. Path i
/// always uses the random stream (seed, i), so batches do not depend on how the
/// work is split.
class FbmSampler {
 public:
  explicit FbmSampler(const FbmSpec& spec);

  const FbmSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& factor() const { return chol_; }

  /// Increments of path `index` as an M x d matrix.
  void increments(std::uint64_t seed, std::uint64_t index, Eigen::MatrixXd& out) const;
  GridPath path(std::uint64_t seed, std::uint64_t index) const;

 private:
  FbmSpec spec_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd chol_;
};

std::vector<GridPath> sample_fbm(const FbmSpec& spec, int n_paths, std::uint64_t seed, int workers = 0);

/// Cameron-Martin element gamma^i(.) = sum_k a^i_k R(t_k, .).
struct CMElement {
  Hurst hurst;
  std::vector<double> knots;
  Eigen::MatrixXd coeffs;  // d x K

  CMElement() = default;
  CMElement(Hurst h, std::vector<double> knots, Eigen::MatrixXd coeffs);
  static CMElement zero(Hurst h, int d, std::vector<double> knots);

  int dim() const { return static_cast<int>(coeffs.rows()); }
  Eigen::VectorXd eval(double t) const;
  GridPath render(const std::vector<double>& grid) const;
  Eigen::MatrixXd gram() const;
};

double cm_norm_sq(const CMElement& gamma);
double cm_inner(const CMElement& a, const CMElement& b);
/// f, g: M x d cell values of step functions on the FbmSpec grid.
double htilde_inner(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, const Eigen::MatrixXd& gram);
double paley_wiener(const CMElement& gamma, const GridPath& w);

struct VolterraReport {
  Eigen::MatrixXd kernel;  // lower-triangular L with R = L L^T on t_1..t_M
  double reconstruction_residual;
  double unitarity_residual;
  double corner;           // (L L^T) at t = 1
};
VolterraReport volterra_checks(const Hurst& H, int M);

void write_paths_csv(const std::string& file, const std::vector<GridPath>& paths);

}  // namespace roughheat
