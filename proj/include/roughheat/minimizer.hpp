#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "roughheat/fgauss.hpp"
#include "roughheat/malliavin.hpp"
#include "roughheat/vector_fields.hpp"

namespace roughheat {

struct MinimizerOptions {
  int knots = 64;  // knots t_k = k/K, k = 1..K; the skeleton is solved on the same grid
  int starts = 5;
  int max_outer = 200;
  std::uint64_t seed = 1;
  int depth = 0;  // 0: floor(1/H)
  double init_scale = 0.3;
  int workers = 0;
};

struct MinimizerResult {
  CMElement gamma_bar;
  double energy = 0.0;  // ||gamma_bar||^2 / 2
  Eigen::VectorXd nu_bar;
  CovMatrix Q_at_min;
  double constraint_residual = 0.0;
  double kkt_residual = 0.0;  // H-norm of gamma_bar - Riesz(nu . D phi0_1)
  double hessian_min_eig = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool rank_deficient = false;  // constraint Jacobian nearly singular at the minimizer
  bool multiple_basins = false;  // another start found a different local minimum
  bool uniqueness_suspect = false;  // another start tied in energy with a different path (heuristic)
  int outer_iterations = 0;
  std::vector<double> energy_history;  // feasible iterates of the winning start
  std::vector<double> start_energies;
  std::vector<Eigen::MatrixXd> A;  // skeleton gradient at the minimizer
  std::vector<double> grid;
  int depth = 2;
  Eigen::VectorXd start, target;
};

MinimizerResult minimize_energy(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const Eigen::VectorXd& a_prime,
                                const Hurst& H, const MinimizerOptions& opts = {});

struct MultiplierReport {
  double max_residual;
  double rms_residual;
  double gamma_norm;
};

/// |<gamma_bar, w> - <nu_bar, phi^1_1(w)>| over sampled fBm paths on the minimizer grid.
MultiplierReport multiplier_identity_check(const MinimizerResult& res, int n_samples, std::uint64_t seed,
                                           int workers = 0);

struct HessianReport {
  double min_second_difference;
  std::vector<double> second_differences;  // E(s0) + E(-s0) - 2E(0) per direction
  std::vector<double> doubled_ratio;       // same with 2h, divided by the above
};

HessianReport hessian_check(const VectorFieldSystem& vf, MinimizerResult& res, int n_dirs, std::uint64_t seed,
                            double s0 = 1e-2);

std::string minimizer_json(const MinimizerResult& res);

}  // namespace roughheat
