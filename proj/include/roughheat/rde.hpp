#pragma once

#include <Eigen/Dense>
#include <vector>

#include "roughheat/exponents.hpp"
#include "roughheat/fgauss.hpp"
#include "roughheat/roughlift.hpp"
#include "roughheat/vector_fields.hpp"

namespace roughheat {

struct SolveOptions {
  bool jacobians = true;
  /// Endpoint sensitivities to the level-1 log increment of every cell (implies jacobians).
  bool sensitivity = false;
};

struct SolveResult {
  std::vector<double> times;
  Eigen::MatrixXd y;                  // (M+1) x n
  std::vector<Eigen::MatrixXd> J, K;  // Jacobian of the flow and its inverse, M+1 each
  /// sens[p] (n x d): d y_M / d X^m where X is the level-1 log of cell p, driver coordinates only.
  std::vector<Eigen::MatrixXd> sens;

  int cells() const { return static_cast<int>(times.size()) - 1; }
  Eigen::VectorXd endpoint() const { return y.row(y.rows() - 1).transpose(); }
  GridPath path() const { return GridPath(times, y); }
};

/// Step-N Euler with exact cell signatures. The driver has d+1 coordinates, time last;
/// N is the driver depth.
SolveResult solve_rde(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const RoughPathGrid& driver,
                      const SolveOptions& opts = {});

/// Driver (eps w + gamma, eps^{1/H} t) built from a d-dimensional rough path w.
RoughPathGrid scaled_shifted_driver(const RoughPathGrid& w, const GridPath& gamma, double eps, const Hurst& H);
SolveResult solve_scaled_shifted(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const RoughPathGrid& w,
                                 const CMElement& gamma, double eps, const Hurst& H, const SolveOptions& opts = {});
/// Skeleton Young ODE driven by gamma rendered on `grid`; no drift, no noise.
SolveResult solve_skeleton(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const CMElement& gamma,
                           const std::vector<double>& grid, int depth, const SolveOptions& opts = {});
/// Cell-constant n x d integrands A_p with D_h phi0_1 = sum_p A_p dh_p.
std::vector<Eigen::MatrixXd> skeleton_gradient(const SolveResult& sk);

/// Endpoint of the Euler scheme on a polyline driver given by its increments
/// (M x (d+1), time column last). No Jacobians; used by Monte Carlo loops.
Eigen::VectorXd solve_endpoint_polyline(const VectorFieldSystem& vf, const Eigen::VectorXd& a,
                                        const Eigen::MatrixXd& increments, int depth);

/// sum_p A_p dx_p: the first-order term phi^1_1 for a polyline perturbation.
Eigen::VectorXd linear_response(const std::vector<Eigen::MatrixXd>& A, const Eigen::MatrixXd& dx);

struct ExpansionTerms {
  CMElement gamma;
  Hurst hurst;
  std::vector<Exponent> kappas;
  std::vector<GridPath> phi;  // phi[j] belongs to kappas[j]; phi[0] is the skeleton
};

/// Fractional Taylor terms of eps -> y~^eps (driver (eps x + gamma, eps^{1/H} t)) for the
/// exponents of Lambda_1 up to kappa_max, computed as exact jets of the discrete scheme.
ExpansionTerms expansion_terms(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const CMElement& gamma,
                               const RoughPathGrid& x, const Hurst& H, double kappa_max);

/// y~^eps - sum_{j<=k} eps^{kappa_j} phi^{kappa_j}.
GridPath remainder(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const CMElement& gamma,
                   const RoughPathGrid& x, double eps, int k, const Hurst& H, const ExpansionTerms* terms = nullptr);

void write_solution_csv(const std::string& file, const SolveResult& res);

}  // namespace roughheat
