#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "roughheat/exponents.hpp"
#include "roughheat/fgauss.hpp"
#include "roughheat/minimizer.hpp"
#include "roughheat/vector_fields.hpp"

namespace roughheat {

enum class DensityMethod { kPlain, kShifted };
const char* to_string(DensityMethod m);
DensityMethod parse_density_method(const std::string& s);

struct DensityModel {
  std::string id;
  std::shared_ptr<const VectorFieldSystem> vf;
  Eigen::VectorXd a, a_prime;
  Hurst hurst;
  int M = 64;     // solver grid; a multiple of the minimizer knot count for the shifted method
  int depth = 0;  // 0: floor(1/H)
  std::optional<MinimizerResult> minimizer;  // required by the shifted method
};

struct DensityOptions {
  DensityMethod method = DensityMethod::kShifted;
  int n_samples = 100000;
  double bandwidth = 0.0;  // 0: default rule
  std::uint64_t seed = 1;
  int batches = 20;
  int workers = 0;
  /// Samples whose homogeneous p-variation norm of eps*w (p = depth + 1) exceeds this are dropped.
  double truncation_radius = std::numeric_limits<double>::infinity();
  /// When positive, report the share of the estimate carried by samples with eps*w outside this radius.
  double outside_radius = 0.0;
};

struct DensityPoint {
  double t = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  int n_samples = 0;
  double effective_samples = 0.0;  // (sum w)^2 / sum w^2
  std::vector<double> bandwidths;
  double outside_fraction = std::numeric_limits<double>::quiet_NaN();
};

struct DensityEstimate {
  std::string model;
  DensityMethod method = DensityMethod::kShifted;
  std::uint64_t seed = 0;
  std::vector<DensityPoint> points;
};

/// Kernel estimate of p_t(a, a') from solves of the RDE at eps = t^H.
DensityPoint estimate_density(const DensityModel& model, double t, const DensityOptions& opts);
DensityEstimate estimate_density_curve(const DensityModel& model, const std::vector<double>& ts,
                                       const DensityOptions& opts);

/// Closed-form density of y = a exp(sigma w_t).
double lognormal_density(double a, double a_prime, double sigma, double t, double H);

struct AsymptoticFit {
  double rate_hat = 0.0;
  double prefactor_exp_hat = 0.0;
  double alpha0_hat = 0.0;
  double lambda1 = 0.0;  // correction exponent used for the intercept
  std::vector<double> rate_residuals;
  std::vector<double> prefactor_residuals;
  std::vector<double> alpha_residuals;  // relative
};

/// energy_sq is ||gamma_bar||^2. The drift flag selects the correction exponent.
AsymptoticFit fit_asymptotics(const DensityEstimate& est, double energy_sq, int n, const Hurst& H, bool drift);

struct LeadingCoefficient {
  /// Bandwidth-extrapolated 2 E_b - E_{sqrt2 b}, which cancels the O(b^2) kernel bias.
  double estimate = 0.0;
  double se = 0.0;
  double raw_estimate = 0.0;  // plain Gaussian kernel at bandwidth b
  double raw_se = 0.0;
  double gaussian_mass = 0.0;  // (2 pi)^{-n/2} det(Q)^{-1/2}
  double bandwidth = 0.0;
  bool sanity = false;
  bool heavy_tail = false;
  double top_share = 0.0;  // share of the mass carried by the top 1% of weights
};

struct LeadingOptions {
  int n_samples = 100000;
  double bandwidth = 0.0;  // 0: n_samples^{-1/(n+4)}
  std::uint64_t seed = 1;
  bool sanity = false;
  int batches = 20;
  int workers = 0;
};

LeadingCoefficient leading_coefficient(const VectorFieldSystem& vf, const MinimizerResult& res,
                                       const LeadingOptions& opts);

std::string density_json(const DensityEstimate& est);
std::string fit_json(const AsymptoticFit& fit);
std::string leading_json(const LeadingCoefficient& lc);
void write_density_csv(const std::string& file, const DensityEstimate& est);

}  // namespace roughheat
