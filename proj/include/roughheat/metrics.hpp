#pragma once

#include <vector>

#include "roughheat/roughlift.hpp"

namespace roughheat {

/// p-variation of level i over the grid interval [s, t], sup over grid partitions.
double pvar_norm(const RoughPathGrid& x, int level, double p, double s = 0.0, double t = 1.0);
double holder_norm(const RoughPathGrid& x, int level, double alpha);
/// Besov-type double integral norm; `refine` sub-cells per cell for the quadrature.
double besov_norm(const RoughPathGrid& x, int level, double alpha, double m);
double besov_norm_at(const RoughPathGrid& x, int level, double alpha, double m, int refine);
/// Homogeneous p-variation norm sum_i ||x^i||_{p/i-var}^{1/i} over levels 1..min(depth, floor p).
double homogeneous_pvar(const RoughPathGrid& x, double p);

/// Control omega(s,t) = sum_i ||x^i||^{p/i}_{p/i-var;[s,t]} tabulated on grid pairs.
class ControlEvaluator {
 public:
  /// max_level = 0 uses min(depth, floor(p)).
  ControlEvaluator(const RoughPathGrid& x, double p, int max_level = 0);

  double operator()(int j, int k) const { return table_[static_cast<std::size_t>(j) * (m_ + 1) + k]; }
  int cells() const { return m_; }
  double p() const { return p_; }
  const std::vector<double>& times() const { return times_; }

 private:
  int m_;
  double p_;
  std::vector<double> times_;
  std::vector<double> table_;
};

int greedy_count(const ControlEvaluator& omega, double delta);
int greedy_count(const RoughPathGrid& x, double p, double delta);

/// Largest ratio ||x^1||_{p-var;[s,t]} / (||x^1||_B (t-s)^{alpha-1/m}) over grid pairs:
/// a fitted embedding constant, reported and never asserted.
double besov_embedding_constant(const RoughPathGrid& x, double p, double alpha, double m);

}  // namespace roughheat
