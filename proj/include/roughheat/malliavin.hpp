#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "roughheat/rde.hpp"
#include "roughheat/vector_fields.hpp"

namespace roughheat {

enum class CovKind { kDeterministic, kStochastic, kReduced };

struct CovMatrix {
  Eigen::MatrixXd m;
  CovKind kind = CovKind::kDeterministic;

  double min_eigenvalue() const;
  double symmetry_defect() const;
};

/// Q_kl = sum_i sum_{p,q} A_p[k,i] Gamma_pq A_q[l,i] for cell-constant A_p (n x d).
CovMatrix malliavin_Q(const std::vector<Eigen::MatrixXd>& A, const Eigen::MatrixXd& gram,
                      CovKind kind = CovKind::kDeterministic);

/// C = int_0^1 K_s sigma(y_s) (K_s sigma(y_s))^T ds by the trapezoid rule; sigma scaled by `scale`.
CovMatrix reduced_cov_C(const SolveResult& res, const VectorFieldSystem& vf, double scale = 1.0);
/// sum_i int <v, K_s V_i(y_s)>^2 ds with the same quadrature.
double reduced_quadratic_form(const SolveResult& res, const VectorFieldSystem& vf, const Eigen::VectorXd& v,
                              double scale = 1.0);

struct HormanderReport {
  std::vector<int> rank_by_depth;  // cumulative span rank after brackets of depth 0..max
  int total_rank = 0;
  std::vector<double> singular_values;
};

HormanderReport hormander_rank(const VectorFieldSystem& vf, const Eigen::VectorXd& point, int max_depth);

struct TailRow {
  double eps;
  int samples;
  std::vector<double> quantiles;  // at probs
  double lower_decile_slope;      // slope of log P(lambda < xi) vs log xi in the lower decile
  double mean_inverse;            // empirical E[lambda_min^{-1}]
};

struct TailReport {
  std::vector<double> probs;
  std::vector<TailRow> rows;
  double mu_hat;  // slope of log E[lambda_min^{-1}] vs log(1/eps)
};

TailReport eigen_tail(const std::vector<std::vector<CovMatrix>>& samples, const std::vector<double>& epsilons);
std::string tail_report_json(const TailReport& r);

}  // namespace roughheat
