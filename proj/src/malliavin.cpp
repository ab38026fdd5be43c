#include "roughheat/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "malliavin";

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}
}  // namespace

double CovMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double CovMatrix::symmetry_defect() const { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

CovMatrix malliavin_Q(const std::vector<Eigen::MatrixXd>& A, const Eigen::MatrixXd& gram, CovKind kind) {
  const int M = static_cast<int>(A.size());
  require(M > 0 && gram.rows() == M, kModule, "integrand must be rendered on the Gram grid");
  const int n = static_cast<int>(A.front().rows()), d = static_cast<int>(A.front().cols());
  CovMatrix q{Eigen::MatrixXd::Zero(n, n), kind};
  Eigen::MatrixXd B(n, M);
  for (int i = 0; i < d; ++i) {
    for (int p = 0; p < M; ++p) B.col(p) = A[p].col(i);
    q.m.noalias() += B * gram * B.transpose();
  }
  q.m = 0.5 * (q.m + q.m.transpose());
  return q;
}

CovMatrix reduced_cov_C(const SolveResult& res, const VectorFieldSystem& vf, double scale) {
  require(!res.K.empty(), kModule, "solve was run without Jacobians");
  const int M = res.cells(), n = vf.n();
  CovMatrix c{Eigen::MatrixXd::Zero(n, n), CovKind::kReduced};
  for (int k = 0; k <= M; ++k) {
    const double w = k == 0   ? 0.5 * (res.times[1] - res.times[0])
                     : k == M ? 0.5 * (res.times[M] - res.times[M - 1])
                              : 0.5 * (res.times[k + 1] - res.times[k - 1]);
    const Eigen::MatrixXd f = scale * res.K[k] * vf.sigma(res.y.row(k).transpose());
    c.m.noalias() += w * f * f.transpose();
  }
  return c;
}

double reduced_quadratic_form(const SolveResult& res, const VectorFieldSystem& vf, const Eigen::VectorXd& v,
                              double scale) {
  const int M = res.cells();
  double acc = 0.0;
  for (int k = 0; k <= M; ++k) {
    const double w = k == 0   ? 0.5 * (res.times[1] - res.times[0])
                     : k == M ? 0.5 * (res.times[M] - res.times[M - 1])
                              : 0.5 * (res.times[k + 1] - res.times[k - 1]);
    const Eigen::MatrixXd f = scale * res.K[k] * vf.sigma(res.y.row(k).transpose());
    for (int i = 0; i < vf.d(); ++i) {
      const double s = v.dot(f.col(i));
      acc += w * s * s;
    }
  }
  return acc;
}

HormanderReport hormander_rank(const VectorFieldSystem& vf, const Eigen::VectorXd& point, int max_depth) {
  require(max_depth >= 0, kModule, "max_depth must be nonnegative");
  const int n = vf.n();
  require(point.size() == n, kModule, "point has wrong dimension");
  if (max_depth > 3 && vf.derivative_order() < max_depth + 1)
    fail(ErrorKind::kCapability, kModule, "brackets beyond depth 3 need analytic derivatives of order 4");

  // One nilpotent variable per bracket level; [V,U](y) = dU(y)V(y) - dV(y)U(y) is read
  // off as the tau_l coefficient of U(y + tau_l V(y)) - V(y + tau_l U(y)).
  const int levels = std::max(1, max_depth);
  std::vector<SeriesVar> vars(levels, SeriesVar{0.0, 1});
  const SeriesSpace space(vars, 0.0);
  struct Node {
    int field;
    int child;  // -1 for a plain field
  };
  std::vector<Node> nodes;
  std::function<SeriesVec(int, const SeriesVec&, int)> evaluate = [&](int id, const SeriesVec& y, int level) {
    const Node nd = nodes[id];
    SeriesVec out;
    if (nd.child < 0) {
      vf.eval(nd.field, y, out);
      return out;
    }
    const Series tau = Series::variable(&space, level);
    SeriesVec vi;
    vf.eval(nd.field, y, vi);
    SeriesVec z(n);
    for (int k = 0; k < n; ++k) z[k] = y[k] + tau * vi[k];
    const SeriesVec u_shift = evaluate(nd.child, z, level + 1);
    const SeriesVec u = evaluate(nd.child, y, level + 1);
    for (int k = 0; k < n; ++k) z[k] = y[k] + tau * u[k];
    SeriesVec v_shift;
    vf.eval(nd.field, z, v_shift);
    out.resize(n);
    for (int k = 0; k < n; ++k) out[k] = (u_shift[k] - v_shift[k]).partial(level);
    return out;
  };

  SeriesVec y0(n);
  for (int k = 0; k < n; ++k) y0[k] = Series(&space, point[k]);
  std::vector<Eigen::VectorXd> vectors;
  std::vector<int> frontier;
  for (int i = 1; i <= vf.d(); ++i) {
    nodes.push_back({i, -1});
    frontier.push_back(static_cast<int>(nodes.size()) - 1);
  }
  HormanderReport rep;
  auto rank_of = [&](std::vector<double>* sv) {
    if (vectors.empty()) return 0;
    Eigen::MatrixXd m(n, vectors.size());
    for (std::size_t j = 0; j < vectors.size(); ++j) m.col(j) = vectors[j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto s = svd.singularValues();
    if (sv) sv->assign(s.data(), s.data() + s.size());
    if (s.size() == 0 || s[0] <= 0.0) return 0;
    int r = 0;
    for (int j = 0; j < s.size(); ++j)
      if (s[j] > 1e-8 * s[0]) ++r;
    return r;
  };
  for (int depth = 0; depth <= max_depth; ++depth) {
    if (depth > 0) {
      std::vector<int> next;
      for (int u : frontier)
        for (int i = 0; i <= vf.d(); ++i) {
          if (i == 0 && !vf.has_drift()) continue;
          nodes.push_back({i, u});
          next.push_back(static_cast<int>(nodes.size()) - 1);
        }
      frontier = std::move(next);
    }
    for (int id : frontier) {
      const auto v = evaluate(id, y0, 0);
      Eigen::VectorXd e(n);
      for (int k = 0; k < n; ++k) e[k] = v[k].constant();
      vectors.push_back(e);
    }
    rep.rank_by_depth.push_back(rank_of(depth == max_depth ? &rep.singular_values : nullptr));
  }
  rep.total_rank = rep.rank_by_depth.back();
  return rep;
}

TailReport eigen_tail(const std::vector<std::vector<CovMatrix>>& samples, const std::vector<double>& epsilons) {
  require(samples.size() == epsilons.size() && !samples.empty(), kModule, "one sample list per epsilon");
  TailReport rep;
  rep.probs = {0.01, 0.05, 0.1, 0.25, 0.5};
  std::vector<double> lx, ly;
  for (std::size_t e = 0; e < samples.size(); ++e) {
    const auto& s = samples[e];
    if (s.size() < 500)
      fail(ErrorKind::kInvalidArgument, kModule, "eigen_tail needs at least 500 samples per epsilon");
    std::vector<double> lam;
    lam.reserve(s.size());
    for (const auto& c : s) lam.push_back(c.min_eigenvalue());
    std::sort(lam.begin(), lam.end());
    TailRow row;
    row.eps = epsilons[e];
    row.samples = static_cast<int>(lam.size());
    for (double p : rep.probs) row.quantiles.push_back(lam[static_cast<std::size_t>(p * (lam.size() - 1))]);
    // empirical CDF in the lower decile
    std::vector<double> x, y;
    const std::size_t top = lam.size() / 10;
    for (std::size_t i = 0; i < top; ++i)
      if (lam[i] > 0) {
        x.push_back(std::log(lam[i]));
        y.push_back(std::log((i + 1.0) / lam.size()));
      }
    row.lower_decile_slope = slope(x, y);
    double inv = 0;
    for (double l : lam) inv += l > 0 ? 1.0 / l : std::numeric_limits<double>::infinity();
    row.mean_inverse = inv / lam.size();
    rep.rows.push_back(row);
    lx.push_back(std::log(1.0 / row.eps));
    ly.push_back(std::log(row.mean_inverse));
  }
  rep.mu_hat = slope(lx, ly);
  return rep;
}

std::string tail_report_json(const TailReport& r) {
  nlohmann::json j;
  j["probs"] = r.probs;
  j["mu_hat"] = r.mu_hat;
  for (const auto& row : r.rows)
    j["rows"].push_back({{"eps", row.eps},
                         {"samples", row.samples},
                         {"quantiles", row.quantiles},
                         {"lower_decile_slope", row.lower_decile_slope},
                         {"mean_inverse", row.mean_inverse}});
  return j.dump(2);
}

}  // namespace roughheat
