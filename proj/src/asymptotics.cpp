#include "roughheat/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <numbers>

#include "roughheat/error.hpp"
#include "roughheat/metrics.hpp"
#include "roughheat/parallel.hpp"
#include "roughheat/rde.hpp"
#include "roughheat/roughlift.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "asymptotics";
constexpr std::size_t kChunk = 256;

struct BatchStats {
  double mean = 0.0, se = 0.0, ess = 0.0;
};

BatchStats batch_stats(const std::vector<double>& w, int batches) {
  const std::size_t N = w.size();
  require(batches >= 2 && static_cast<std::size_t>(batches) <= N, kModule, "need 2 <= batches <= samples");
  std::vector<double> sums(batches, 0.0);
  std::vector<std::size_t> counts(batches, 0);
  double total = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t b = i * batches / N;
    sums[b] += w[i];
    ++counts[b];
    total += w[i];
    sq += w[i] * w[i];
  }
  BatchStats st;
  st.mean = total / N;
  double var = 0.0;
  for (int b = 0; b < batches; ++b) {
    const double m = sums[b] / counts[b];
    var += (m - st.mean) * (m - st.mean);
  }
  st.se = std::sqrt(var / (batches - 1) / batches);
  st.ess = sq > 0 ? total * total / sq : 0.0;
  return st;
}

// Gaussian density N(z; 0, b^2 Q) from a Cholesky factor of Q.
struct GaussKernel {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_norm = 0.0, b = 1.0;

  GaussKernel(const Eigen::MatrixXd& Q, double bw) : llt(Q), b(bw) {
    const Eigen::MatrixXd L = llt.matrixL();
    if (llt.info() != Eigen::Success || L.diagonal().minCoeff() <= 0)
      fail(ErrorKind::kNumericalDegeneracy, kModule, "Malliavin covariance at the minimizer is not positive definite");
    const int n = static_cast<int>(Q.rows());
    log_norm = -0.5 * n * std::log(2 * std::numbers::pi) - n * std::log(b) - L.diagonal().array().log().sum();
  }
  double log_density(const Eigen::VectorXd& z) const { return log_norm - 0.5 * whitened_sq(z); }
  double whitened_sq(const Eigen::VectorXd& z) const {
    return Eigen::VectorXd(llt.matrixL().solve(z / b)).squaredNorm();
  }
};

int model_depth(const DensityModel& m) { return m.depth > 0 ? m.depth : m.hurst.depth(); }

void check_model(const DensityModel& m) {
  require(m.vf != nullptr, kModule, "model has no vector fields");
  require(m.a.size() == m.vf->n() && m.a_prime.size() == m.vf->n(), kModule, "endpoints have wrong dimension");
  require(m.M >= 1, kModule, "grid must have cells");
}

// Homogeneous norm of eps*w, used for truncation and the outside-share diagnostic.
double scaled_norm(const FbmSampler& s, std::uint64_t seed, std::uint64_t i, double eps, int depth) {
  const GridPath w = s.path(seed, i);
  return homogeneous_pvar(lift_grid_path(eps * w, depth), depth + 1.0);
}
}  // namespace

const char* to_string(DensityMethod m) { return m == DensityMethod::kPlain ? "plain" : "shifted"; }

DensityMethod parse_density_method(const std::string& s) {
  if (s == "plain") return DensityMethod::kPlain;
  if (s == "shifted") return DensityMethod::kShifted;
  fail(ErrorKind::kInvalidArgument, kModule, "unknown density method '" + s + "'");
}

double lognormal_density(double a, double a_prime, double sigma, double t, double H) {
  require(a > 0 && a_prime > 0 && sigma > 0 && t > 0, kModule, "lognormal density needs positive arguments");
  const double s = sigma * std::pow(t, H);
  const double l = std::log(a_prime / a);
  return std::exp(-l * l / (2 * s * s)) / (a_prime * s * std::sqrt(2 * std::numbers::pi));
}

DensityPoint estimate_density(const DensityModel& model, double t, const DensityOptions& opts) {
  check_model(model);
  require(t > 0 && t <= 1, kModule, "t must lie in (0, 1]");
  require(opts.n_samples >= opts.batches, kModule, "fewer samples than batches");
  const VectorFieldSystem& vf = *model.vf;
  const int n = vf.n(), d = vf.d(), M = model.M, depth = model_depth(model);
  const double H = model.hurst.value;
  const double eps = std::pow(t, H), dt = std::pow(eps, 1.0 / H) / M;
  const std::size_t N = static_cast<std::size_t>(opts.n_samples);
  FbmSampler sampler(FbmSpec(model.hurst, d, M));
  const bool track_norm = std::isfinite(opts.truncation_radius) || opts.outside_radius > 0;

  DensityPoint pt;
  pt.t = t;
  pt.n_samples = opts.n_samples;
  std::vector<double> weight(N, 0.0);
  std::vector<char> outside(track_norm ? N : 0, 0);
  double max_kernel = 0.0;

  if (opts.method == DensityMethod::kShifted) {
    require(model.minimizer.has_value(), kModule, "shifted method needs a minimizer result");
    const MinimizerResult& mr = *model.minimizer;
    const CMElement& g = mr.gamma_bar;
    require(g.dim() == d, kModule, "minimizer dimension does not match the model");
    const auto grid = uniform_grid(M);
    std::vector<int> knot_idx;
    for (double k : g.knots) {
      const int idx = grid_index(grid, k);
      require(idx >= 0, kModule, "minimizer knots must lie on the solver grid");
      knot_idx.push_back(idx);
    }
    const Eigen::MatrixXd dgamma = g.render(grid).increments();
    const double b = opts.bandwidth > 0 ? opts.bandwidth : std::pow(static_cast<double>(N), -1.0 / (n + 4));
    const GaussKernel kern(mr.Q_at_min.m, b);
    pt.bandwidths = {b};
    const Eigen::VectorXd nu = mr.nu_bar;
    std::vector<double> chunk_max(chunk_count(N, kChunk), 0.0);
    for_chunks(N, kChunk, opts.workers, [&](std::size_t c, std::size_t lo, std::size_t hi) {
      Eigen::MatrixXd inc, drv(M, d + 1);
      drv.col(d).setConstant(dt);
      Eigen::VectorXd wt(d);
      for (std::size_t i = lo; i < hi; ++i) {
        if (track_norm) {
          const double r = scaled_norm(sampler, opts.seed, i, eps, depth);
          if (r > opts.truncation_radius) continue;
          outside[i] = opts.outside_radius > 0 && r > opts.outside_radius;
        }
        sampler.increments(opts.seed, i, inc);
        drv.leftCols(d) = eps * inc + dgamma;
        const Eigen::VectorXd y = solve_endpoint_polyline(vf, model.a, drv, depth);
        double pw = 0.0;
        wt.setZero();
        for (int k = 0, p = 0; k < static_cast<int>(knot_idx.size()); ++k) {
          for (; p < knot_idx[k]; ++p) wt += inc.row(p).transpose();
          pw += g.coeffs.col(k).dot(wt);
        }
        const Eigen::VectorXd z = (y - model.a_prime) / eps;
        const double lk = kern.log_density(z);
        chunk_max[c] = std::max(chunk_max[c], lk);
        weight[i] = std::exp((nu.dot(z) - pw) / eps + lk);
      }
    });
    for (double v : chunk_max) max_kernel = std::max(max_kernel, v);
    max_kernel = std::exp(max_kernel);
    const auto st = batch_stats(weight, opts.batches);
    const double scale = std::pow(eps, -n) * std::exp(-mr.energy / (eps * eps));
    pt.estimate = scale * st.mean;
    pt.se = scale * st.se;
    pt.effective_samples = st.ess;
  } else {
    Eigen::MatrixXd ys(N, n);
    for_chunks(N, kChunk, opts.workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
      Eigen::MatrixXd inc, drv(M, d + 1);
      drv.col(d).setConstant(dt);
      for (std::size_t i = lo; i < hi; ++i) {
        sampler.increments(opts.seed, i, inc);
        drv.leftCols(d) = eps * inc;
        ys.row(i) = solve_endpoint_polyline(vf, model.a, drv, depth).transpose();
      }
    });
    std::vector<char> keep(N, 1);
    if (track_norm) {
      for_chunks(N, kChunk, opts.workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const double r = scaled_norm(sampler, opts.seed, i, eps, depth);
          keep[i] = r <= opts.truncation_radius;
          outside[i] = opts.outside_radius > 0 && r > opts.outside_radius;
        }
      });
    }
    const double rule = std::pow(static_cast<double>(N), -1.0 / (n + 4));
    Eigen::VectorXd bw(n);
    for (int j = 0; j < n; ++j) {
      if (opts.bandwidth > 0) {
        bw[j] = opts.bandwidth;
        continue;
      }
      const double mean = ys.col(j).mean();
      const double sd = std::sqrt((ys.col(j).array() - mean).square().sum() / (N - 1));
      if (!(sd > 0))
        fail(ErrorKind::kStarvation, kModule, "coordinate " + std::to_string(j + 1) +
                                                  " has zero spread; use the shifted method or set a bandwidth");
      bw[j] = sd * rule;
    }
    pt.bandwidths.assign(bw.data(), bw.data() + n);
    const double log_norm = -0.5 * n * std::log(2 * std::numbers::pi) - bw.array().log().sum();
    for (std::size_t i = 0; i < N; ++i) {
      if (!keep[i]) continue;
      const double q = ((ys.row(i).transpose() - model.a_prime).array() / bw.array()).square().sum();
      const double lk = log_norm - 0.5 * q;
      weight[i] = std::exp(lk);
      max_kernel = std::max(max_kernel, weight[i]);
    }
    const auto st = batch_stats(weight, opts.batches);
    pt.estimate = st.mean;
    pt.se = st.se;
    pt.effective_samples = st.ess;
  }
  if (max_kernel < 1e-300)
    fail(ErrorKind::kStarvation, kModule,
         "every kernel weight is below 1e-300 at t = " + std::to_string(t) +
             "; use the shifted method or a larger bandwidth");
  if (opts.outside_radius > 0) {
    double tot = 0.0, out = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      tot += weight[i];
      if (outside[i]) out += weight[i];
    }
    pt.outside_fraction = tot > 0 ? out / tot : 0.0;
  }
  return pt;
}

DensityEstimate estimate_density_curve(const DensityModel& model, const std::vector<double>& ts,
                                       const DensityOptions& opts) {
  DensityEstimate est;
  est.model = model.id;
  est.method = opts.method;
  est.seed = opts.seed;
  for (double t : ts) est.points.push_back(estimate_density(model, t, opts));
  return est;
}

AsymptoticFit fit_asymptotics(const DensityEstimate& est, double energy_sq, int n, const Hurst& H, bool drift) {
  const auto& pts = est.points;
  const int m = static_cast<int>(pts.size());
  require(m >= 3, kModule, "the fit needs at least three t values");
  for (int i = 0; i < m; ++i) {
    if (!(pts[i].estimate > 0))
      fail(ErrorKind::kInvalidArgument, kModule, "non-positive estimate at t = " + std::to_string(pts[i].t));
    require(i == 0 || pts[i].t < pts[i - 1].t, kModule, "t values must be decreasing");
  }
  const double h = H.value;
  AsymptoticFit fit;
  auto lsq = [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return Eigen::VectorXd(X.colPivHouseholderQr().solve(y));
  };

  // -2 t^{2H} log p = |g|^2 + 2nH t^{2H} log t + c t^{2H} + ...
  {
    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
      const double t = pts[i].t, s = std::pow(t, 2 * h);
      y[i] = -2 * s * std::log(pts[i].estimate) - 2 * n * h * s * std::log(t);
      X(i, 0) = 1.0;
      X(i, 1) = s;
    }
    const auto c = lsq(X, y);
    fit.rate_hat = c[0];
    const Eigen::VectorXd r = y - X * c;
    fit.rate_residuals.assign(r.data(), r.data() + m);
  }
  {
    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
      const double t = pts[i].t;
      y[i] = std::log(pts[i].estimate) + energy_sq / (2 * std::pow(t, 2 * h));
      X(i, 0) = 1.0;
      X(i, 1) = std::log(t);
    }
    const auto c = lsq(X, y);
    fit.prefactor_exp_hat = c[1];
    const Eigen::VectorXd r = y - X * c;
    fit.prefactor_residuals.assign(r.data(), r.data() + m);
  }
  if (drift) {
    const auto lam = enumerate_exponents(H, IndexSet::kL4, 4.0);
    auto it = std::find_if(lam.begin(), lam.end(), [](const Exponent& e) { return e.value > 1e-12; });
    require(it != lam.end(), kModule, "no positive correction exponent below the cutoff");
    fit.lambda1 = it->value;
  } else {
    fit.lambda1 = 2.0;
  }
  {
    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
      const double t = pts[i].t;
      y[i] = std::pow(t, n * h) * std::exp(energy_sq / (2 * std::pow(t, 2 * h))) * pts[i].estimate;
      X(i, 0) = 1.0;
      X(i, 1) = std::pow(t, fit.lambda1 * h);
    }
    const auto c = lsq(X, y);
    fit.alpha0_hat = c[0];
    for (int i = 0; i < m; ++i) fit.alpha_residuals.push_back((y[i] - X.row(i).dot(c)) / y[i]);
  }
  return fit;
}

LeadingCoefficient leading_coefficient(const VectorFieldSystem& vf, const MinimizerResult& res,
                                       const LeadingOptions& opts) {
  require(opts.n_samples >= opts.batches, kModule, "fewer samples than batches");
  const int n = vf.n(), d = vf.d();
  const int K = static_cast<int>(res.grid.size()) - 1;
  const Hurst H = res.gamma_bar.hurst;
  const std::size_t N = static_cast<std::size_t>(opts.n_samples);
  const Eigen::MatrixXd& Q = res.Q_at_min.m;

  LeadingCoefficient lc;
  lc.sanity = opts.sanity;
  lc.bandwidth = opts.bandwidth > 0 ? opts.bandwidth : std::pow(static_cast<double>(N), -1.0 / (n + 4));
  const GaussKernel kern(Q, lc.bandwidth);
  lc.gaussian_mass = std::exp(kern.log_norm + n * std::log(lc.bandwidth));

  FbmSampler sampler(FbmSpec(H, d, K));
  std::vector<double> weight(N, 0.0), wide(N, 0.0), combined(N, 0.0);
  auto store = [&](std::size_t i, double log_tilt, const Eigen::VectorXd& phi1) {
    const double q = kern.whitened_sq(phi1);
    weight[i] = std::exp(log_tilt + kern.log_norm - 0.5 * q);
    wide[i] = std::exp(log_tilt + kern.log_norm - 0.5 * n * std::log(2.0) - 0.25 * q);
    combined[i] = 2 * weight[i] - wide[i];
  };
  for_chunks(N, kChunk, opts.workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
    Eigen::MatrixXd inc;
    for (std::size_t i = lo; i < hi; ++i) {
      if (opts.sanity) {
        sampler.increments(opts.seed, i, inc);
        store(i, 0.0, linear_response(res.A, inc));
        continue;
      }
      const auto x = lift_grid_path(sampler.path(opts.seed, i), res.depth);
      const auto terms = expansion_terms(vf, res.start, res.gamma_bar, x, H, 2.0);
      Eigen::VectorXd phi1 = Eigen::VectorXd::Zero(n), phi2 = Eigen::VectorXd::Zero(n);
      for (std::size_t j = 0; j < terms.kappas.size(); ++j) {
        if (std::abs(terms.kappas[j].value - 1.0) < 1e-9) phi1 = terms.phi[j].at(K);
        if (std::abs(terms.kappas[j].value - 2.0) < 1e-9) phi2 = terms.phi[j].at(K);
      }
      store(i, res.nu_bar.dot(phi2), phi1);
    }
  });
  const auto raw = batch_stats(weight, opts.batches);
  lc.raw_estimate = raw.mean;
  lc.raw_se = raw.se;
  const auto st = batch_stats(combined, opts.batches);
  lc.estimate = st.mean;
  lc.se = st.se;
  std::vector<double> sorted = weight;
  const std::size_t top = std::max<std::size_t>(1, N / 100);
  std::nth_element(sorted.begin(), sorted.begin() + (N - top), sorted.end());
  double top_sum = 0.0, total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    total += sorted[i];
    if (i >= N - top) top_sum += sorted[i];
  }
  lc.top_share = total > 0 ? top_sum / total : 0.0;
  lc.heavy_tail = lc.top_share > 0.5;
  return lc;
}

std::string density_json(const DensityEstimate& est) {
  nlohmann::json j;
  j["model"] = est.model;
  j["method"] = to_string(est.method);
  j["seed"] = est.seed;
  for (const auto& p : est.points) {
    nlohmann::json q{{"t", p.t},
                     {"estimate", p.estimate},
                     {"se", p.se},
                     {"n_samples", p.n_samples},
                     {"effective_samples", p.effective_samples},
                     {"bandwidths", p.bandwidths}};
    if (std::isfinite(p.outside_fraction)) q["outside_fraction"] = p.outside_fraction;
    j["points"].push_back(q);
  }
  return j.dump(2);
}

std::string fit_json(const AsymptoticFit& fit) {
  nlohmann::json j{{"rate_hat", fit.rate_hat},
                   {"prefactor_exp_hat", fit.prefactor_exp_hat},
                   {"alpha0_hat", fit.alpha0_hat},
                   {"lambda1", fit.lambda1},
                   {"rate_residuals", fit.rate_residuals},
                   {"prefactor_residuals", fit.prefactor_residuals},
                   {"alpha_relative_residuals", fit.alpha_residuals}};
  return j.dump(2);
}

std::string leading_json(const LeadingCoefficient& lc) {
  nlohmann::json j{{"estimate", lc.estimate},
                   {"se", lc.se},
                   {"raw_estimate", lc.raw_estimate},
                   {"raw_se", lc.raw_se},
                   {"gaussian_mass", lc.gaussian_mass},
                   {"bandwidth", lc.bandwidth},
                   {"branch", lc.sanity ? "sanity" : "full"},
                   {"top_percent_share", lc.top_share},
                   {"heavy_tail_warning", lc.heavy_tail}};
  if (lc.heavy_tail)
    j["warning"] = "the top 1% of weights carry most of the mass; finiteness rests on the Hessian being positive";
  return j.dump(2);
}

void write_density_csv(const std::string& file, const DensityEstimate& est) {
  std::ofstream out(file);
  if (!out) fail(ErrorKind::kInvalidArgument, kModule, "cannot write " + file);
  out << std::setprecision(17) << "t,estimate,se,n_samples\n";
  for (const auto& p : est.points) out << p.t << ',' << p.estimate << ',' << p.se << ',' << p.n_samples << '\n';
}

}  // namespace roughheat
