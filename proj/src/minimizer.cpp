#include "roughheat/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "roughheat/error.hpp"
#include "roughheat/parallel.hpp"
#include "roughheat/rde.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "minimizer";

struct Problem {
  const VectorFieldSystem& vf;
  Eigen::VectorXd a, target;
  Hurst H;
  int K, d, n, depth;
  std::vector<double> grid, knots;
  Eigen::MatrixXd G;
  Eigen::LLT<Eigen::MatrixXd> greg;
  Eigen::MatrixXd DR;  // K x M: R(t_k, t_{p+1}) - R(t_k, t_p)

  Problem(const VectorFieldSystem& v, Eigen::VectorXd a0, Eigen::VectorXd a1, Hurst h, int k, int dep)
      : vf(v), a(std::move(a0)), target(std::move(a1)), H(h), K(k), d(v.d()), n(v.n()), depth(dep) {
    grid = uniform_grid(K);
    knots.assign(grid.begin() + 1, grid.end());
    G.resize(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) G(i, j) = fbm_cov(knots[i], knots[j], H.value);
    Eigen::MatrixXd reg = G;
    reg.diagonal().array() += 1e-12 * G.trace();
    greg.compute(reg);
    if (greg.info() != Eigen::Success) fail(ErrorKind::kNumericalDegeneracy, kModule, "knot Gram is singular");
    DR.resize(K, K);
    for (int i = 0; i < K; ++i)
      for (int p = 0; p < K; ++p)
        DR(i, p) = fbm_cov(knots[i], grid[p + 1], H.value) - fbm_cov(knots[i], grid[p], H.value);
  }

  int size() const { return d * K; }

  CMElement element(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd c(d, K);
    for (int i = 0; i < d; ++i) c.row(i) = x.segment(i * K, K).transpose();
    return CMElement(H, knots, c);
  }

  double energy(const Eigen::VectorXd& x) const {
    double e = 0;
    for (int i = 0; i < d; ++i) e += x.segment(i * K, K).dot(G * x.segment(i * K, K));
    return 0.5 * e;
  }

  Eigen::VectorXd apply_G(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(size());
    for (int i = 0; i < d; ++i) out.segment(i * K, K) = G * x.segment(i * K, K);
    return out;
  }

  Eigen::MatrixXd apply_Ginv(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (int i = 0; i < d; ++i) out.middleRows(i * K, K) = greg.solve(x.middleRows(i * K, K));
    return out;
  }

  struct Eval {
    Eigen::VectorXd c;
    Eigen::MatrixXd J;
    std::vector<Eigen::MatrixXd> A;
  };

  Eval evaluate(const Eigen::VectorXd& x, bool jac) const {
    const auto sol = solve_skeleton(vf, a, element(x), grid, depth, {jac, jac});
    Eval ev;
    ev.c = sol.endpoint() - target;
    if (jac) {
      ev.A = sol.sens;
      ev.J.resize(n, size());
      Eigen::MatrixXd S(n, K);
      for (int i = 0; i < d; ++i) {
        for (int p = 0; p < K; ++p) S.col(p) = ev.A[p].col(i);
        ev.J.middleCols(i * K, K) = S * DR.transpose();
      }
    }
    return ev;
  }

  // -G^{-1} J^T (J G^{-1} J^T)^{-1} r : the G-smallest step with J step = -r
  Eigen::VectorXd min_norm_step(const Eigen::MatrixXd& J, const Eigen::VectorXd& r) const {
    const Eigen::MatrixXd GJt = apply_Ginv(J.transpose());
    Eigen::MatrixXd S = J * GJt;
    S.diagonal().array() += 1e-14 * std::max(1.0, S.trace());
    return -GJt * S.ldlt().solve(r);
  }

  Eigen::VectorXd multiplier(const Eigen::MatrixXd& J, const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd GJt = apply_Ginv(J.transpose());
    Eigen::MatrixXd S = J * GJt;
    S.diagonal().array() += 1e-14 * std::max(1.0, S.trace());
    return S.ldlt().solve(J * x);
  }

  double kkt_residual(const Eigen::MatrixXd& J, const Eigen::VectorXd& x, const Eigen::VectorXd& nu) const {
    const Eigen::VectorXd r = apply_G(x) - J.transpose() * nu;
    const Eigen::VectorXd gr = apply_Ginv(r);
    return std::sqrt(std::max(0.0, r.dot(gr)));
  }

  // Newton corrections back onto the constraint set along G-minimal directions.
  bool retract(Eigen::VectorXd& x, Eval& ev, double tol = 1e-13, int iters = 30) const {
    for (int it = 0; it < iters; ++it) {
      if (ev.c.norm() <= tol) return true;
      x += min_norm_step(ev.J, ev.c);
      ev = evaluate(x, true);
      if (!ev.c.allFinite()) return false;
    }
    return ev.c.norm() <= 1e-10;
  }
};

struct StartResult {
  Eigen::VectorXd x;
  double energy = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  int outer = 0;
  bool ok = false;
  std::vector<double> history;
  std::string error;
};

StartResult run_start(const Problem& pb, const MinimizerOptions& opts, int start) {
  StartResult out;
  RandomStream rng(opts.seed, static_cast<std::uint64_t>(start));
  Eigen::VectorXd x(pb.size());
  for (int i = 0; i < pb.size(); ++i) x[i] = opts.init_scale * rng.normal() / pb.K;
  try {
    auto ev = pb.evaluate(x, true);
    x += pb.min_norm_step(ev.J, ev.c);
    ev = pb.evaluate(x, true);

    // Augmented Lagrangian with Gauss-Newton inner steps.
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(pb.n);
    double mu = 10.0;
    auto merit = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& c) {
      return pb.energy(z) - lambda.dot(c) + 0.5 * mu * c.squaredNorm();
    };
    double prev_c = ev.c.norm();
    int outer = 0;
    for (; outer < opts.max_outer && ev.c.norm() > 1e-9; ++outer) {
      for (int inner = 0; inner < 50; ++inner) {
        const Eigen::VectorXd g = pb.apply_G(x) - ev.J.transpose() * lambda + mu * ev.J.transpose() * ev.c;
        Eigen::MatrixXd Hm = mu * ev.J.transpose() * ev.J;
        for (int i = 0; i < pb.d; ++i) Hm.block(i * pb.K, i * pb.K, pb.K, pb.K) += pb.G;
        Hm.diagonal().array() += 1e-12 * Hm.trace() / Hm.rows();
        const Eigen::VectorXd step = -Hm.ldlt().solve(g);
        const double m0 = merit(x, ev.c), slope = g.dot(step);
        if (!(slope < 0) || std::abs(slope) < 1e-20 * std::max(1.0, std::abs(m0))) break;
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
          const Eigen::VectorXd xt = x + t * step;
          auto et = pb.evaluate(xt, true);
          if (et.c.allFinite() && merit(xt, et.c) <= m0 + 1e-4 * t * slope) {
            x = xt;
            ev = std::move(et);
            moved = true;
            break;
          }
        }
        if (!moved || t * step.norm() < 1e-13 * std::max(1.0, x.norm())) break;
      }
      lambda -= mu * ev.c;
      const double cn = ev.c.norm();
      if (cn > 0.25 * prev_c) mu = std::min(mu * 10.0, 1e12);
      prev_c = cn;
    }
    out.outer = outer;
    if (!pb.retract(x, ev)) {
      out.error = "retraction onto the constraint set failed";
      out.residual = ev.c.norm();
      out.x = x;
      return out;
    }

    // Feasible polish: linearized min-norm steps, accepted only when the energy does not increase.
    double e = pb.energy(x);
    out.history.push_back(e);
    for (int it = 0; it < 200; ++it) {
      // min-norm point of {z : J z = J x - c}
      const Eigen::VectorXd nu = pb.multiplier(ev.J, x);
      const Eigen::VectorXd proposal = pb.apply_Ginv(ev.J.transpose() * nu);
      Eigen::VectorXd dir = proposal - x;
      if (std::sqrt(std::max(0.0, dir.dot(pb.apply_G(dir)))) < 1e-13) break;
      bool accepted = false;
      for (double t = 1.0; t > 1e-6; t *= 0.5) {
        Eigen::VectorXd xt = x + t * dir;
        auto et = pb.evaluate(xt, true);
        if (!pb.retract(xt, et)) continue;
        const double e_t = pb.energy(xt);
        if (e_t <= e + 1e-12) {
          const bool progress = e - e_t > 1e-15 * std::max(1.0, e);
          x = xt;
          ev = std::move(et);
          e = e_t;
          out.history.push_back(e);
          accepted = progress;
          break;
        }
      }
      if (!accepted) break;
    }
    out.x = x;
    out.energy = e;
    out.residual = ev.c.norm();
    out.ok = out.residual <= 1e-8;
  } catch (const Error& err) {
    out.error = err.what();
  }
  return out;
}
}  // namespace

MinimizerResult minimize_energy(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const Eigen::VectorXd& a_prime,
                                const Hurst& H, const MinimizerOptions& opts) {
  require(a.size() == vf.n() && a_prime.size() == vf.n(), kModule, "endpoints have wrong dimension");
  require((a - a_prime).norm() > 0, kModule, "start and target coincide");
  require(opts.knots >= 2 && opts.starts >= 1, kModule, "need at least two knots and one start");
  const int depth = opts.depth > 0 ? opts.depth : H.depth();
  const Problem pb(vf, a, a_prime, H, opts.knots, depth);

  std::vector<StartResult> starts(opts.starts);
  for_chunks(opts.starts, 1, opts.workers, [&](std::size_t s, std::size_t, std::size_t) {
    starts[s] = run_start(pb, opts, static_cast<int>(s));
  });
  int best = -1;
  for (int s = 0; s < opts.starts; ++s) {
    if (!starts[s].ok) continue;
    if (best < 0 || starts[s].energy < starts[best].energy) best = s;
  }
  if (best < 0) {
    double r = std::numeric_limits<double>::infinity();
    std::string why;
    for (const auto& s : starts) {
      r = std::min(r, s.residual);
      if (!s.error.empty()) why = s.error;
    }
    fail(ErrorKind::kNonConvergence, kModule,
         "no start reached the constraint set; best residual " + std::to_string(r) + (why.empty() ? "" : " (" + why + ")"));
  }

  MinimizerResult res;
  const auto& win = starts[best];
  res.gamma_bar = pb.element(win.x);
  res.energy = 0.5 * cm_norm_sq(res.gamma_bar);
  res.energy_history = win.history;
  res.outer_iterations = win.outer;
  res.grid = pb.grid;
  res.depth = depth;
  res.start = a;
  res.target = a_prime;
  for (const auto& s : starts) res.start_energies.push_back(s.ok ? s.energy : std::numeric_limits<double>::quiet_NaN());

  const auto ev = pb.evaluate(win.x, true);
  res.constraint_residual = ev.c.norm();
  res.nu_bar = pb.multiplier(ev.J, win.x);
  res.kkt_residual = pb.kkt_residual(ev.J, win.x, res.nu_bar);
  res.A = ev.A;
  FbmSpec spec(H, vf.d(), opts.knots);
  res.Q_at_min = malliavin_Q(res.A, increment_gram(spec));
  res.converged = res.constraint_residual <= 1e-8 && res.kkt_residual <= 1e-6;
  {
    const Eigen::MatrixXd GJt = pb.apply_Ginv(ev.J.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ev.J * GJt, Eigen::EigenvaluesOnly);
    const auto lam = es.eigenvalues();
    res.rank_deficient = lam.minCoeff() <= 1e-10 * std::max(1e-300, lam.maxCoeff());
  }
  for (int s = 0; s < opts.starts; ++s) {
    if (s == best || !starts[s].ok) continue;
    const GridPath diff = pb.element(starts[s].x - win.x).render(pb.grid);
    const double dg = diff.values.cwiseAbs().maxCoeff();
    const double de = std::abs(starts[s].energy - win.energy);
    if (dg > 1e-3 && de > 1e-6) res.multiple_basins = true;
    if (dg > 1e-3 && de <= 1e-6) res.uniqueness_suspect = true;
  }
  return res;
}

MultiplierReport multiplier_identity_check(const MinimizerResult& res, int n_samples, std::uint64_t seed, int workers) {
  require(res.converged, kModule, "multiplier check needs a converged minimizer");
  require(n_samples >= 1, kModule, "need samples");
  const int M = static_cast<int>(res.grid.size()) - 1, d = res.gamma_bar.dim();
  FbmSampler sampler(FbmSpec(res.gamma_bar.hurst, d, M));
  const std::size_t chunk = 64, chunks = chunk_count(n_samples, chunk);
  std::vector<double> mx(chunks, 0.0), ss(chunks, 0.0);
  for_chunks(n_samples, chunk, workers, [&](std::size_t c, std::size_t b, std::size_t e) {
    Eigen::MatrixXd inc;
    for (std::size_t i = b; i < e; ++i) {
      sampler.increments(seed, i, inc);
      const GridPath w = sampler.path(seed, i);
      const double lhs = paley_wiener(res.gamma_bar, w);
      const double rhs = res.nu_bar.dot(linear_response(res.A, inc));
      const double r = std::abs(lhs - rhs);
      mx[c] = std::max(mx[c], r);
      ss[c] += r * r;
    }
  });
  MultiplierReport rep{0.0, 0.0, std::sqrt(cm_norm_sq(res.gamma_bar))};
  double total = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    rep.max_residual = std::max(rep.max_residual, mx[c]);
    total += ss[c];
  }
  rep.rms_residual = std::sqrt(total / n_samples);
  return rep;
}

HessianReport hessian_check(const VectorFieldSystem& vf, MinimizerResult& res, int n_dirs, std::uint64_t seed,
                            double s0) {
  require(res.converged, kModule, "Hessian check needs a converged minimizer");
  if (res.Q_at_min.min_eigenvalue() <= 0)
    fail(ErrorKind::kDiagnostic, kModule, "deterministic Malliavin matrix is singular at the minimizer");
  const int K = static_cast<int>(res.grid.size()) - 1;
  const Problem pb(vf, res.start, res.target, res.gamma_bar.hurst, K, res.depth);
  Eigen::VectorXd xbar(pb.size());
  for (int i = 0; i < pb.d; ++i) xbar.segment(i * K, K) = res.gamma_bar.coeffs.row(i).transpose();
  auto ev0 = pb.evaluate(xbar, true);
  const double e0 = pb.energy(xbar);

  // null space of J
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ev0.J, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  int rank = 0;
  for (int j = 0; j < sv.size(); ++j)
    if (sv[j] > 1e-10 * sv[0]) ++rank;
  const Eigen::MatrixXd null = svd.matrixV().rightCols(pb.size() - rank);

  auto energy_at = [&](const Eigen::VectorXd& h, double s) {
    Eigen::VectorXd x = xbar + s * h;
    auto ev = pb.evaluate(x, true);
    if (!pb.retract(x, ev, 1e-14, 50))
      fail(ErrorKind::kDiagnostic, kModule, "retraction failed in the Hessian check");
    return pb.energy(x);
  };

  HessianReport rep;
  rep.min_second_difference = std::numeric_limits<double>::infinity();
  RandomStream rng(seed, 0);
  for (int k = 0; k < n_dirs; ++k) {
    Eigen::VectorXd z(null.cols());
    for (int j = 0; j < z.size(); ++j) z[j] = rng.normal();
    Eigen::VectorXd h = null * z;
    h /= std::sqrt(h.dot(pb.apply_G(h)));
    const double d1 = energy_at(h, s0) + energy_at(h, -s0) - 2 * e0;
    const double d2 = energy_at(h, 2 * s0) + energy_at(h, -2 * s0) - 2 * e0;
    rep.second_differences.push_back(d1);
    rep.doubled_ratio.push_back(d2 / d1);
    rep.min_second_difference = std::min(rep.min_second_difference, d1);
  }
  res.hessian_min_eig = rep.min_second_difference;
  return rep;
}

std::string minimizer_json(const MinimizerResult& res) {
  nlohmann::json j;
  j["hurst"] = res.gamma_bar.hurst.to_string();
  j["knots"] = res.gamma_bar.knots;
  std::vector<std::vector<double>> coeffs;
  for (int i = 0; i < res.gamma_bar.dim(); ++i) {
    std::vector<double> row(res.gamma_bar.coeffs.cols());
    for (int k = 0; k < res.gamma_bar.coeffs.cols(); ++k) row[k] = res.gamma_bar.coeffs(i, k);
    coeffs.push_back(row);
  }
  j["coefficients"] = coeffs;
  j["energy"] = res.energy;
  j["nu_bar"] = std::vector<double>(res.nu_bar.data(), res.nu_bar.data() + res.nu_bar.size());
  std::vector<std::vector<double>> q;
  for (int r = 0; r < res.Q_at_min.m.rows(); ++r) {
    std::vector<double> row(res.Q_at_min.m.cols());
    for (int c = 0; c < res.Q_at_min.m.cols(); ++c) row[c] = res.Q_at_min.m(r, c);
    q.push_back(row);
  }
  j["Q"] = q;
  j["constraint_residual"] = res.constraint_residual;
  j["kkt_residual"] = res.kkt_residual;
  if (std::isfinite(res.hessian_min_eig)) j["hessian_min_second_difference"] = res.hessian_min_eig;
  j["converged"] = res.converged;
  j["rank_deficient_warning"] = res.rank_deficient;
  j["multiple_basins"] = res.multiple_basins;
  j["uniqueness_suspect_heuristic"] = res.uniqueness_suspect;
  j["start_energies"] = res.start_energies;
  j["energy_history"] = res.energy_history;
  j["outer_iterations"] = res.outer_iterations;
  return j.dump(2);
}

}  // namespace roughheat
