#include "roughheat/rde.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "rde";
constexpr double kBlowUp = 1e8;

std::size_t i3(int n, int a, int b, int c) { return (static_cast<std::size_t>(a) * n + b) * n + c; }

// Letters of the driver that carry a field: 0..d-1 -> V_1..V_d, d (time) -> V_0.
struct Alphabet {
  std::vector<int> letter;  // driver coordinate
  std::vector<int> field;   // field index
};

Alphabet alphabet(const VectorFieldSystem& vf) {
  Alphabet al;
  for (int l = 0; l < vf.d(); ++l) {
    al.letter.push_back(l);
    al.field.push_back(l + 1);
  }
  if (vf.has_drift()) {
    al.letter.push_back(vf.d());
    al.field.push_back(0);
  }
  return al;
}

// H[V_b, V_a] with H[k][m][q]
Eigen::VectorXd contract2(const std::vector<double>& H, int n, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m) {
      const double um = u[m];
      if (um == 0.0) continue;
      for (int q = 0; q < n; ++q) out[k] += H[i3(n, k, m, q)] * um * v[q];
    }
  return out;
}

// (k, j) -> sum_m H[k][m][j] u[m]
Eigen::MatrixXd contract1(const std::vector<double>& H, int n, const Eigen::VectorXd& u) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m) {
      if (u[m] == 0.0) continue;
      for (int j = 0; j < n; ++j) out(k, j) += H[i3(n, k, m, j)] * u[m];
    }
  return out;
}

struct StepWork {
  std::vector<Eigen::VectorXd> V;
  std::vector<Eigen::MatrixXd> JV;
  std::vector<std::vector<double>> HV, TV;
  std::vector<Eigen::VectorXd> c2, c3;
  std::vector<Eigen::MatrixXd> dc2;
};

// One step of the Euler scheme on a general cell. Optionally the derivative of the
// step map (D) and the sensitivity of y+ to the level-1 log of the cell (G, n x d).
Eigen::VectorXd euler_step(const VectorFieldSystem& vf, const Alphabet& al, const Eigen::VectorXd& y,
                           const TruncatedSignature& S, Eigen::MatrixXd* D, Eigen::MatrixXd* G, StepWork& w) {
  const int n = vf.n(), L = static_cast<int>(al.letter.size()), N = S.depth();
  const bool derivs = D != nullptr;
  w.V.resize(L);
  w.JV.resize(L);
  for (int a = 0; a < L; ++a) vf.eval(al.field[a], y, w.V[a]);
  if (N >= 2 || derivs)
    for (int a = 0; a < L; ++a) w.JV[a] = vf.jacobian(al.field[a], y);
  const bool need_h = N >= 3 || (derivs && N >= 2);
  if (need_h) {
    w.HV.resize(L);
    for (int a = 0; a < L; ++a) w.HV[a] = vf.hessian(al.field[a], y);
  }
  if (derivs && N >= 3) {
    w.TV.resize(L);
    for (int a = 0; a < L; ++a) w.TV[a] = vf.third(al.field[a], y);
  }

  Eigen::VectorXd out = y;
  if (D) *D = Eigen::MatrixXd::Identity(n, n);
  for (int a = 0; a < L; ++a) {
    const double s = S.at(al.letter[a]);
    out += s * w.V[a];
    if (D) *D += s * w.JV[a];
  }
  if (N >= 2) {
    w.c2.assign(L * L, Eigen::VectorXd());
    if (derivs) w.dc2.assign(L * L, Eigen::MatrixXd());
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b) {
        const int ab = a * L + b;
        w.c2[ab] = w.JV[b] * w.V[a];
        const double s = S.at(al.letter[a], al.letter[b]);
        out += s * w.c2[ab];
        if (derivs) {
          w.dc2[ab] = contract1(w.HV[b], n, w.V[a]) + w.JV[b] * w.JV[a];
          *D += s * w.dc2[ab];
        }
      }
  }
  if (N >= 3) {
    w.c3.assign(L * L * L, Eigen::VectorXd());
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b)
        for (int c = 0; c < L; ++c) {
          const int ab = a * L + b, abc = ab * L + c;
          w.c3[abc] = contract2(w.HV[c], n, w.V[b], w.V[a]) + w.JV[c] * w.c2[ab];
          const double s = S.at(al.letter[a], al.letter[b], al.letter[c]);
          out += s * w.c3[abc];
          if (derivs) {
            Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(n, n);
            const auto& T = w.TV[c];
            const auto& Hc = w.HV[c];
            for (int k = 0; k < n; ++k)
              for (int m = 0; m < n; ++m)
                for (int q = 0; q < n; ++q) {
                  const double h = Hc[i3(n, k, m, q)];
                  for (int j = 0; j < n; ++j) {
                    dc(k, j) += T[i3(n, k, m, q) * n + j] * w.V[b][m] * w.V[a][q];
                    dc(k, j) += h * (w.JV[b](m, j) * w.V[a][q] + w.V[b][m] * w.JV[a](q, j));
                  }
                }
            dc += contract1(Hc, n, w.c2[ab]) + w.JV[c] * w.dc2[ab];
            *D += s * dc;
          }
        }
  }

  if (G) {
    const int d = vf.d(), dim = S.dim();
    G->setZero(n, d);
    const auto lie = sig_log(S);
    for (int m = 0; m < d; ++m) {
      TruncatedSignature e(dim, N);
      e.at(m) = 1.0;
      const auto dS = sig_exp_derivative(lie, e);
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
      for (int a = 0; a < L; ++a) col += dS.at(al.letter[a]) * w.V[a];
      if (N >= 2)
        for (int a = 0; a < L; ++a)
          for (int b = 0; b < L; ++b) col += dS.at(al.letter[a], al.letter[b]) * w.c2[a * L + b];
      if (N >= 3)
        for (int a = 0; a < L; ++a)
          for (int b = 0; b < L; ++b)
            for (int c = 0; c < L; ++c)
              col += dS.at(al.letter[a], al.letter[b], al.letter[c]) * w.c3[(a * L + b) * L + c];
      G->col(m) = col;
    }
  }
  return out;
}

void check_state(const Eigen::VectorXd& y, int cell) {
  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kBlowUp)
    fail(ErrorKind::kBlowUp, kModule, "state norm exceeded 1e8 at cell " + std::to_string(cell));
}

// ---- series (jet) solver ----

struct JetSpaces {
  SeriesSpace base;
  SeriesSpace ext;
  std::vector<int> embed;
  int tau1, tau2;

  JetSpaces(std::vector<SeriesVar> vars, double cap)
      : base(vars, cap), ext(with_taus(vars), cap), tau1(static_cast<int>(vars.size())), tau2(tau1 + 1) {
    for (int m = 0; m < base.size(); ++m) {
      auto e = base.exponents(m);
      e.push_back(0);
      e.push_back(0);
      embed.push_back(ext.index_of(e));
    }
  }
  static std::vector<SeriesVar> with_taus(std::vector<SeriesVar> v) {
    v.push_back({0.0, 1});
    v.push_back({0.0, 1});
    return v;
  }
  Series up(const Series& s) const {
    Series out(&ext);
    for (int m = 0; m < base.size(); ++m) out[embed[m]] = s[m];
    return out;
  }
  Series down(const Series& s) const {
    Series out(&base);
    for (int m = 0; m < base.size(); ++m) out[m] = s[embed[m]];
    return out;
  }
};

bool is_zero(const Series& s) {
  for (int m = 0; m < s.size(); ++m)
    if (s[m] != 0.0) return false;
  return true;
}

struct SeriesCell {
  int dim, depth;
  SeriesVec s1, s2, s3;
};

// exp of a Lie element with series coefficients
SeriesCell series_exp(const SeriesVec& l1, const SeriesVec& l2, const SeriesVec& l3, int dim, int depth,
                      const SeriesSpace* sp) {
  SeriesCell c{dim, depth, l1, {}, {}};
  if (depth >= 2) {
    c.s2.assign(dim * dim, Series(sp));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        Series v = l2[i * dim + j];
        v.add_product(l1[i], l1[j], 0.5);
        c.s2[i * dim + j] = std::move(v);
      }
  }
  if (depth >= 3) {
    c.s3.assign(dim * dim * dim, Series(sp));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) {
          Series v = l3[(i * dim + j) * dim + k];
          v.add_product(l1[i], l2[j * dim + k], 0.5);
          v.add_product(l2[i * dim + j], l1[k], 0.5);
          v.add_product(l1[i] * l1[j], l1[k], 1.0 / 6.0);
          c.s3[(i * dim + j) * dim + k] = std::move(v);
        }
  }
  return c;
}

SeriesVec axpy(const SeriesVec& y, const Series& t, const SeriesVec& v) {
  SeriesVec out = y;
  for (std::size_t k = 0; k < y.size(); ++k) out[k].add_product(t, v[k]);
  return out;
}

SeriesVec series_step(const VectorFieldSystem& vf, const Alphabet& al, const JetSpaces& js, const SeriesVec& y,
                      const SeriesCell& S) {
  const int n = vf.n(), L = static_cast<int>(al.letter.size()), dim = S.dim;
  SeriesVec out = y;
  std::vector<SeriesVec> V(L);
  for (int a = 0; a < L; ++a) {
    vf.eval(al.field[a], y, V[a]);
    const Series& s = S.s1[al.letter[a]];
    if (is_zero(s)) continue;
    for (int k = 0; k < n; ++k) out[k].add_product(s, V[a][k]);
  }
  if (S.depth < 2) return out;
  const Series t1 = Series::variable(&js.ext, js.tau1), t2 = Series::variable(&js.ext, js.tau2);
  SeriesVec ye(n);
  for (int k = 0; k < n; ++k) ye[k] = js.up(y[k]);
  std::vector<SeriesVec> Ve(L);
  for (int a = 0; a < L; ++a) {
    Ve[a].resize(n);
    for (int k = 0; k < n; ++k) Ve[a][k] = js.up(V[a][k]);
  }
  SeriesVec tmp;
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) {
      const Series& s = S.s2[al.letter[a] * dim + al.letter[b]];
      if (is_zero(s)) continue;
      vf.eval(al.field[b], axpy(ye, t2, Ve[a]), tmp);
      for (int k = 0; k < n; ++k) out[k].add_product(s, js.down(tmp[k].partial(js.tau2)));
    }
  if (S.depth < 3) return out;
  for (int a = 0; a < L; ++a) {
    const SeriesVec z1 = axpy(ye, t1, Ve[a]);
    for (int b = 0; b < L; ++b) {
      bool any = false;
      for (int c = 0; c < L; ++c)
        any = any || !is_zero(S.s3[(al.letter[a] * dim + al.letter[b]) * dim + al.letter[c]]);
      if (!any) continue;
      SeriesVec vb;
      vf.eval(al.field[b], z1, vb);
      const SeriesVec w2 = axpy(z1, t2, vb);
      for (int c = 0; c < L; ++c) {
        const Series& s = S.s3[(al.letter[a] * dim + al.letter[b]) * dim + al.letter[c]];
        if (is_zero(s)) continue;
        vf.eval(al.field[c], w2, tmp);
        for (int k = 0; k < n; ++k) out[k].add_product(s, js.down(tmp[k].partial(js.tau2).partial(js.tau1)));
      }
    }
  }
  return out;
}
}  // namespace

SolveResult solve_rde(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const RoughPathGrid& driver,
                      const SolveOptions& opts) {
  const int n = vf.n(), d = vf.d();
  require(a.size() == n, kModule, "initial state has wrong dimension");
  require(driver.dim() == d + 1, kModule, "driver must have d+1 coordinates (time last)");
  const int M = driver.cells_count();
  const bool jac = opts.jacobians || opts.sensitivity;
  const Alphabet al = alphabet(vf);

  SolveResult res;
  res.times = driver.times();
  res.y.resize(M + 1, n);
  res.y.row(0) = a.transpose();
  if (jac) {
    res.J.assign(M + 1, Eigen::MatrixXd::Identity(n, n));
    res.K.assign(M + 1, Eigen::MatrixXd::Identity(n, n));
  }
  std::vector<Eigen::MatrixXd> G(opts.sensitivity ? M : 0);
  StepWork work;
  Eigen::VectorXd y = a;
  Eigen::MatrixXd D;
  for (int k = 0; k < M; ++k) {
    y = euler_step(vf, al, y, driver.cell(k), jac ? &D : nullptr, opts.sensitivity ? &G[k] : nullptr, work);
    check_state(y, k);
    res.y.row(k + 1) = y.transpose();
    if (jac) {
      res.J[k + 1] = D * res.J[k];
      res.K[k + 1] = res.K[k] * D.partialPivLu().inverse();
    }
  }
  if (opts.sensitivity) {
    res.sens.resize(M);
    for (int p = 0; p < M; ++p) res.sens[p] = res.J[M] * res.K[p + 1] * G[p];
  }
  return res;
}

RoughPathGrid scaled_shifted_driver(const RoughPathGrid& w, const GridPath& gamma, double eps, const Hurst& H) {
  const RoughPathGrid moved = young_translate(dilate(w, eps), gamma, 1);
  return pair_with_time(moved, std::pow(eps, H.inverse()));
}

SolveResult solve_scaled_shifted(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const RoughPathGrid& w,
                                 const CMElement& gamma, double eps, const Hurst& H, const SolveOptions& opts) {
  require(eps >= 0.0 && eps <= 1.0, kModule, "epsilon must lie in [0,1]");
  return solve_rde(vf, a, scaled_shifted_driver(w, gamma.render(w.times()), eps, H), opts);
}

SolveResult solve_skeleton(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const CMElement& gamma,
                           const std::vector<double>& grid, int depth, const SolveOptions& opts) {
  const auto driver = pair_with_time(lift_grid_path(gamma.render(grid), depth), 0.0);
  return solve_rde(vf, a, driver, opts);
}

std::vector<Eigen::MatrixXd> skeleton_gradient(const SolveResult& sk) {
  require(!sk.sens.empty(), kModule, "solve was run without sensitivities");
  return sk.sens;
}

Eigen::VectorXd solve_endpoint_polyline(const VectorFieldSystem& vf, const Eigen::VectorXd& a,
                                        const Eigen::MatrixXd& increments, int depth) {
  const int n = vf.n(), d = vf.d();
  require(increments.cols() == d + 1, kModule, "increments need d+1 columns");
  require(depth >= 1 && depth <= 3, kModule, "depth must be 1, 2 or 3");
  const Alphabet al = alphabet(vf);
  const int L = static_cast<int>(al.letter.size());
  Eigen::VectorXd y = a, v(n), tmp(n), vd(n);
  Eigen::MatrixXd jd(n, n);
  std::vector<double> hd;
  for (int k = 0; k < increments.rows(); ++k) {
    // For a straight cell the words collapse onto the single field V_delta = sum_l delta_l V_l.
    vd.setZero();
    for (int a2 = 0; a2 < L; ++a2) {
      vf.eval(al.field[a2], y, tmp);
      vd += increments(k, al.letter[a2]) * tmp;
    }
    Eigen::VectorXd next = y + vd;
    if (depth >= 2) {
      jd.setZero();
      for (int a2 = 0; a2 < L; ++a2) jd += increments(k, al.letter[a2]) * vf.jacobian(al.field[a2], y);
      const Eigen::VectorXd jv = jd * vd;
      next += 0.5 * jv;
      if (depth >= 3) {
        hd.assign(static_cast<std::size_t>(n) * n * n, 0.0);
        for (int a2 = 0; a2 < L; ++a2) {
          const auto h = vf.hessian(al.field[a2], y);
          const double s = increments(k, al.letter[a2]);
          for (std::size_t r = 0; r < hd.size(); ++r) hd[r] += s * h[r];
        }
        next += (contract2(hd, n, vd, vd) + jd * jv) / 6.0;
      }
    }
    y = next;
    check_state(y, k);
  }
  return y;
}

Eigen::VectorXd linear_response(const std::vector<Eigen::MatrixXd>& A, const Eigen::MatrixXd& dx) {
  require(static_cast<Eigen::Index>(A.size()) == dx.rows(), kModule, "sensitivity and increments disagree");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(A.front().rows());
  for (std::size_t p = 0; p < A.size(); ++p) out.noalias() += A[p] * dx.row(p).transpose();
  return out;
}

ExpansionTerms expansion_terms(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const CMElement& gamma,
                               const RoughPathGrid& x, const Hurst& H, double kappa_max) {
  const int n = vf.n(), d = vf.d(), D = d + 1, N = x.depth(), M = x.cells_count();
  require(x.dim() == d, kModule, "noise path must have d coordinates");
  require(a.size() == n, kModule, "initial state has wrong dimension");
  require(kappa_max >= 0.0, kModule, "kappa_max must be nonnegative");
  const ExponentField field(H);
  const auto kappas = enumerate_exponents(H, IndexSet::kL1, std::max(kappa_max, 1e-6));

  const int eps_deg = static_cast<int>(std::floor(kappa_max + 1e-9));
  const int del_deg = static_cast<int>(std::floor(kappa_max * H.value + 1e-9));
  const JetSpaces js({{1.0, eps_deg}, {H.inverse(), del_deg}}, kappa_max);
  const SeriesSpace* sp = &js.base;
  const Series eps = Series::variable(sp, 0), del = Series::variable(sp, 1);

  const GridPath g = gamma.render(x.times());
  const Alphabet al = alphabet(vf);
  SeriesVec y(n);
  for (int k = 0; k < n; ++k) y[k] = Series(sp, a[k]);
  std::vector<SeriesVec> traj;
  traj.reserve(M + 1);
  traj.push_back(y);
  const Series eps2 = eps * eps, eps3 = eps2 * eps;
  for (int p = 0; p < M; ++p) {
    const auto lie = sig_log(x.cell(p));
    SeriesVec l1(D, Series(sp)), l2(N >= 2 ? D * D : 0, Series(sp)), l3(N >= 3 ? D * D * D : 0, Series(sp));
    const Eigen::VectorXd dg = g.increment(p);
    for (int i = 0; i < d; ++i) l1[i] = lie.at(i) * eps + dg[i];
    l1[d] = (x.times()[p + 1] - x.times()[p]) * del;
    if (N >= 2)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) l2[i * D + j] = lie.at(i, j) * eps2;
    if (N >= 3)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k) l3[(i * D + j) * D + k] = lie.at(i, j, k) * eps3;
    const SeriesCell cell = series_exp(l1, l2, l3, D, N, sp);
    y = series_step(vf, al, js, y, cell);
    for (int k = 0; k < n; ++k)
      if (!std::isfinite(y[k].constant()) || std::abs(y[k].constant()) > kBlowUp)
        fail(ErrorKind::kBlowUp, kModule, "jet state exceeded 1e8 at cell " + std::to_string(p));
    traj.push_back(y);
  }

  ExpansionTerms out;
  out.gamma = gamma;
  out.hurst = H;
  out.kappas = kappas;
  for (std::size_t j = 0; j < kappas.size(); ++j) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(M + 1, n);
    for (int m = 0; m < sp->size(); ++m) {
      const auto& e = sp->exponents(m);
      if (!field.equal(field.make(e[0], e[1]), kappas[j])) continue;
      for (int t = 0; t <= M; ++t)
        for (int k = 0; k < n; ++k) v(t, k) += traj[t][k][m];
    }
    out.phi.emplace_back(x.times(), std::move(v));
  }
  return out;
}

GridPath remainder(const VectorFieldSystem& vf, const Eigen::VectorXd& a, const CMElement& gamma,
                   const RoughPathGrid& x, double eps, int k, const Hurst& H, const ExpansionTerms* terms) {
  require(k >= 0, kModule, "k must be nonnegative");
  ExpansionTerms local;
  if (!terms || static_cast<int>(terms->kappas.size()) <= k) {
    const auto l1 = enumerate_exponents(H, IndexSet::kL1, k + 2.0);
    local = expansion_terms(vf, a, gamma, x, H, l1.at(k).value);
    terms = &local;
  }
  const auto sol = solve_scaled_shifted(vf, a, x, gamma, eps, H, {false, false});
  Eigen::MatrixXd r = sol.y;
  for (int j = 0; j <= k; ++j) r -= std::pow(eps, terms->kappas[j].value) * terms->phi[j].values;
  return GridPath(sol.times, std::move(r));
}

void write_solution_csv(const std::string& file, const SolveResult& res) {
  std::ofstream os(file);
  if (!os) fail(ErrorKind::kInvalidArgument, kModule, "cannot open " + file);
  os << std::setprecision(17) << "t";
  for (int k = 0; k < res.y.cols(); ++k) os << ",y" << k + 1;
  os << "\n";
  for (std::size_t t = 0; t < res.times.size(); ++t) {
    os << res.times[t];
    for (int k = 0; k < res.y.cols(); ++k) os << "," << res.y(t, k);
    os << "\n";
  }
}

}  // namespace roughheat
