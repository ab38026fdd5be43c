#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "roughheat/asymptotics.hpp"
#include "roughheat/config.hpp"
#include "roughheat/error.hpp"
#include "roughheat/exponents.hpp"
#include "roughheat/fgauss.hpp"
#include "roughheat/malliavin.hpp"
#include "roughheat/metrics.hpp"
#include "roughheat/minimizer.hpp"
#include "roughheat/parallel.hpp"
#include "roughheat/rde.hpp"
#include "roughheat/roughlift.hpp"
#include "roughheat/vector_fields.hpp"
#include "roughheat/verify.hpp"

namespace fs = std::filesystem;
using namespace roughheat;
using json = nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerify = 4;

const std::set<std::string> kCommon{"out", "seed", "workers"};
const std::set<std::string> kModelKeys{"model", "model-file", "sigma", "start", "target", "hurst"};

struct Command {
  std::string name;
  std::string help;
  std::set<std::string> keys;
};

std::vector<Command> commands() {
  auto with = [](std::set<std::string> a, const std::set<std::string>& b) {
    a.insert(b.begin(), b.end());
    return a;
  };
  const auto model = with(kModelKeys, kCommon);
  return {
      {"simulate-fbm", "sample fBm paths on a uniform grid", with({"hurst", "M", "dim", "paths"}, kCommon)},
      {"lift", "lift a sampled fBm path and report its rough path norms",
       with({"hurst", "M", "dim", "depth", "index", "p", "delta"}, kCommon)},
      {"solve", "solve the scaled RDE along one fBm sample", with({"M", "eps", "index", "depth"}, model)},
      {"skeleton", "solve the skeleton ODE for gamma = c R(1, .)", with({"M", "coeffs", "depth"}, model)},
      {"expand", "fractional Taylor terms and remainders at the energy minimizer",
       with({"M", "knots", "starts", "index", "kappa-max", "eps"}, model)},
      {"minimize", "energy minimizer, multiplier and assumption checks",
       with({"knots", "starts", "max-outer", "hessian-dirs", "multiplier-samples"}, model)},
      {"covariance", "deterministic Malliavin covariance and reduced-covariance eigenvalue tails",
       with({"knots", "starts", "M", "samples", "eps"}, model)},
      {"hormander", "bracket-span rank at a point", with({"model", "model-file", "sigma", "point", "depth"}, kCommon)},
      {"indices", "enumerate exponent index sets", with({"hurst", "set", "cutoff"}, kCommon)},
      {"density", "Monte Carlo density estimate", with({"M", "t", "method", "samples", "bandwidth", "knots", "starts",
                                                        "batches", "outside-radius", "truncation-radius"},
                                                       model)},
      {"asymptotics", "fit of the small-time expansion and the leading coefficient",
       with({"M", "t", "samples", "bandwidth", "knots", "starts", "drift", "alpha-samples", "alpha-sanity"}, model)},
      {"verify", "acceptance-criteria suite", with({"suite", "inject-chen-fault", "alt-workers"}, kCommon)},
  };
}

// ---------------------------------------------------------------------------

struct Model {
  std::string id;
  std::shared_ptr<const VectorFieldSystem> vf;
  Eigen::VectorXd start, target;
  double sigma = 0.5;
};

Eigen::VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

Eigen::VectorXd state_key(const RunConfig& cfg, const std::string& key, const Eigen::VectorXd& fallback, int n) {
  if (!cfg.has(key)) return fallback;
  const auto v = cfg.reals(key);
  if (static_cast<int>(v.size()) != n)
    fail(ErrorKind::kConfig, "config", "key '" + key + "': expected " + std::to_string(n) + " components");
  return to_vector(v);
}

Model load_model(const RunConfig& cfg, bool need_target = true) {
  Model m;
  m.id = cfg.str("model", "heisenberg");
  Eigen::VectorXd a, b;
  if (m.id == "heisenberg") {
    m.vf = make_heisenberg();
    a = Eigen::VectorXd::Zero(3);
    b = Eigen::Vector3d(1.0, 0.5, 0.0);
  } else if (m.id == "lognormal") {
    m.sigma = cfg.real("sigma", 0.5);
    if (!(m.sigma > 0)) fail(ErrorKind::kConfig, "config", "key 'sigma': must be positive");
    m.vf = make_lognormal(m.sigma);
    a = Eigen::VectorXd::Constant(1, 1.0);
    b = Eigen::VectorXd::Constant(1, 1.5);
  } else if (m.id == "bridge1d") {
    m.vf = make_bridge1d();
    a = Eigen::VectorXd::Zero(1);
    b = Eigen::VectorXd::Constant(1, 1.0);
  } else if (m.id == "file") {
    m.vf = load_polynomial_field(cfg.required("model-file"));
    a = Eigen::VectorXd::Zero(m.vf->n());
    b = Eigen::VectorXd::Zero(m.vf->n());
    if (need_target && !cfg.has("target")) fail(ErrorKind::kConfig, "config", "missing required key 'target'");
  } else {
    fail(ErrorKind::kConfig, "config", "key 'model': unknown model '" + m.id + "'");
  }
  const int n = m.vf->n();
  m.start = state_key(cfg, "start", a, n);
  m.target = state_key(cfg, "target", b, n);
  return m;
}

// ---------------------------------------------------------------------------

struct Context {
  std::string command;
  RunConfig cfg;
  fs::path out;
  std::uint64_t seed = 1;
  int workers = 0;
  std::vector<std::string> outputs;
  json summary;  // extra manifest fields

  void write(const std::string& name, const std::string& text) {
    std::ofstream f(out / name);
    if (!f) fail(ErrorKind::kConfig, "cli", "cannot write " + (out / name).string());
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    outputs.push_back(name);
  }
  void note(const std::string& name) { outputs.push_back(name); }
  std::string path(const std::string& name) const { return (out / name).string(); }
};

std::string csv_row(const Eigen::VectorXd& v) {
  std::ostringstream s;
  s << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  return s.str();
}

MinimizerOptions minimizer_options(const Context& c) {
  MinimizerOptions mo;
  mo.knots = static_cast<int>(c.cfg.integer("knots", 64));
  mo.starts = static_cast<int>(c.cfg.integer("starts", 5));
  mo.max_outer = static_cast<int>(c.cfg.integer("max-outer", 200));
  mo.seed = c.seed;
  mo.workers = c.workers;
  if (mo.knots < 2) fail(ErrorKind::kConfig, "config", "key 'knots': need at least 2");
  if (mo.starts < 1) fail(ErrorKind::kConfig, "config", "key 'starts': need at least 1");
  return mo;
}

int solver_grid(const Context& c, int knots) {
  const int M = c.cfg.grid("M", 64);
  if (M % knots != 0)
    fail(ErrorKind::kConfig, "config", "key 'M': must be a multiple of the knot count " + std::to_string(knots));
  return M;
}

int cmd_simulate(Context& c) {
  const Hurst h = c.cfg.hurst();
  const int M = c.cfg.grid("M", 256);
  const int d = static_cast<int>(c.cfg.integer("dim", 1));
  const int n = static_cast<int>(c.cfg.integer("paths", 10));
  if (d < 1) fail(ErrorKind::kConfig, "config", "key 'dim': must be positive");
  if (n < 1) fail(ErrorKind::kConfig, "config", "key 'paths': must be positive");
  const auto paths = sample_fbm(FbmSpec(h, d, M), n, c.seed, c.workers);
  write_paths_csv(c.path("paths.csv"), paths);
  c.note("paths.csv");
  return 0;
}

int cmd_lift(Context& c) {
  const Hurst h = c.cfg.hurst();
  const int M = c.cfg.grid("M", 256);
  const int d = static_cast<int>(c.cfg.integer("dim", 2));
  const int depth = static_cast<int>(c.cfg.integer("depth", h.depth()));
  const std::uint64_t index = c.cfg.seed("index", 0);
  const double p = c.cfg.real("p", h.depth() + 0.5);
  const double delta = c.cfg.real("delta", 1.0);
  FbmSampler s(FbmSpec(h, d, M));
  const auto w = s.path(c.seed, index);
  const auto rp = lift_grid_path(w, depth);
  std::ostringstream csv;
  csv << std::setprecision(17) << "t";
  for (int l = 1; l <= depth; ++l)
    for (std::size_t i = 0; i < rp.prefix(0).level(l).size(); ++i) csv << ",S" << l << "_" << i;
  csv << "\n";
  for (int k = 0; k <= M; ++k) {
    csv << rp.times()[k];
    for (double v : rp.prefix(k).flat()) csv << "," << v;
    csv << "\n";
  }
  c.write("signature.csv", csv.str());
  json j;
  j["p"] = p;
  for (int l = 1; l <= std::min(depth, static_cast<int>(std::floor(p))); ++l) {
    j["pvar"].push_back(pvar_norm(rp, l, p));
    j["holder"].push_back(holder_norm(rp, l, 1.0 / p));
  }
  j["homogeneous_pvar"] = homogeneous_pvar(rp, p);
  j["greedy_count"] = greedy_count(rp, p, delta);
  j["delta"] = delta;
  c.write("norms.json", j.dump(2));
  return 0;
}

int cmd_solve(Context& c) {
  const Model m = load_model(c.cfg);
  const Hurst h = c.cfg.hurst();
  const int M = c.cfg.grid("M", 256);
  const double eps = c.cfg.real("eps", 1.0);
  const int depth = static_cast<int>(c.cfg.integer("depth", h.depth()));
  FbmSampler s(FbmSpec(h, m.vf->d(), M));
  const auto w = lift_grid_path(s.path(c.seed, c.cfg.seed("index", 0)), depth);
  const auto zero = CMElement::zero(h, m.vf->d(), {1.0});
  const auto sol = solve_scaled_shifted(*m.vf, m.start, w, zero, eps, h);
  write_solution_csv(c.path("solution.csv"), sol);
  c.note("solution.csv");
  double jk = 0.0;
  for (std::size_t k = 0; k < sol.J.size(); ++k)
    jk = std::max(jk, (sol.J[k] * sol.K[k] - Eigen::MatrixXd::Identity(m.vf->n(), m.vf->n())).cwiseAbs().maxCoeff());
  json j{{"endpoint", std::vector<double>(sol.y.row(M).data(), sol.y.row(M).data() + m.vf->n())},
         {"max_JK_defect", jk}};
  c.write("solve.json", j.dump(2));
  return 0;
}

int cmd_skeleton(Context& c) {
  const Model m = load_model(c.cfg);
  const Hurst h = c.cfg.hurst();
  const int M = c.cfg.grid("M", 64);
  const int d = m.vf->d();
  auto coeffs = c.cfg.reals("coeffs");
  if (coeffs.empty()) coeffs.assign(d, 1.0);
  if (static_cast<int>(coeffs.size()) != d)
    fail(ErrorKind::kConfig, "config", "key 'coeffs': expected " + std::to_string(d) + " values");
  const CMElement g(h, {1.0}, to_vector(coeffs));
  const int depth = static_cast<int>(c.cfg.integer("depth", h.depth()));
  const auto sol = solve_skeleton(*m.vf, m.start, g, uniform_grid(M), depth, {true, true});
  write_solution_csv(c.path("skeleton.csv"), sol);
  c.note("skeleton.csv");
  std::ostringstream csv;
  csv << std::setprecision(17) << "t";
  for (int k = 0; k < m.vf->n(); ++k)
    for (int i = 0; i < d; ++i) csv << ",A" << k + 1 << "_" << i + 1;
  csv << "\n";
  const auto A = skeleton_gradient(sol);
  for (int p = 0; p < M; ++p) {
    csv << sol.times[p];
    for (int k = 0; k < m.vf->n(); ++k)
      for (int i = 0; i < d; ++i) csv << "," << A[p](k, i);
    csv << "\n";
  }
  c.write("gradient.csv", csv.str());
  return 0;
}

MinimizerResult run_minimizer(Context& c, const Model& m, const Hurst& h) {
  return minimize_energy(*m.vf, m.start, m.target, h, minimizer_options(c));
}

int cmd_expand(Context& c) {
  const Model m = load_model(c.cfg);
  const Hurst h = c.cfg.hurst();
  const auto res = run_minimizer(c, m, h);
  const int M = solver_grid(c, static_cast<int>(res.gamma_bar.knots.size()));
  const double kmax = c.cfg.real("kappa-max", std::min(4.0, 1.0 + 1.0 / h.value));
  FbmSampler s(FbmSpec(h, m.vf->d(), M));
  const auto x = lift_grid_path(s.path(c.seed, c.cfg.seed("index", 0)), h.depth());
  const auto terms = expansion_terms(*m.vf, m.start, res.gamma_bar, x, h, kmax);
  std::ostringstream csv;
  csv << std::setprecision(17) << "kappa,t";
  for (int k = 0; k < m.vf->n(); ++k) csv << ",y" << k + 1;
  csv << "\n";
  for (std::size_t j = 0; j < terms.kappas.size(); ++j)
    for (int k = 0; k <= M; ++k)
      csv << format_exponent(h, terms.kappas[j]) << "," << terms.phi[j].times[k] << ","
          << csv_row(terms.phi[j].at(k)) << "\n";
  c.write("terms.csv", csv.str());
  auto eps = c.cfg.reals("eps");
  if (eps.empty()) eps = {0.25, 0.125, 0.0625, 0.03125, 0.015625};
  json j;
  for (std::size_t k = 0; k + 1 < terms.kappas.size(); ++k) {
    json row{{"k", k}, {"next_kappa", format_exponent(h, terms.kappas[k + 1])}};
    for (double e : eps) {
      const auto r = remainder(*m.vf, m.start, res.gamma_bar, x, e, static_cast<int>(k), h, &terms);
      row["sup_remainder"].push_back(r.values.cwiseAbs().maxCoeff());
    }
    j["remainders"].push_back(row);
  }
  j["eps"] = eps;
  c.write("remainders.json", j.dump(2));
  return 0;
}

int cmd_minimize(Context& c) {
  const Model m = load_model(c.cfg);
  const Hurst h = c.cfg.hurst();
  auto res = run_minimizer(c, m, h);
  json extra;
  const int dirs = static_cast<int>(c.cfg.integer("hessian-dirs", 4));
  if (dirs > 0 && res.converged) {
    const auto hr = hessian_check(*m.vf, res, dirs, c.seed);
    extra["hessian_second_differences"] = hr.second_differences;
    extra["hessian_doubled_ratio"] = hr.doubled_ratio;
  }
  const int ms = static_cast<int>(c.cfg.integer("multiplier-samples", 1000));
  if (ms > 0 && res.converged) {
    const auto mr = multiplier_identity_check(res, ms, c.seed, c.workers);
    extra["multiplier_max_residual"] = mr.max_residual;
    extra["multiplier_rms_residual"] = mr.rms_residual;
  }
  json j = json::parse(minimizer_json(res));
  j.update(extra);
  c.write("minimizer.json", j.dump(2));
  std::cout << "energy " << std::setprecision(10) << res.energy << "\n";
  if (res.rank_deficient) std::cerr << "warning: constraint Jacobian is nearly rank deficient at the minimizer\n";
  return res.converged ? 0 : kExitNumeric;
}

int cmd_covariance(Context& c) {
  const Model m = load_model(c.cfg);
  const Hurst h = c.cfg.hurst();
  const auto res = run_minimizer(c, m, h);
  json j;
  for (int r = 0; r < res.Q_at_min.m.rows(); ++r) {
    const Eigen::VectorXd row = res.Q_at_min.m.row(r).transpose();
    j["Q"].push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  j["Q_min_eigenvalue"] = res.Q_at_min.min_eigenvalue();
  c.write("covariance.json", j.dump(2));
  const int N = static_cast<int>(c.cfg.integer("samples", 0));
  if (N > 0) {
    const int M = c.cfg.grid("M", 64);
    auto eps = c.cfg.reals("eps");
    if (eps.empty()) eps = {0.25, 0.125, 0.0625, 0.03125};
    FbmSampler s(FbmSpec(h, m.vf->d(), M));
    const auto zero = CMElement::zero(h, m.vf->d(), {1.0});
    std::vector<std::vector<CovMatrix>> samples(eps.size(), std::vector<CovMatrix>(N));
    for_chunks(N, 100, c.workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const auto w = lift_grid_path(s.path(c.seed, i), h.depth());
        for (std::size_t e = 0; e < eps.size(); ++e)
          samples[e][i] = reduced_cov_C(solve_scaled_shifted(*m.vf, m.start, w, zero, eps[e], h), *m.vf, eps[e]);
      }
    });
    c.write("eigen_tail.json", tail_report_json(eigen_tail(samples, eps)));
  }
  return 0;
}

int cmd_hormander(Context& c) {
  const Model m = load_model(c.cfg, false);
  const Eigen::VectorXd point = state_key(c.cfg, "point", m.start, m.vf->n());
  const int depth = static_cast<int>(c.cfg.integer("depth", 2));
  const auto r = hormander_rank(*m.vf, point, depth);
  json j{{"rank_by_depth", r.rank_by_depth},
         {"total_rank", r.total_rank},
         {"singular_values", r.singular_values},
         {"state_dim", m.vf->n()}};
  c.write("hormander.json", j.dump(2));
  return 0;
}

int cmd_indices(Context& c) {
  const Hurst h = c.cfg.hurst();
  IndexSet set;
  try {
    set = parse_index_set(c.cfg.str("set", "L1"));
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, "config", std::string("key 'set': ") + e.what());
  }
  const double cutoff = c.cfg.real("cutoff", 4.0);
  if (!(cutoff > 0)) fail(ErrorKind::kConfig, "config", "key 'cutoff': must be positive");
  std::string line;
  for (const auto& e : enumerate_exponents(h, set, cutoff)) line += (line.empty() ? "" : ",") + format_exponent(h, e);
  std::cout << line << "\n";
  c.write("indices.csv", line);
  return 0;
}

DensityModel density_model(Context& c, const Model& m, const Hurst& h, bool need_min) {
  DensityModel dm;
  dm.id = m.id;
  dm.vf = m.vf;
  dm.a = m.start;
  dm.a_prime = m.target;
  dm.hurst = h;
  if (need_min) {
    dm.minimizer = run_minimizer(c, m, h);
    dm.M = solver_grid(c, static_cast<int>(dm.minimizer->gamma_bar.knots.size()));
  } else {
    dm.M = c.cfg.grid("M", 64);
  }
  return dm;
}

int cmd_density(Context& c) {
  const Model m = load_model(c.cfg);
  const Hurst h = c.cfg.hurst();
  DensityOptions o;
  try {
    o.method = parse_density_method(c.cfg.str("method", "shifted"));
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, "config", std::string("key 'method': ") + e.what());
  }
  o.n_samples = static_cast<int>(c.cfg.integer("samples", 100000));
  o.bandwidth = c.cfg.real("bandwidth", 0.0);
  o.batches = static_cast<int>(c.cfg.integer("batches", 20));
  o.outside_radius = c.cfg.real("outside-radius", 0.0);
  o.truncation_radius = c.cfg.real("truncation-radius", std::numeric_limits<double>::infinity());
  o.seed = c.seed;
  o.workers = c.workers;
  auto ts = c.cfg.reals("t");
  if (ts.empty()) ts = {0.5};
  const auto dm = density_model(c, m, h, o.method == DensityMethod::kShifted);
  const auto est = estimate_density_curve(dm, ts, o);
  json j = json::parse(density_json(est));
  if (m.id == "lognormal" || m.id == "bridge1d") {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      double exact;
      if (m.id == "lognormal") {
        exact = lognormal_density(m.start[0], m.target[0], m.sigma, ts[i], h.value);
      } else {
        const double s = std::pow(ts[i], h.value), z = (m.target[0] - m.start[0]) / s;
        exact = std::exp(-0.5 * z * z) / (s * std::sqrt(2 * M_PI));
      }
      j["points"][i]["oracle"] = exact;
      std::cout << "t " << ts[i] << "  estimate " << std::setprecision(6) << est.points[i].estimate << "  se "
                << est.points[i].se << "  oracle " << exact << "\n";
    }
  } else {
    for (const auto& p : est.points)
      std::cout << "t " << p.t << "  estimate " << std::setprecision(6) << p.estimate << "  se " << p.se << "\n";
  }
  c.write("density.json", j.dump(2));
  write_density_csv(c.path("density.csv"), est);
  c.note("density.csv");
  return 0;
}

int cmd_asymptotics(Context& c) {
  const Model m = load_model(c.cfg);
  const Hurst h = c.cfg.hurst();
  DensityOptions o;
  o.n_samples = static_cast<int>(c.cfg.integer("samples", 100000));
  o.bandwidth = c.cfg.real("bandwidth", 0.0);
  o.seed = c.seed;
  o.workers = c.workers;
  auto ts = c.cfg.reals("t");
  if (ts.empty()) ts = {0.4, 0.2, 0.1};
  if (!c.cfg.has("drift")) fail(ErrorKind::kConfig, "config", "missing required key 'drift' (true or false)");
  const bool drift = c.cfg.flag("drift", false);
  const auto dm = density_model(c, m, h, true);
  const auto est = estimate_density_curve(dm, ts, o);
  const auto fit = fit_asymptotics(est, 2 * dm.minimizer->energy, m.vf->n(), h, drift);
  c.write("density.json", density_json(est));
  write_density_csv(c.path("density.csv"), est);
  c.note("density.csv");
  json j = json::parse(fit_json(fit));
  j["energy"] = dm.minimizer->energy;
  const int na = static_cast<int>(c.cfg.integer("alpha-samples", 0));
  if (na > 0) {
    LeadingOptions lo;
    lo.n_samples = na;
    lo.seed = c.seed + 1;
    lo.workers = c.workers;
    lo.sanity = c.cfg.flag("alpha-sanity", false);
    const auto lc = leading_coefficient(*m.vf, *dm.minimizer, lo);
    j["leading_coefficient"] = json::parse(leading_json(lc));
    if (lc.heavy_tail) std::cerr << "warning: heavy-tailed weights in the leading-coefficient estimate\n";
  }
  c.write("fit.json", j.dump(2));
  std::cout << "rate_hat " << fit.rate_hat << "  prefactor_exp_hat " << fit.prefactor_exp_hat << "  alpha0_hat "
            << fit.alpha0_hat << "\n";
  return 0;
}

int cmd_verify(Context& c) {
  VerifyOptions vo;
  const std::string suite = c.cfg.str("suite", "fast");
  if (suite != "fast" && suite != "full") fail(ErrorKind::kConfig, "config", "key 'suite': expected fast or full");
  vo.full = suite == "full";
  vo.workers = c.workers;
  vo.seed = c.cfg.seed("seed", vo.seed);
  vo.alt_workers = static_cast<int>(c.cfg.integer("alt-workers", 0));
  vo.inject_chen_fault = c.cfg.flag("inject-chen-fault", false);
  const auto results = run_suite(vo);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << report_line(r) << std::endl;
    failed += !r.pass;
  }
  c.write("verify.json", report_json(results));
  return failed ? kExitVerify : 0;
}

using Handler = int (*)(Context&);
const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"simulate-fbm", cmd_simulate}, {"lift", cmd_lift},         {"solve", cmd_solve},
      {"skeleton", cmd_skeleton},     {"expand", cmd_expand},     {"minimize", cmd_minimize},
      {"covariance", cmd_covariance}, {"hormander", cmd_hormander}, {"indices", cmd_indices},
      {"density", cmd_density},       {"asymptotics", cmd_asymptotics}, {"verify", cmd_verify},
  };
  return h;
}

void write_manifest(const Context& c, double seconds, int status) {
  json j;
  j["command"] = c.command;
  j["config"] = c.cfg.values();
  j["library_version"] = ROUGHHEAT_VERSION;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["wall_seconds"] = seconds;
  j["exit_status"] = status;
  j["outputs"] = c.outputs;
  std::ofstream(c.out / "manifest.json") << j.dump(2) << "\n";
  std::ofstream(c.out / "config.txt") << c.cfg.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-time density asymptotics for rough differential equations driven by fBm"};
  app.require_subcommand(1);
  std::string config_file;
  bool chen_fault_flag = false;
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_file, "flat key = value file; flags override it");
    if (cmd.name == "verify") sub->add_flag("--inject-chen-fault", chen_fault_flag, "corrupt the Chen fold (test hook)");
    for (const auto& key : cmd.keys) {
      if (cmd.name == "verify" && key == "inject-chen-fault") continue;
      sub->add_option("--" + key, flags[cmd.name][key]);
    }
    subs[cmd.name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  Context c;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) c.command = name;
  const auto start = std::chrono::steady_clock::now();
  int status = 0;
  try {
    if (!config_file.empty()) c.cfg = RunConfig::load(config_file);
    for (const auto& [key, value] : flags[c.command])
      if (subs[c.command]->count("--" + key)) c.cfg.set(key, value);
    if (chen_fault_flag) c.cfg.set("inject-chen-fault", "true");
    for (const auto& cmd : commands())
      if (cmd.name == c.command) c.cfg.check_keys(cmd.keys);
    c.seed = c.cfg.seed("seed", 1);
    c.workers = static_cast<int>(c.cfg.integer("workers", 0));
    if (c.workers < 0) fail(ErrorKind::kConfig, "config", "key 'workers': must be nonnegative");
    c.out = c.cfg.str("out", "roughheat-out/" + c.command);
    fs::create_directories(c.out);
    status = handlers().at(c.command)(c);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << ") " << e.what() << "\n";
    status = e.kind() == ErrorKind::kConfig ? kExitConfig : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    status = kExitNumeric;
  }
  if (!c.out.empty() && fs::exists(c.out))
    write_manifest(c, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), status);
  return status;
}
