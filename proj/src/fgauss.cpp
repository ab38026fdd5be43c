#include "roughheat/fgauss.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "roughheat/error.hpp"
#include "roughheat/parallel.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "fgauss";

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double jitter = 1e-12 * a.trace();
  Eigen::MatrixXd b = a;
  b.diagonal().array() += jitter;
  llt.compute(b);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::kNumericalDegeneracy, kModule, std::string("Cholesky failed for ") + what);
  return llt.matrixL();
}
}  // namespace

Hurst::Hurst(double h) : value(h) {
  if (!(h > 0.25 && h <= 0.5)) fail(ErrorKind::kInvalidArgument, kModule, "Hurst parameter must lie in (1/4, 1/2]");
}

Hurst::Hurst(long p, long q) : Hurst(static_cast<double>(p) / static_cast<double>(q)) {
  const long g = std::gcd(p, q);
  rational = std::make_pair(p / g, q / g);
}

Hurst Hurst::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t used = 0;
      const long p = std::stol(text.substr(0, slash), &used);
      const long q = std::stol(text.substr(slash + 1));
      if (q <= 0 || p <= 0) throw std::invalid_argument("sign");
      return Hurst(p, q);
    }
    return Hurst(std::stod(text));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::kInvalidArgument, kModule, "cannot parse Hurst parameter '" + text + "'");
  }
}

std::string Hurst::to_string() const {
  if (rational) return std::to_string(rational->first) + "/" + std::to_string(rational->second);
  std::ostringstream os;
  os << std::setprecision(17) << value;
  return os.str();
}

int Hurst::depth() const {
  if (rational) return static_cast<int>(rational->second / rational->first);
  return static_cast<int>(std::floor(1.0 / value + 1e-12));
}

double Hurst::inverse() const {
  if (rational) return static_cast<double>(rational->second) / static_cast<double>(rational->first);
  return 1.0 / value;
}

double fbm_cov(double s, double t, double H) {
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(std::abs(s), h2) + std::pow(std::abs(t), h2) - std::pow(std::abs(t - s), h2));
}

FbmSpec::FbmSpec(Hurst h, int d, int m) : hurst(h), dim(d), M(m) {
  require(d >= 1, kModule, "dimension must be positive");
  require(m >= 2, kModule, "grid needs at least two cells");
}

Eigen::MatrixXd increment_gram(const FbmSpec& spec) {
  const int M = spec.M;
  const double H = spec.hurst.value;
  // Stationary increments: Gamma_pq depends on |p - q| only.
  const double h = 1.0 / M;
  std::vector<double> row(M);
  for (int k = 0; k < M; ++k) {
    const double a = std::pow((k + 1) * h, 2 * H), b = std::pow(std::abs(k - 1) * h, 2 * H),
                 c = std::pow(k * h, 2 * H);
    row[k] = 0.5 * (a + b - 2 * c);
  }
  Eigen::MatrixXd g(M, M);
  for (int p = 0; p < M; ++p)
    for (int q = 0; q < M; ++q) g(p, q) = row[std::abs(p - q)];
  return g;
}

Eigen::MatrixXd grid_covariance(const FbmSpec& spec) {
  const auto t = spec.times();
  Eigen::MatrixXd r(spec.M, spec.M);
  for (int i = 0; i < spec.M; ++i)
    for (int j = 0; j < spec.M; ++j) r(i, j) = fbm_cov(t[i + 1], t[j + 1], spec.hurst.value);
  return r;
}

FbmSampler::FbmSampler(const FbmSpec& spec) : spec_(spec), gram_(increment_gram(spec)) {
  chol_ = cholesky_lower(gram_, "the increment Gram");
}

void FbmSampler::increments(std::uint64_t seed, std::uint64_t index, Eigen::MatrixXd& out) const {
  const int M = spec_.M, d = spec_.dim;
  RandomStream rng(seed, index);
  Eigen::MatrixXd z(M, d);
  for (int i = 0; i < d; ++i)
    for (int p = 0; p < M; ++p) z(p, i) = rng.normal();
  out.noalias() = chol_.triangularView<Eigen::Lower>() * z;
}

GridPath FbmSampler::path(std::uint64_t seed, std::uint64_t index) const {
  Eigen::MatrixXd inc;
  increments(seed, index, inc);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(spec_.M + 1, spec_.dim);
  for (int p = 0; p < spec_.M; ++p) v.row(p + 1) = v.row(p) + inc.row(p);
  return GridPath(spec_.times(), std::move(v));
}

std::vector<GridPath> sample_fbm(const FbmSpec& spec, int n_paths, std::uint64_t seed, int workers) {
  require(n_paths >= 1, kModule, "need at least one path");
  FbmSampler sampler(spec);
  std::vector<GridPath> out(n_paths);
  for_chunks(n_paths, 256, workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = sampler.path(seed, i);
  });
  return out;
}

CMElement::CMElement(Hurst h, std::vector<double> k, Eigen::MatrixXd c)
    : hurst(h), knots(std::move(k)), coeffs(std::move(c)) {
  require(static_cast<Eigen::Index>(knots.size()) == coeffs.cols(), kModule, "knots and coefficients disagree");
}

CMElement CMElement::zero(Hurst h, int d, std::vector<double> knots) {
  const auto K = static_cast<Eigen::Index>(knots.size());
  return CMElement(h, std::move(knots), Eigen::MatrixXd::Zero(d, K));
}

Eigen::VectorXd CMElement::eval(double t) const {
  Eigen::VectorXd r(knots.size());
  for (std::size_t k = 0; k < knots.size(); ++k) r[k] = fbm_cov(knots[k], t, hurst.value);
  return coeffs * r;
}

GridPath CMElement::render(const std::vector<double>& grid) const {
  Eigen::MatrixXd v(grid.size(), dim());
  for (std::size_t j = 0; j < grid.size(); ++j) v.row(j) = eval(grid[j]).transpose();
  return GridPath(grid, std::move(v));
}

Eigen::MatrixXd CMElement::gram() const {
  const auto K = knots.size();
  Eigen::MatrixXd g(K, K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) g(k, l) = fbm_cov(knots[k], knots[l], hurst.value);
  return g;
}

double cm_inner(const CMElement& a, const CMElement& b) {
  require(a.dim() == b.dim(), kModule, "dimension mismatch");
  Eigen::MatrixXd r(a.knots.size(), b.knots.size());
  for (std::size_t k = 0; k < a.knots.size(); ++k)
    for (std::size_t l = 0; l < b.knots.size(); ++l) r(k, l) = fbm_cov(a.knots[k], b.knots[l], a.hurst.value);
  return (a.coeffs * r * b.coeffs.transpose()).trace();
}

double cm_norm_sq(const CMElement& gamma) {
  Eigen::MatrixXd g = gamma.gram();
  g.diagonal().array() += 1e-12;
  return (gamma.coeffs * g * gamma.coeffs.transpose()).trace();
}

double htilde_inner(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, const Eigen::MatrixXd& gram) {
  require(f.rows() == gram.rows() && g.rows() == gram.rows() && f.cols() == g.cols(), kModule,
          "step functions must match the Gram size");
  return (f.transpose() * gram * g).trace();
}

double paley_wiener(const CMElement& gamma, const GridPath& w) {
  require(gamma.dim() == w.dim(), kModule, "dimension mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < gamma.knots.size(); ++k) {
    const int j = grid_index(w.times, gamma.knots[k]);
    if (j < 0) fail(ErrorKind::kInvalidArgument, kModule, "knot is not a point of the path grid");
    acc += gamma.coeffs.col(k).dot(w.values.row(j).transpose());
  }
  return acc;
}

VolterraReport volterra_checks(const Hurst& H, int M) {
  FbmSpec spec(H, 1, M);
  const Eigen::MatrixXd r = grid_covariance(spec);
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::kNumericalDegeneracy, kModule, "grid covariance is not positive definite");
  VolterraReport rep;
  rep.kernel = llt.matrixL();
  const Eigen::MatrixXd back = rep.kernel * rep.kernel.transpose();
  rep.reconstruction_residual = (back - r).cwiseAbs().maxCoeff();
  // The induced map z -> L z sends white noise to the grid law; L^{-1} R L^{-T} = I.
  const Eigen::MatrixXd linv = rep.kernel.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(M, M));
  rep.unitarity_residual = (linv * r * linv.transpose() - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff();
  rep.corner = back(M - 1, M - 1);
  return rep;
}

void write_paths_csv(const std::string& file, const std::vector<GridPath>& paths) {
  std::ofstream os(file);
  if (!os) fail(ErrorKind::kInvalidArgument, kModule, "cannot open " + file);
  os << std::setprecision(17) << "t";
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (int i = 0; i < paths[p].dim(); ++i) os << ",p" << p << "_" << i;
  os << "\n";
  if (paths.empty()) return;
  for (std::size_t k = 0; k < paths[0].times.size(); ++k) {
    os << paths[0].times[k];
    for (const auto& p : paths)
      for (int i = 0; i < p.dim(); ++i) os << "," << p.values(k, i);
    os << "\n";
  }
}

}  // namespace roughheat
