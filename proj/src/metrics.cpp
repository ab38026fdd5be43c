#include "roughheat/metrics.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "metrics";

int grid_point(const RoughPathGrid& x, double t) {
  const int k = grid_index(x.times(), t);
  if (k < 0) fail(ErrorKind::kInvalidArgument, kModule, "interval endpoint is not a grid point");
  return k;
}

// norms[j][k] = |x^level_{t_j,t_k}| for lo <= j < k <= hi, via running products.
std::vector<double> increment_norms(const RoughPathGrid& x, int level, int lo, int hi) {
  const int n = hi - lo + 1;
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = lo; j < hi; ++j) {
    TruncatedSignature acc = identity_signature(x.dim(), x.depth());
    for (int k = j + 1; k <= hi; ++k) {
      acc = chen_mul(acc, x.cell(k - 1));
      out[static_cast<std::size_t>(j - lo) * n + (k - lo)] = level_norm(acc, level);
    }
  }
  return out;
}

// best[k] = sup over partitions of [t_lo, t_k] of sum |x_{u,v}|^q
std::vector<double> pvar_dp(const std::vector<double>& norms, int n, int start, double q) {
  std::vector<double> best(n, 0.0);
  for (int k = start + 1; k < n; ++k) {
    double b = 0.0;
    for (int j = start; j < k; ++j)
      b = std::max(b, best[j] + std::pow(norms[static_cast<std::size_t>(j) * n + k], q));
    best[k] = b;
  }
  return best;
}

TruncatedSignature partial_cell(const TruncatedSignature& cell, double theta) {
  if (theta <= 0.0) return identity_signature(cell.dim(), cell.depth());
  if (theta >= 1.0) return cell;
  return sig_exp(theta * sig_log(cell));
}
}  // namespace

double pvar_norm(const RoughPathGrid& x, int level, double p, double s, double t) {
  require(level >= 1 && level <= x.depth(), kModule, "level out of range");
  const double q = p / level;
  require(q >= 1.0, kModule, "p/level must be at least 1");
  const int lo = grid_point(x, s), hi = grid_point(x, t);
  require(lo <= hi, kModule, "interval reversed");
  if (lo == hi) return 0.0;
  const int n = hi - lo + 1;
  const auto norms = increment_norms(x, level, lo, hi);
  const auto best = pvar_dp(norms, n, 0, q);
  return std::pow(best[n - 1], 1.0 / q);
}

double holder_norm(const RoughPathGrid& x, int level, double alpha) {
  require(level >= 1 && level <= x.depth(), kModule, "level out of range");
  require(alpha * level > 0 && alpha * level <= 1.0, kModule, "need 0 < level*alpha <= 1");
  const int M = x.cells_count();
  const auto norms = increment_norms(x, level, 0, M);
  const auto& t = x.times();
  double best = 0.0;
  for (int j = 0; j < M; ++j)
    for (int k = j + 1; k <= M; ++k)
      best = std::max(best, norms[static_cast<std::size_t>(j) * (M + 1) + k] /
                                std::pow(t[k] - t[j], level * alpha));
  return best;
}

double besov_norm_at(const RoughPathGrid& x, int level, double alpha, double m, int refine) {
  require(level >= 1 && level <= x.depth(), kModule, "level out of range");
  const double q = m / level;
  require(q >= 1.0, kModule, "m/level must be at least 1");
  require(alpha > 0 && alpha < 1, kModule, "alpha must lie in (0,1)");
  const int M = x.cells_count();
  const auto& times = x.times();
  const double expo = 1.0 + alpha * m;
  boost::math::quadrature::tanh_sinh<double> integrator;

  // Sub-cells: (cell, theta_lo, theta_hi).
  struct Sub {
    int cell;
    double lo, hi;
  };
  std::vector<Sub> subs;
  for (int k = 0; k < M; ++k)
    for (int r = 0; r < refine; ++r)
      subs.push_back({k, static_cast<double>(r) / refine, static_cast<double>(r + 1) / refine});

  double total = 0.0;
  for (std::size_t a = 0; a < subs.size(); ++a) {
    const Sub& sa = subs[a];
    const double ha = times[sa.cell + 1] - times[sa.cell];
    const double len_a = (sa.hi - sa.lo) * ha;
    // same sub-cell: geodesic, depends on u = t - s only
    const auto L = sig_log(x.cell(sa.cell));
    auto f = [&](double u) {
      if (u <= 0) return 0.0;
      const auto s = sig_exp((u / ha) * L);
      const double num = std::pow(level_norm(s, level), q);
      // both factors underflow together near the diagonal
      if (num == 0.0) return 0.0;
      return (len_a - u) * num / std::pow(u, expo);
    };
    total += integrator.integrate(f, 0.0, len_a);

    const double theta_s = 0.5 * (sa.lo + sa.hi);
    const double s_time = times[sa.cell] + theta_s * ha;
    // tail of the s cell from s to its right end
    TruncatedSignature head = partial_cell(x.cell(sa.cell), 1.0 - theta_s);
    int cur_cell = sa.cell;
    TruncatedSignature through = head;  // signature from s to t_{cur_cell+1}
    for (std::size_t b = a + 1; b < subs.size(); ++b) {
      const Sub& sb = subs[b];
      const double hb = times[sb.cell + 1] - times[sb.cell];
      const double theta_t = 0.5 * (sb.lo + sb.hi);
      const double t_time = times[sb.cell] + theta_t * hb;
      TruncatedSignature sig;
      if (sb.cell == sa.cell) {
        sig = partial_cell(x.cell(sa.cell), theta_t - theta_s);
      } else {
        while (cur_cell + 1 < sb.cell) {
          ++cur_cell;
          through = chen_mul(through, x.cell(cur_cell));
        }
        sig = chen_mul(through, partial_cell(x.cell(sb.cell), theta_t));
      }
      const double w = len_a * (sb.hi - sb.lo) * hb;
      total += w * std::pow(level_norm(sig, level), q) / std::pow(t_time - s_time, expo);
    }
  }
  if (!std::isfinite(total)) fail(ErrorKind::kDivergence, kModule, "Besov integral is not finite");
  return std::pow(total, 1.0 / q);
}

double besov_norm(const RoughPathGrid& x, int level, double alpha, double m) {
  const double coarse = besov_norm_at(x, level, alpha, m, 1);
  const double fine = besov_norm_at(x, level, alpha, m, 2);
  if (fine > 1.1 * coarse && fine > 1e-300)
    fail(ErrorKind::kDivergence, kModule,
         "Besov integral grows under refinement (" + std::to_string(coarse) + " -> " + std::to_string(fine) + ")");
  return fine;
}

double homogeneous_pvar(const RoughPathGrid& x, double p) {
  const int top = std::min(x.depth(), static_cast<int>(std::floor(p)));
  double acc = 0.0;
  for (int i = 1; i <= top; ++i) acc += std::pow(pvar_norm(x, i, p), 1.0 / i);
  return acc;
}

ControlEvaluator::ControlEvaluator(const RoughPathGrid& x, double p, int max_level)
    : m_(x.cells_count()), p_(p), times_(x.times()) {
  int top = std::min(x.depth(), static_cast<int>(std::floor(p)));
  if (max_level > 0) top = std::min(top, max_level);
  require(top >= 1, kModule, "control needs p >= 1");
  const int n = m_ + 1;
  table_.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 1; i <= top; ++i) {
    const auto norms = increment_norms(x, i, 0, m_);
    const double q = p / i;
    for (int s = 0; s < m_; ++s) {
      const auto best = pvar_dp(norms, n, s, q);
      for (int t = s + 1; t < n; ++t) table_[static_cast<std::size_t>(s) * n + t] += best[t];
    }
  }
}

int greedy_count(const ControlEvaluator& omega, double delta) {
  require(delta > 0, kModule, "delta must be positive");
  const int M = omega.cells();
  int tau = 0, count = 0;
  for (;;) {
    int next = -1;
    for (int k = tau + 1; k <= M; ++k)
      if (omega(tau, k) >= delta * (1.0 - 1e-12)) {
        next = k;
        break;
      }
    if (next < 0 || next == M) break;
    ++count;
    tau = next;
  }
  return count;
}

int greedy_count(const RoughPathGrid& x, double p, double delta) {
  return greedy_count(ControlEvaluator(x, p), delta);
}

double besov_embedding_constant(const RoughPathGrid& x, double p, double alpha, double m) {
  const double b = besov_norm(x, 1, alpha, m);
  if (b <= 0) return 0.0;
  const int M = x.cells_count();
  const auto norms = increment_norms(x, 1, 0, M);
  const int n = M + 1;
  const auto& t = x.times();
  double c = 0.0;
  for (int s = 0; s < M; ++s) {
    const auto best = pvar_dp(norms, n, s, p);
    for (int k = s + 1; k < n; ++k)
      c = std::max(c, std::pow(best[k], 1.0 / p) / (b * std::pow(t[k] - t[s], alpha - 1.0 / m)));
  }
  return c;
}

}  // namespace roughheat
