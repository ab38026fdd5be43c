#include "roughheat/tensor_sig.hpp"

#include <algorithm>
#include <cmath>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "tensor_sig";

void check_depth(int depth) {
  if (depth < 1 || depth > 3) fail(ErrorKind::kInvalidArgument, kModule, "depth must be 1, 2 or 3");
}

void check_same(const TruncatedSignature& a, const TruncatedSignature& b) {
  if (a.dim() != b.dim() || a.depth() != b.depth())
    fail(ErrorKind::kInvalidArgument, kModule, "dimension or depth mismatch");
}

std::size_t total_size(int d, int depth) {
  std::size_t n = 0, p = 1;
  for (int k = 1; k <= depth; ++k) n += (p *= d);
  return n;
}
}  // namespace

TruncatedSignature::TruncatedSignature(int dim, int depth) : dim_(dim), depth_(depth) {
  check_depth(depth);
  require(dim > 0, kModule, "dimension must be positive");
  data_.assign(total_size(dim, depth), 0.0);
}

std::size_t TruncatedSignature::level_offset(int dim, int k) { return total_size(dim, k - 1); }

std::span<double> TruncatedSignature::level(int k) {
  require(k >= 1 && k <= depth_, kModule, "level out of range");
  const std::size_t off = level_offset(dim_, k), len = total_size(dim_, k) - off;
  return {data_.data() + off, len};
}

std::span<const double> TruncatedSignature::level(int k) const {
  require(k >= 1 && k <= depth_, kModule, "level out of range");
  const std::size_t off = level_offset(dim_, k), len = total_size(dim_, k) - off;
  return {data_.data() + off, len};
}

Eigen::VectorXd TruncatedSignature::level1() const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data(), dim_);
}

Eigen::MatrixXd TruncatedSignature::level2() const {
  require(depth_ >= 2, kModule, "no level 2");
  Eigen::MatrixXd m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = at(i, j);
  return m;
}

TruncatedSignature identity_signature(int dim, int depth) { return TruncatedSignature(dim, depth); }

TruncatedSignature segment_signature(const Eigen::VectorXd& delta, int depth) {
  check_depth(depth);
  const int d = static_cast<int>(delta.size());
  TruncatedSignature s(d, depth);
  for (int i = 0; i < d; ++i) s.at(i) = delta[i];
  if (depth >= 2)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s.at(i, j) = delta[i] * delta[j] / 2.0;
  if (depth >= 3)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) s.at(i, j, k) = delta[i] * delta[j] * delta[k] / 6.0;
  return s;
}

TruncatedSignature mul_nilpotent(const TruncatedSignature& a, const TruncatedSignature& b) {
  check_same(a, b);
  const int d = a.dim();
  TruncatedSignature out(d, a.depth());
  if (a.depth() >= 2)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.at(i, j) = a.at(i) * b.at(j);
  if (a.depth() >= 3)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) out.at(i, j, k) = a.at(i) * b.at(j, k) + a.at(i, j) * b.at(k);
  return out;
}

TruncatedSignature operator+(const TruncatedSignature& a, const TruncatedSignature& b) {
  check_same(a, b);
  TruncatedSignature out = a;
  auto o = out.flat();
  auto bf = b.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bf[i];
  return out;
}

TruncatedSignature operator-(const TruncatedSignature& a, const TruncatedSignature& b) {
  return a + (-1.0) * b;
}

TruncatedSignature operator*(double c, const TruncatedSignature& a) {
  TruncatedSignature out = a;
  for (auto& v : out.flat()) v *= c;
  return out;
}

TruncatedSignature chen_mul(const TruncatedSignature& a, const TruncatedSignature& b) {
  check_same(a, b);
  return a + b + mul_nilpotent(a, b);
}

TruncatedSignature dilate_sig(const TruncatedSignature& s, double c) {
  TruncatedSignature out = s;
  double f = 1.0;
  for (int k = 1; k <= s.depth(); ++k) {
    f *= c;
    for (auto& v : out.level(k)) v *= f;
  }
  return out;
}

TruncatedSignature inverse(const TruncatedSignature& s) {
  // (1+x)^{-1} = 1 - x + x^2 - x^3
  const auto x2 = mul_nilpotent(s, s);
  const auto x3 = mul_nilpotent(x2, s);
  return (-1.0) * s + x2 - x3;
}

TruncatedSignature sig_log(const TruncatedSignature& s) {
  const auto x2 = mul_nilpotent(s, s);
  const auto x3 = mul_nilpotent(x2, s);
  return s - 0.5 * x2 + (1.0 / 3.0) * x3;
}

TruncatedSignature sig_exp(const TruncatedSignature& lie) {
  const auto l2 = mul_nilpotent(lie, lie);
  const auto l3 = mul_nilpotent(l2, lie);
  return lie + 0.5 * l2 + (1.0 / 6.0) * l3;
}

TruncatedSignature sig_exp_derivative(const TruncatedSignature& lie, const TruncatedSignature& dir) {
  const auto el = mul_nilpotent(dir, lie);
  const auto le = mul_nilpotent(lie, dir);
  auto out = dir + 0.5 * (el + le);
  if (lie.depth() >= 3) {
    const auto t = mul_nilpotent(el, lie) + mul_nilpotent(le, lie) + mul_nilpotent(mul_nilpotent(lie, lie), dir);
    out = out + (1.0 / 6.0) * t;
  }
  return out;
}

double level_norm(const TruncatedSignature& s, int k) {
  double acc = 0;
  for (double v : s.level(k)) acc += v * v;
  return std::sqrt(acc);
}

double max_abs_diff(const TruncatedSignature& a, const TruncatedSignature& b) {
  check_same(a, b);
  double m = 0;
  auto af = a.flat(), bf = b.flat();
  for (std::size_t i = 0; i < af.size(); ++i) m = std::max(m, std::abs(af[i] - bf[i]));
  return m;
}

TruncatedSignature embed_lie(const TruncatedSignature& lie, int new_dim, const std::vector<int>& idx) {
  const int d = lie.dim();
  require(static_cast<int>(idx.size()) == d, kModule, "embedding size mismatch");
  TruncatedSignature out(new_dim, lie.depth());
  for (int i = 0; i < d; ++i) out.at(idx[i]) = lie.at(i);
  if (lie.depth() >= 2)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.at(idx[i], idx[j]) = lie.at(i, j);
  if (lie.depth() >= 3)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) out.at(idx[i], idx[j], idx[k]) = lie.at(i, j, k);
  return out;
}

}  // namespace roughheat
