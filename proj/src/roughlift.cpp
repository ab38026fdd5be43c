#include "roughheat/roughlift.hpp"

#include <atomic>
#include <numeric>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "roughlift";
std::atomic<bool> g_chen_fault{false};

TruncatedSignature fold(const std::vector<TruncatedSignature>& parts) {
  TruncatedSignature acc = identity_signature(parts.front().dim(), parts.front().depth());
  for (const auto& p : parts) acc = chen_mul(acc, p);
  return acc;
}
}  // namespace

void set_chen_fault(bool on) { g_chen_fault = on; }
bool chen_fault() { return g_chen_fault; }

RoughPathGrid::RoughPathGrid(std::vector<double> times, std::vector<TruncatedSignature> cells)
    : times_(std::move(times)), cells_(std::move(cells)) {
  require(!cells_.empty() && times_.size() == cells_.size() + 1, kModule, "cells and grid disagree");
  dim_ = cells_.front().dim();
  depth_ = cells_.front().depth();
  prefixes_.reserve(cells_.size() + 1);
  prefixes_.push_back(identity_signature(dim_, depth_));
  for (const auto& c : cells_) prefixes_.push_back(chen_mul(prefixes_.back(), c));
  if (g_chen_fault && depth_ >= 2)
    for (std::size_t k = 1; k < prefixes_.size(); ++k)
      for (auto& v : prefixes_[k].level(2)) v += 1e-6;
}

TruncatedSignature RoughPathGrid::increment(int j, int k) const {
  require(0 <= j && j <= k && k <= cells_count(), kModule, "increment indices out of range");
  return chen_mul(inverse(prefixes_[j]), prefixes_[k]);
}

RoughPathGrid lift_grid_path(const GridPath& x, int depth) {
  require(depth == 2 || depth == 3, kModule, "lift depth must be 2 or 3");
  std::vector<TruncatedSignature> cells;
  cells.reserve(x.cells());
  for (int k = 0; k < x.cells(); ++k) cells.push_back(segment_signature(x.increment(k), depth));
  return RoughPathGrid(x.times, std::move(cells));
}

RoughPathGrid dilate(const RoughPathGrid& x, double c) {
  std::vector<TruncatedSignature> cells;
  cells.reserve(x.cells_count());
  for (const auto& s : x.cells()) cells.push_back(dilate_sig(s, c));
  return RoughPathGrid(x.times(), std::move(cells));
}

RoughPathGrid pair_with_time(const RoughPathGrid& x, double c) {
  const int d = x.dim();
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<TruncatedSignature> cells;
  cells.reserve(x.cells_count());
  for (int k = 0; k < x.cells_count(); ++k) {
    auto lie = embed_lie(sig_log(x.cell(k)), d + 1, idx);
    lie.at(d) = c * (x.times()[k + 1] - x.times()[k]);
    cells.push_back(sig_exp(lie));
  }
  return RoughPathGrid(x.times(), std::move(cells));
}

RoughPathGrid joint_with_path(const RoughPathGrid& x, const GridPath& gamma, int refine) {
  require(x.times() == gamma.times, kModule, "gamma must live on the rough path grid");
  require(x.dim() == gamma.dim(), kModule, "gamma dimension mismatch");
  require(refine >= 1, kModule, "refine must be positive");
  const int d = x.dim();
  std::vector<int> xi(d), gi(d);
  std::iota(xi.begin(), xi.end(), 0);
  std::iota(gi.begin(), gi.end(), d);
  std::vector<TruncatedSignature> cells;
  cells.reserve(x.cells_count());
  for (int k = 0; k < x.cells_count(); ++k) {
    auto lie = embed_lie(sig_log(x.cell(k)), 2 * d, xi);
    const Eigen::VectorXd dg = gamma.increment(k);
    for (int i = 0; i < d; ++i) lie.at(gi[i]) = dg[i];
    const auto sub = sig_exp((1.0 / refine) * lie);
    std::vector<TruncatedSignature> parts(refine, sub);
    cells.push_back(refine == 1 ? sub : fold(parts));
  }
  return RoughPathGrid(x.times(), std::move(cells));
}

RoughPathGrid young_translate(const RoughPathGrid& x, const GridPath& gamma, int refine) {
  const int d = x.dim();
  const auto joint = joint_with_path(x, gamma, refine);
  // project R^{2d} -> R^d, (u, v) -> u + v
  std::vector<TruncatedSignature> cells;
  cells.reserve(x.cells_count());
  for (const auto& jc : joint.cells()) {
    TruncatedSignature s(d, jc.depth());
    const int D = 2 * d;
    for (int a = 0; a < D; ++a) s.at(a % d) += jc.at(a);
    if (jc.depth() >= 2)
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) s.at(a % d, b % d) += jc.at(a, b);
    if (jc.depth() >= 3)
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          for (int c = 0; c < D; ++c) s.at(a % d, b % d, c % d) += jc.at(a, b, c);
    cells.push_back(std::move(s));
  }
  return RoughPathGrid(x.times(), std::move(cells));
}

YoungTerms young_terms(const RoughPathGrid& x, const GridPath& gamma, int refine) {
  require(x.depth() == 3, kModule, "young_terms needs a depth-3 rough path");
  const int d = x.dim();
  const auto joint = joint_with_path(x, gamma, refine);
  const auto& S = joint.prefix(joint.cells_count());
  YoungTerms t;
  t.A1.resize(d, d);
  t.A2.resize(d, d);
  const std::size_t n3 = static_cast<std::size_t>(d) * d * d;
  for (auto* v : {&t.B1, &t.B2, &t.B3, &t.C1, &t.C2, &t.C3}) v->assign(n3, 0.0);
  t.x_sig = TruncatedSignature(d, 3);
  t.gamma_sig = TruncatedSignature(d, 3);
  for (int i = 0; i < d; ++i) {
    t.x_sig.at(i) = S.at(i);
    t.gamma_sig.at(i) = S.at(d + i);
    for (int j = 0; j < d; ++j) {
      t.A1(i, j) = S.at(i, d + j);
      t.A2(i, j) = S.at(d + i, j);
      t.x_sig.at(i, j) = S.at(i, j);
      t.gamma_sig.at(i, j) = S.at(d + i, d + j);
      for (int k = 0; k < d; ++k) {
        const std::size_t o = (static_cast<std::size_t>(i) * d + j) * d + k;
        t.B1[o] = S.at(i, j, d + k);
        t.B2[o] = S.at(i, d + j, k);
        t.B3[o] = S.at(d + i, j, k);
        t.C1[o] = S.at(i, d + j, d + k);
        t.C2[o] = S.at(d + i, j, d + k);
        t.C3[o] = S.at(d + i, d + j, k);
        t.x_sig.at(i, j, k) = S.at(i, j, k);
        t.gamma_sig.at(i, j, k) = S.at(d + i, d + j, d + k);
      }
    }
  }
  return t;
}

}  // namespace roughheat
