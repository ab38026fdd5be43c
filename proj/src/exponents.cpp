#include "roughheat/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "asymptotics";
constexpr double kTol = 1e-9;

void sort_unique(const ExponentField& f, std::vector<Exponent>& xs) {
  std::stable_sort(xs.begin(), xs.end(), [&](const Exponent& a, const Exponent& b) { return f.compare(a, b) < 0; });
  std::vector<Exponent> out;
  for (const auto& x : xs)
    if (out.empty() || !f.equal(out.back(), x)) out.push_back(x);
  xs = std::move(out);
}

std::vector<Exponent> lambda1(const ExponentField& f, double cutoff) {
  std::vector<Exponent> out;
  for (long v = 0;; ++v) {
    if (!f.within(f.make(0, v), cutoff)) break;
    for (long u = 0;; ++u) {
      const auto e = f.make(u, v);
      if (!f.within(e, cutoff)) break;
      out.push_back(e);
    }
  }
  sort_unique(f, out);
  return out;
}

std::vector<Exponent> closure(const ExponentField& f, const std::vector<Exponent>& gens, double cutoff) {
  std::vector<Exponent> set = gens;
  sort_unique(f, set);
  std::vector<Exponent> frontier = set;
  while (!frontier.empty()) {
    std::vector<Exponent> next;
    for (const auto& a : frontier)
      for (const auto& g : gens) {
        const auto s = f.add(a, g);
        if (!f.within(s, cutoff)) continue;
        const bool seen = std::any_of(set.begin(), set.end(), [&](const Exponent& e) { return f.equal(e, s); }) ||
                          std::any_of(next.begin(), next.end(), [&](const Exponent& e) { return f.equal(e, s); });
        if (!seen) next.push_back(s);
      }
    set.insert(set.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  sort_unique(f, set);
  return set;
}
}  // namespace

IndexSet parse_index_set(const std::string& name) {
  if (name == "L1") return IndexSet::kL1;
  if (name == "L2") return IndexSet::kL2;
  if (name == "L2p" || name == "L2'") return IndexSet::kL2Prime;
  if (name == "L3") return IndexSet::kL3;
  if (name == "L3p" || name == "L3'") return IndexSet::kL3Prime;
  if (name == "L4") return IndexSet::kL4;
  fail(ErrorKind::kConfig, kModule, "unknown index set '" + name + "' (use L1, L2, L2p, L3, L3p, L4)");
}

std::string to_string(IndexSet s) {
  switch (s) {
    case IndexSet::kL1: return "L1";
    case IndexSet::kL2: return "L2";
    case IndexSet::kL2Prime: return "L2p";
    case IndexSet::kL3: return "L3";
    case IndexSet::kL3Prime: return "L3p";
    case IndexSet::kL4: return "L4";
  }
  return "?";
}

Exponent ExponentField::make(long u, long v) const { return {u, v, u + v * h_.inverse()}; }

int ExponentField::compare(const Exponent& a, const Exponent& b) const {
  if (h_.rational) {
    // value * p = u p + v q
    const long p = h_.rational->first, q = h_.rational->second;
    const long x = a.u * p + a.v * q, y = b.u * p + b.v * q;
    return (x > y) - (x < y);
  }
  if (std::abs(a.value - b.value) <= kTol) return 0;
  return a.value < b.value ? -1 : 1;
}

bool ExponentField::within(const Exponent& a, double cutoff) const { return a.value <= cutoff + kTol; }

std::vector<Exponent> enumerate_exponents(const Hurst& h, IndexSet which, double cutoff) {
  require(cutoff > 0, kModule, "cutoff must be positive");
  const ExponentField f(h);
  // generators can exceed the cutoff before shifting, so enumerate Lambda_1 a little further
  const auto l1 = lambda1(f, cutoff + 2.0);
  std::vector<Exponent> l2, l2p;
  for (std::size_t i = 1; i < l1.size(); ++i) {
    const auto e = f.make(l1[i].u - 1, l1[i].v);
    if (f.within(e, cutoff)) l2.push_back(e);
  }
  for (std::size_t i = 2; i < l1.size(); ++i) {
    const auto e = f.make(l1[i].u - 2, l1[i].v);
    if (f.within(e, cutoff)) l2p.push_back(e);
  }
  sort_unique(f, l2);
  sort_unique(f, l2p);
  std::vector<Exponent> out;
  switch (which) {
    case IndexSet::kL1:
      for (const auto& e : l1)
        if (f.within(e, cutoff)) out.push_back(e);
      break;
    case IndexSet::kL2: out = l2; break;
    case IndexSet::kL2Prime: out = l2p; break;
    case IndexSet::kL3: out = closure(f, l2, cutoff); break;
    case IndexSet::kL3Prime: out = closure(f, l2p, cutoff); break;
    case IndexSet::kL4: {
      const auto a = closure(f, l2, cutoff), b = closure(f, l2p, cutoff);
      for (const auto& x : a)
        for (const auto& y : b) {
          const auto s = f.add(x, y);
          if (f.within(s, cutoff)) out.push_back(s);
        }
      sort_unique(f, out);
      break;
    }
  }
  return out;
}

std::string format_exponent(const Hurst& h, const Exponent& e) {
  if (h.rational) {
    const long p = h.rational->first, q = h.rational->second;
    long num = e.u * p + e.v * q, den = p;
    const long g = std::gcd(std::abs(num), den);
    num /= g;
    den /= g;
    if (den == 1) return std::to_string(num);
    // terminating decimals print as decimals (5/2 -> 2.5), others as fractions
    long d = den;
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    if (d == 1) {
      std::ostringstream os;
      os << static_cast<double>(num) / den;
      return os.str();
    }
    return std::to_string(num) + "/" + std::to_string(den);
  }
  std::ostringstream os;
  os.precision(12);
  os << e.value;
  return os.str();
}

}  // namespace roughheat
