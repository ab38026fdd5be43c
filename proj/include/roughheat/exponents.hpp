#pragma once

#include <string>
#include <vector>

#include "roughheat/fgauss.hpp"

namespace roughheat {

/// Exponent u + v/H carried as an integer pair.
struct Exponent {
  long u = 0;
  long v = 0;
  double value = 0.0;
};

enum class IndexSet { kL1, kL2, kL2Prime, kL3, kL3Prime, kL4 };

IndexSet parse_index_set(const std::string& name);
std::string to_string(IndexSet s);

/// Arithmetic on exponents for a fixed H: exact when H is rational.
class ExponentField {
 public:
  explicit ExponentField(Hurst h) : h_(h) {}
  const Hurst& hurst() const { return h_; }
  Exponent make(long u, long v) const;
  Exponent add(const Exponent& a, const Exponent& b) const { return make(a.u + b.u, a.v + b.v); }
  /// -1, 0, 1
  int compare(const Exponent& a, const Exponent& b) const;
  bool equal(const Exponent& a, const Exponent& b) const { return compare(a, b) == 0; }
  bool within(const Exponent& a, double cutoff) const;

 private:
  Hurst h_;
};

std::vector<Exponent> enumerate_exponents(const Hurst& h, IndexSet which, double cutoff);
/// Exact rational string when possible ("10/3"), decimal otherwise.
std::string format_exponent(const Hurst& h, const Exponent& e);

}  // namespace roughheat
