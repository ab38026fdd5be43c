#pragma once

#include <boost/container/small_vector.hpp>
#include <vector>

namespace roughheat {

struct SeriesVar {
  double weight;
  int max_degree;
};

/// Monomial basis of a truncated multivariate power series ring. A monomial is
/// kept when every exponent is within its variable's max degree and the
/// weighted degree does not exceed the cap.
class SeriesSpace {
 public:
  struct Product {
    int lhs, rhs, out;
  };

  SeriesSpace(std::vector<SeriesVar> vars, double weight_cap);

  int size() const { return static_cast<int>(exps_.size()); }
  int nvars() const { return static_cast<int>(vars_.size()); }
  const std::vector<int>& exponents(int m) const { return exps_[m]; }
  double weight(int m) const { return weights_[m]; }
  int total_degree(int m) const { return degrees_[m]; }
  int max_total_degree() const { return max_degree_; }
  /// -1 when the monomial is truncated away.
  int index_of(const std::vector<int>& exps) const;
  const std::vector<Product>& products() const { return products_; }
  /// For each monomial m, the index of m / var (or -1 when var does not divide m).
  const std::vector<int>& quotient_map(int var) const { return quotients_[var]; }
  /// For each monomial m, the index of m * var (or -1).
  const std::vector<int>& shift_map(int var) const { return shifts_[var]; }

 private:
  std::vector<SeriesVar> vars_;
  double cap_;
  std::vector<std::vector<int>> exps_;
  std::vector<double> weights_;
  std::vector<int> degrees_;
  int max_degree_ = 0;
  std::vector<Product> products_;
  std::vector<std::vector<int>> quotients_;
  std::vector<std::vector<int>> shifts_;
};

class Series {
 public:
  using Storage = boost::container::small_vector<double, 16>;

  Series() = default;
  explicit Series(const SeriesSpace* space, double constant = 0.0);
  static Series variable(const SeriesSpace* space, int var, double scale = 1.0);

  const SeriesSpace* space() const { return space_; }
  double constant() const { return c_.empty() ? 0.0 : c_[0]; }
  double operator[](int m) const { return c_[m]; }
  double& operator[](int m) { return c_[m]; }
  int size() const { return static_cast<int>(c_.size()); }

  Series& operator+=(const Series& o);
  Series& operator-=(const Series& o);
  Series& operator*=(double s);
  Series& operator+=(double s);
  /// this += a * b without temporaries
  void add_product(const Series& a, const Series& b, double scale = 1.0);

  /// Coefficient of `var` (degree one) as a series in the remaining variables.
  Series partial(int var) const;
  /// Multiply by the variable `var`.
  Series times_var(int var) const;

 private:
  const SeriesSpace* space_ = nullptr;
  Storage c_;
};

Series operator+(Series a, const Series& b);
Series operator-(Series a, const Series& b);
Series operator-(const Series& a);
Series operator*(const Series& a, const Series& b);
Series operator*(Series a, double s);
Series operator*(double s, Series a);
Series operator+(Series a, double s);
Series operator+(double s, Series a);
Series operator-(Series a, double s);
Series operator-(double s, const Series& a);
Series pow(const Series& a, int k);

using SeriesVec = std::vector<Series>;

}  // namespace roughheat
