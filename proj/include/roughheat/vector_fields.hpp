#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "roughheat/series.hpp"

namespace roughheat {

/// Coefficient fields V_0 (drift) and V_1..V_d on R^n. Field index 0 is the drift.
/// Derivative tensors: jac(a,b) = dV^a/dy^b, hess[(a*n+b)*n+c], third[((a*n+b)*n+c)*n+e].
class VectorFieldSystem {
 public:
  VectorFieldSystem(int n, int d, bool drift) : n_(n), d_(d), drift_(drift) {}
  virtual ~VectorFieldSystem() = default;

  int n() const { return n_; }
  int d() const { return d_; }
  bool has_drift() const { return drift_; }
  virtual std::string name() const = 0;
  /// Highest derivative order available without finite differences.
  virtual int derivative_order() const = 0;

  virtual void eval(int i, const Eigen::VectorXd& y, Eigen::VectorXd& out) const = 0;
  /// Series evaluation; the default expands in a Taylor polynomial of order 3.
  virtual void eval(int i, const SeriesVec& y, SeriesVec& out) const;
  virtual Eigen::MatrixXd jacobian(int i, const Eigen::VectorXd& y) const;
  virtual std::vector<double> hessian(int i, const Eigen::VectorXd& y) const;
  virtual std::vector<double> third(int i, const Eigen::VectorXd& y) const;

  Eigen::VectorXd operator()(int i, const Eigen::VectorXd& y) const {
    Eigen::VectorXd out;
    eval(i, y, out);
    return out;
  }
  /// sigma(y) = [V_1 ... V_d], n x d.
  Eigen::MatrixXd sigma(const Eigen::VectorXd& y) const;

 protected:
  int n_, d_;
  bool drift_;
};

/// Central finite-difference derivatives with step h.
Eigen::MatrixXd fd_jacobian(const VectorFieldSystem& vf, int i, const Eigen::VectorXd& y, double h = 1e-5);
std::vector<double> fd_hessian(const VectorFieldSystem& vf, int i, const Eigen::VectorXd& y, double h = 1e-5);
std::vector<double> fd_third(const VectorFieldSystem& vf, int i, const Eigen::VectorXd& y, double h = 1e-5);

/// Polynomial in n variables: sum of coeff * prod y_j^{e_j}.
struct Polynomial {
  struct Term {
    double coeff;
    std::vector<int> exps;
  };
  int n = 0;
  std::vector<Term> terms;

  double eval(const Eigen::VectorXd& y) const;
  Series eval(const SeriesVec& y) const;
  Polynomial derivative(int var) const;
  bool is_zero() const { return terms.empty(); }
  void simplify();
};

/// Fields with polynomial components; all derivatives are exact.
class PolynomialField : public VectorFieldSystem {
 public:
  /// fields[i][a] = component a of V_i, i = 0..d (index 0 is the drift).
  PolynomialField(std::string name, int n, int d, std::vector<std::vector<Polynomial>> fields);

  std::string name() const override { return name_; }
  int derivative_order() const override { return 1 << 20; }
  void eval(int i, const Eigen::VectorXd& y, Eigen::VectorXd& out) const override;
  void eval(int i, const SeriesVec& y, SeriesVec& out) const override;
  Eigen::MatrixXd jacobian(int i, const Eigen::VectorXd& y) const override;
  std::vector<double> hessian(int i, const Eigen::VectorXd& y) const override;
  std::vector<double> third(int i, const Eigen::VectorXd& y) const override;

 private:
  std::string name_;
  std::vector<std::vector<Polynomial>> f_;
  std::vector<std::vector<std::vector<Polynomial>>> df_;    // [i][a][b]
  std::vector<std::vector<std::vector<Polynomial>>> d2f_;   // [i][a][b*n+c]
  std::vector<std::vector<std::vector<Polynomial>>> d3f_;   // [i][a][(b*n+c)*n+e]
};

/// Fields given only as double callbacks; derivatives by finite differences.
class FdField : public VectorFieldSystem {
 public:
  using Fn = std::function<Eigen::VectorXd(int, const Eigen::VectorXd&)>;
  FdField(std::string name, int n, int d, bool drift, Fn fn);

  std::string name() const override { return name_; }
  int derivative_order() const override { return 3; }
  void eval(int i, const Eigen::VectorXd& y, Eigen::VectorXd& out) const override { out = fn_(i, y); }

 private:
  std::string name_;
  Fn fn_;
};

/// Parse "y1*y2^2 - 3.5*y3 + 2" style polynomials in variables y1..yn.
Polynomial parse_polynomial(const std::string& text, int n);
/// Model file: lines "n = 3", "d = 2", "V0 = p1 ; p2 ; ...", "V1 = ...". Missing V0 means no drift.
std::shared_ptr<PolynomialField> load_polynomial_field(const std::string& path);
std::shared_ptr<PolynomialField> parse_polynomial_field(const std::string& text, const std::string& name);

std::shared_ptr<PolynomialField> make_heisenberg();
std::shared_ptr<PolynomialField> make_lognormal(double sigma, double mu = 0.0, bool drift = false);
std::shared_ptr<PolynomialField> make_bridge1d();
/// sigma = identity on R^n, no drift.
std::shared_ptr<PolynomialField> make_elliptic(int n);
std::shared_ptr<PolynomialField> make_zero_field(int n, int d);

}  // namespace roughheat
