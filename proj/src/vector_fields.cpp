#include "roughheat/vector_fields.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "vector_fields";
constexpr double kHessStep = 1e-4;
constexpr double kThirdStep = 1e-3;

std::size_t idx3(int n, int a, int b, int c) { return (static_cast<std::size_t>(a) * n + b) * n + c; }
std::size_t idx4(int n, int a, int b, int c, int e) { return idx3(n, a, b, c) * n + e; }
}  // namespace

void VectorFieldSystem::eval(int i, const SeriesVec& y, SeriesVec& out) const {
  const SeriesSpace* space = y.front().space();
  if (space->max_total_degree() > 3)
    fail(ErrorKind::kCapability, kModule,
         "series evaluation of '" + name() + "' needs derivatives beyond order 3");
  Eigen::VectorXd y0(n_);
  for (int a = 0; a < n_; ++a) y0[a] = y[a].constant();
  SeriesVec h(n_);
  for (int a = 0; a < n_; ++a) h[a] = y[a] - y0[a];
  const Eigen::VectorXd v = (*this)(i, y0);
  const Eigen::MatrixXd J = jacobian(i, y0);
  const auto H = hessian(i, y0);
  const auto T = third(i, y0);
  out.assign(n_, Series(space));
  for (int a = 0; a < n_; ++a) {
    Series acc(space, v[a]);
    for (int b = 0; b < n_; ++b) {
      acc += J(a, b) * h[b];
      for (int c = 0; c < n_; ++c) {
        const Series hbc = h[b] * h[c];
        acc += (0.5 * H[idx3(n_, a, b, c)]) * hbc;
        for (int e = 0; e < n_; ++e) acc += (T[idx4(n_, a, b, c, e)] / 6.0) * (hbc * h[e]);
      }
    }
    out[a] = std::move(acc);
  }
}

Eigen::MatrixXd VectorFieldSystem::jacobian(int i, const Eigen::VectorXd& y) const { return fd_jacobian(*this, i, y); }
std::vector<double> VectorFieldSystem::hessian(int i, const Eigen::VectorXd& y) const {
  return fd_hessian(*this, i, y, kHessStep);
}
std::vector<double> VectorFieldSystem::third(int i, const Eigen::VectorXd& y) const {
  return fd_third(*this, i, y, kThirdStep);
}

Eigen::MatrixXd VectorFieldSystem::sigma(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd s(n_, d_);
  for (int i = 1; i <= d_; ++i) s.col(i - 1) = (*this)(i, y);
  return s;
}

Eigen::MatrixXd fd_jacobian(const VectorFieldSystem& vf, int i, const Eigen::VectorXd& y, double h) {
  const int n = vf.n();
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd yp = y, ym = y;
  for (int b = 0; b < n; ++b) {
    yp[b] = y[b] + h;
    ym[b] = y[b] - h;
    J.col(b) = (vf(i, yp) - vf(i, ym)) / (2 * h);
    yp[b] = ym[b] = y[b];
  }
  return J;
}

std::vector<double> fd_hessian(const VectorFieldSystem& vf, int i, const Eigen::VectorXd& y, double h) {
  const int n = vf.n();
  std::vector<double> out(static_cast<std::size_t>(n) * n * n);
  for (int b = 0; b < n; ++b)
    for (int c = b; c < n; ++c) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      for (int sb : {-1, 1})
        for (int sc : {-1, 1}) {
          Eigen::VectorXd z = y;
          z[b] += sb * h;
          z[c] += sc * h;
          acc += (sb * sc) * vf(i, z);
        }
      acc /= 4 * h * h;
      for (int a = 0; a < n; ++a) out[idx3(n, a, b, c)] = out[idx3(n, a, c, b)] = acc[a];
    }
  return out;
}

std::vector<double> fd_third(const VectorFieldSystem& vf, int i, const Eigen::VectorXd& y, double h) {
  const int n = vf.n();
  std::vector<double> out(static_cast<std::size_t>(n) * n * n * n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c)
      for (int e = 0; e < n; ++e) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
        for (int sb : {-1, 1})
          for (int sc : {-1, 1})
            for (int se : {-1, 1}) {
              Eigen::VectorXd z = y;
              z[b] += sb * h;
              z[c] += sc * h;
              z[e] += se * h;
              acc += (sb * sc * se) * vf(i, z);
            }
        acc /= 8 * h * h * h;
        for (int a = 0; a < n; ++a) out[idx4(n, a, b, c, e)] = acc[a];
      }
  return out;
}

double Polynomial::eval(const Eigen::VectorXd& y) const {
  double acc = 0.0;
  for (const auto& t : terms) {
    double v = t.coeff;
    for (int j = 0; j < n; ++j)
      for (int e = 0; e < t.exps[j]; ++e) v *= y[j];
    acc += v;
  }
  return acc;
}

Series Polynomial::eval(const SeriesVec& y) const {
  const SeriesSpace* space = y.front().space();
  Series acc(space);
  if (terms.empty()) return acc;
  int top = 0;
  for (const auto& t : terms)
    for (int e : t.exps) top = std::max(top, e);
  std::vector<std::vector<Series>> powers(n);
  for (int j = 0; j < n; ++j) {
    bool used = false;
    for (const auto& t : terms) used = used || t.exps[j] > 0;
    if (!used) continue;
    powers[j].push_back(Series(space, 1.0));
    for (int e = 1; e <= top; ++e) powers[j].push_back(powers[j].back() * y[j]);
  }
  for (const auto& t : terms) {
    Series v(space, t.coeff);
    for (int j = 0; j < n; ++j)
      if (t.exps[j] > 0) v = v * powers[j][t.exps[j]];
    acc += v;
  }
  return acc;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial out;
  out.n = n;
  for (const auto& t : terms) {
    if (t.exps[var] == 0) continue;
    Term d = t;
    d.coeff *= t.exps[var];
    --d.exps[var];
    out.terms.push_back(std::move(d));
  }
  out.simplify();
  return out;
}

void Polynomial::simplify() {
  std::map<std::vector<int>, double> acc;
  for (const auto& t : terms) acc[t.exps] += t.coeff;
  terms.clear();
  for (const auto& [e, c] : acc)
    if (c != 0.0) terms.push_back({c, e});
}

PolynomialField::PolynomialField(std::string name, int n, int d, std::vector<std::vector<Polynomial>> fields)
    : VectorFieldSystem(n, d, false), name_(std::move(name)), f_(std::move(fields)) {
  require(static_cast<int>(f_.size()) == d + 1, kModule, "need fields V_0..V_d");
  for (auto& fi : f_) {
    require(static_cast<int>(fi.size()) == n, kModule, "field component count must equal n");
    for (auto& p : fi) {
      require(p.n == n, kModule, "polynomial variable count must equal n");
      p.simplify();
    }
  }
  for (const auto& p : f_[0]) drift_ = drift_ || !p.is_zero();
  df_.resize(d + 1);
  d2f_.resize(d + 1);
  d3f_.resize(d + 1);
  for (int i = 0; i <= d; ++i) {
    df_[i].assign(n, std::vector<Polynomial>(n));
    d2f_[i].assign(n, std::vector<Polynomial>(n * n));
    d3f_[i].assign(n, std::vector<Polynomial>(n * n * n));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        df_[i][a][b] = f_[i][a].derivative(b);
        for (int c = 0; c < n; ++c) {
          d2f_[i][a][b * n + c] = df_[i][a][b].derivative(c);
          for (int e = 0; e < n; ++e) d3f_[i][a][(b * n + c) * n + e] = d2f_[i][a][b * n + c].derivative(e);
        }
      }
  }
}

void PolynomialField::eval(int i, const Eigen::VectorXd& y, Eigen::VectorXd& out) const {
  out.resize(n_);
  for (int a = 0; a < n_; ++a) out[a] = f_[i][a].eval(y);
}

void PolynomialField::eval(int i, const SeriesVec& y, SeriesVec& out) const {
  out.resize(n_);
  for (int a = 0; a < n_; ++a) out[a] = f_[i][a].eval(y);
}

Eigen::MatrixXd PolynomialField::jacobian(int i, const Eigen::VectorXd& y) const {
  Eigen::MatrixXd J(n_, n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) J(a, b) = df_[i][a][b].eval(y);
  return J;
}

std::vector<double> PolynomialField::hessian(int i, const Eigen::VectorXd& y) const {
  std::vector<double> out(static_cast<std::size_t>(n_) * n_ * n_);
  for (int a = 0; a < n_; ++a)
    for (int bc = 0; bc < n_ * n_; ++bc) out[static_cast<std::size_t>(a) * n_ * n_ + bc] = d2f_[i][a][bc].eval(y);
  return out;
}

std::vector<double> PolynomialField::third(int i, const Eigen::VectorXd& y) const {
  const std::size_t n3 = static_cast<std::size_t>(n_) * n_ * n_;
  std::vector<double> out(n3 * n_);
  for (int a = 0; a < n_; ++a)
    for (std::size_t r = 0; r < n3; ++r) out[a * n3 + r] = d3f_[i][a][r].eval(y);
  return out;
}

FdField::FdField(std::string name, int n, int d, bool drift, Fn fn)
    : VectorFieldSystem(n, d, drift), name_(std::move(name)), fn_(std::move(fn)) {}

namespace {
struct PolyParser {
  const std::string& s;
  int n;
  std::size_t pos = 0;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::kConfig, kModule, "polynomial '" + s + "': " + what + " at position " + std::to_string(pos));
  }
  double number() {
    skip();
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s.substr(pos), &used);
    } catch (const std::exception&) {
      error("expected a number");
    }
    pos += used;
    return v;
  }
  int integer() {
    skip();
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) error("expected an integer");
    return std::stoi(s.substr(start, pos - start));
  }
  Polynomial::Term term() {
    Polynomial::Term t{1.0, std::vector<int>(n, 0)};
    for (;;) {
      skip();
      if (pos < s.size() && s[pos] == 'y') {
        ++pos;
        const int j = integer();
        if (j < 1 || j > n) error("variable index out of range");
        int e = 1;
        skip();
        if (pos < s.size() && s[pos] == '^') {
          ++pos;
          e = integer();
        }
        t.exps[j - 1] += e;
      } else {
        t.coeff *= number();
      }
      skip();
      if (pos < s.size() && s[pos] == '*') {
        ++pos;
        continue;
      }
      return t;
    }
  }
  Polynomial parse() {
    Polynomial p;
    p.n = n;
    double sign = 1.0;
    skip();
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
      sign = s[pos] == '-' ? -1.0 : 1.0;
      ++pos;
    }
    for (;;) {
      auto t = term();
      t.coeff *= sign;
      p.terms.push_back(std::move(t));
      skip();
      if (pos >= s.size()) break;
      if (s[pos] == '+' || s[pos] == '-') {
        sign = s[pos] == '-' ? -1.0 : 1.0;
        ++pos;
      } else {
        error("unexpected character");
      }
    }
    p.simplify();
    return p;
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

Polynomial constant_poly(int n, double c) {
  Polynomial p;
  p.n = n;
  if (c != 0.0) p.terms.push_back({c, std::vector<int>(n, 0)});
  return p;
}

Polynomial monomial(int n, double c, std::vector<int> exps) {
  Polynomial p;
  p.n = n;
  p.terms.push_back({c, std::move(exps)});
  return p;
}
}  // namespace

Polynomial parse_polynomial(const std::string& text, int n) {
  if (trim(text).empty()) fail(ErrorKind::kConfig, kModule, "empty polynomial");
  return PolyParser{text, n}.parse();
}

std::shared_ptr<PolynomialField> parse_polynomial_field(const std::string& text, const std::string& name) {
  std::istringstream is(text);
  std::string line;
  int n = -1, d = -1;
  std::map<int, std::string> specs;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kConfig, kModule, "expected 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "n") {
      n = std::stoi(value);
    } else if (key == "d") {
      d = std::stoi(value);
    } else if (key.size() >= 2 && key[0] == 'V') {
      specs[std::stoi(key.substr(1))] = value;
    } else {
      fail(ErrorKind::kConfig, kModule, "unknown key '" + key + "' in model file");
    }
  }
  if (n < 1 || d < 1) fail(ErrorKind::kConfig, kModule, "model file must set n and d");
  std::vector<std::vector<Polynomial>> fields(d + 1, std::vector<Polynomial>(n, constant_poly(n, 0.0)));
  for (const auto& [i, value] : specs) {
    if (i < 0 || i > d) fail(ErrorKind::kConfig, kModule, "field index out of range: V" + std::to_string(i));
    std::vector<std::string> parts;
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ';')) parts.push_back(part);
    if (static_cast<int>(parts.size()) != n)
      fail(ErrorKind::kConfig, kModule, "V" + std::to_string(i) + " needs " + std::to_string(n) + " components");
    for (int a = 0; a < n; ++a) fields[i][a] = parse_polynomial(parts[a], n);
  }
  for (int i = 1; i <= d; ++i)
    if (!specs.count(i)) fail(ErrorKind::kConfig, kModule, "missing field V" + std::to_string(i));
  return std::make_shared<PolynomialField>(name, n, d, std::move(fields));
}

std::shared_ptr<PolynomialField> load_polynomial_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::kConfig, kModule, "cannot open model file " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_polynomial_field(buf.str(), path);
}

std::shared_ptr<PolynomialField> make_heisenberg() {
  const int n = 3;
  std::vector<std::vector<Polynomial>> f(3, std::vector<Polynomial>(n, constant_poly(n, 0.0)));
  f[1][0] = constant_poly(n, 1.0);
  f[1][2] = monomial(n, 2.0, {0, 1, 0});
  f[2][1] = constant_poly(n, 1.0);
  f[2][2] = monomial(n, -2.0, {1, 0, 0});
  return std::make_shared<PolynomialField>("heisenberg", n, 2, std::move(f));
}

std::shared_ptr<PolynomialField> make_lognormal(double sigma, double mu, bool drift) {
  std::vector<std::vector<Polynomial>> f(2, std::vector<Polynomial>(1, constant_poly(1, 0.0)));
  f[1][0] = monomial(1, sigma, {1});
  if (drift && mu != 0.0) f[0][0] = monomial(1, mu, {1});
  return std::make_shared<PolynomialField>("lognormal", 1, 1, std::move(f));
}

std::shared_ptr<PolynomialField> make_bridge1d() {
  std::vector<std::vector<Polynomial>> f(2, std::vector<Polynomial>(1, constant_poly(1, 0.0)));
  f[1][0] = constant_poly(1, 1.0);
  return std::make_shared<PolynomialField>("bridge1d", 1, 1, std::move(f));
}

std::shared_ptr<PolynomialField> make_elliptic(int n) {
  std::vector<std::vector<Polynomial>> f(n + 1, std::vector<Polynomial>(n, constant_poly(n, 0.0)));
  for (int i = 1; i <= n; ++i) f[i][i - 1] = constant_poly(n, 1.0);
  return std::make_shared<PolynomialField>("elliptic", n, n, std::move(f));
}

std::shared_ptr<PolynomialField> make_zero_field(int n, int d) {
  std::vector<std::vector<Polynomial>> f(d + 1, std::vector<Polynomial>(n, constant_poly(n, 0.0)));
  return std::make_shared<PolynomialField>("zero", n, d, std::move(f));
}

}  // namespace roughheat
