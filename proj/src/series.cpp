#include "roughheat/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr double kCapSlack = 1e-9;

void enumerate(const std::vector<SeriesVar>& vars, double cap, std::size_t v, std::vector<int>& cur,
               double w, std::vector<std::vector<int>>& out) {
  if (v == vars.size()) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= vars[v].max_degree; ++e) {
    const double we = w + e * vars[v].weight;
    if (we > cap + kCapSlack) break;
    cur[v] = e;
    enumerate(vars, cap, v + 1, cur, we, out);
  }
  cur[v] = 0;
}
}  // namespace

SeriesSpace::SeriesSpace(std::vector<SeriesVar> vars, double weight_cap)
    : vars_(std::move(vars)), cap_(weight_cap) {
  for (const auto& v : vars_) require(v.weight >= 0 && v.max_degree >= 0, "series", "bad variable");
  std::vector<int> cur(vars_.size(), 0);
  std::vector<std::vector<int>> all;
  enumerate(vars_, cap_, 0, cur, 0.0, all);
  const auto wt = [&](const std::vector<int>& e) {
    double w = 0;
    for (std::size_t i = 0; i < e.size(); ++i) w += e[i] * vars_[i].weight;
    return w;
  };
  const auto deg = [](const std::vector<int>& e) { return std::accumulate(e.begin(), e.end(), 0); };
  std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    if (deg(a) != deg(b)) return deg(a) < deg(b);
    return wt(a) < wt(b) - kCapSlack;
  });
  exps_ = std::move(all);
  for (const auto& e : exps_) {
    weights_.push_back(wt(e));
    degrees_.push_back(deg(e));
    max_degree_ = std::max(max_degree_, degrees_.back());
  }
  const int m = size();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      std::vector<int> e(vars_.size());
      for (std::size_t v = 0; v < vars_.size(); ++v) e[v] = exps_[i][v] + exps_[j][v];
      const int k = index_of(e);
      if (k >= 0) products_.push_back({i, j, k});
    }
  }
  quotients_.assign(vars_.size(), std::vector<int>(m, -1));
  shifts_.assign(vars_.size(), std::vector<int>(m, -1));
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    for (int i = 0; i < m; ++i) {
      auto e = exps_[i];
      ++e[v];
      shifts_[v][i] = index_of(e);
      e = exps_[i];
      if (e[v] > 0) {
        --e[v];
        quotients_[v][i] = index_of(e);
      }
    }
  }
}

int SeriesSpace::index_of(const std::vector<int>& exps) const {
  for (int i = 0; i < size(); ++i)
    if (exps_[i] == exps) return i;
  return -1;
}

Series::Series(const SeriesSpace* space, double constant) : space_(space), c_(space->size(), 0.0) {
  c_[0] = constant;
}

Series Series::variable(const SeriesSpace* space, int var, double scale) {
  Series s(space);
  const int k = space->shift_map(var)[0];
  if (k >= 0) s.c_[k] = scale;
  return s;
}

Series& Series::operator+=(const Series& o) {
  if (!space_) return *this = o;
  if (!o.space_) return *this;
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Series& Series::operator-=(const Series& o) {
  if (!space_) return *this = -o;
  if (!o.space_) return *this;
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Series& Series::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Series& Series::operator+=(double s) {
  if (!c_.empty()) c_[0] += s;
  return *this;
}

void Series::add_product(const Series& a, const Series& b, double scale) {
  if (!a.space_ || !b.space_) return;
  if (!space_) *this = Series(a.space_);
  for (const auto& p : space_->products()) c_[p.out] += scale * a.c_[p.lhs] * b.c_[p.rhs];
}

Series Series::partial(int var) const {
  Series out(space_);
  const auto& q = space_->quotient_map(var);
  for (int i = 0; i < size(); ++i)
    if (q[i] >= 0) out.c_[q[i]] += c_[i];
  return out;
}

Series Series::times_var(int var) const {
  Series out(space_);
  const auto& s = space_->shift_map(var);
  for (int i = 0; i < size(); ++i)
    if (s[i] >= 0) out.c_[s[i]] += c_[i];
  return out;
}

Series operator+(Series a, const Series& b) { return a += b; }
Series operator-(Series a, const Series& b) { return a -= b; }
Series operator-(const Series& a) { return a * -1.0; }

Series operator*(const Series& a, const Series& b) {
  if (!a.space()) return a;
  if (!b.space()) return b;
  Series out(a.space());
  out.add_product(a, b);
  return out;
}

Series operator*(Series a, double s) { return a *= s; }
Series operator*(double s, Series a) { return a *= s; }
Series operator+(Series a, double s) { return a += s; }
Series operator+(double s, Series a) { return a += s; }
Series operator-(Series a, double s) { return a += -s; }
Series operator-(double s, const Series& a) { return -a + s; }

Series pow(const Series& a, int k) {
  require(k >= 0, "series", "negative power");
  Series out(a.space(), 1.0);
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

}  // namespace roughheat
