#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "roughheat/fgauss.hpp"

namespace roughheat {

/// Flat `key = value` configuration. Later assignments win.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& file);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Throws a config error naming the first key outside `allowed`.
  void check_keys(const std::set<std::string>& allowed) const;

  std::string str(const std::string& key, const std::string& fallback) const;
  std::string required(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key) const;

  Hurst hurst(const std::string& key = "hurst") const;
  /// Grid size M, a power of two in [2^5, 2^12].
  int grid(const std::string& key, int fallback) const;

  /// Canonical text form, one `key = value` per line, sorted by key.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<double> parse_reals(const std::string& text);

}  // namespace roughheat
