#include "roughheat/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "roughheat/error.hpp"

namespace roughheat {

namespace {
constexpr const char* kModule = "config";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  fail(ErrorKind::kConfig, kModule, "key '" + key + "': " + why);
}

double to_real(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) bad(key, "not a number: " + s);
    return v;
  } catch (const std::logic_error&) {
    bad(key, "not a number: " + s);
  }
}
}  // namespace

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real("list", trim(item)));
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::kConfig, kModule, "line " + std::to_string(lineno) + " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(ErrorKind::kConfig, kModule, "line " + std::to_string(lineno) + " has an empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorKind::kConfig, kModule, "cannot read config file " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::check_keys(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : values_)
    if (!allowed.count(k)) fail(ErrorKind::kConfig, kModule, "unknown key '" + k + "'");
}

std::string RunConfig::str(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::required(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) fail(ErrorKind::kConfig, kModule, "missing required key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key, double fallback) const {
  return has(key) ? to_real(key, values_.at(key)) : fallback;
}

long RunConfig::integer(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad(key, "not an integer: " + s);
  return v;
}

std::uint64_t RunConfig::seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad(key, "not an unsigned integer: " + s);
  return v;
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(key, "not a boolean: " + s);
}

std::vector<double> RunConfig::reals(const std::string& key) const {
  if (!has(key)) return {};
  try {
    return parse_reals(values_.at(key));
  } catch (const Error& e) {
    bad(key, e.what());
  }
}

Hurst RunConfig::hurst(const std::string& key) const {
  try {
    return Hurst::parse(required(key));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    bad(key, e.what());
  }
}

int RunConfig::grid(const std::string& key, int fallback) const {
  const long m = integer(key, fallback);
  if (m < 32 || m > 4096 || (m & (m - 1)) != 0) bad(key, "grid size must be a power of two between 32 and 4096");
  return static_cast<int>(m);
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace roughheat
