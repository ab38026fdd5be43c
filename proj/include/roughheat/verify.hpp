#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace roughheat {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;         // human-readable measured values
  std::vector<double> payload;  // numeric outputs compared by the determinism criterion
  double seconds = 0.0;
};

struct VerifyOptions {
  bool full = true;
  int workers = 0;
  std::uint64_t seed = 20240601;
  /// Worker count used for the determinism rerun; 0 picks one different from `workers`.
  int alt_workers = 0;
  bool inject_chen_fault = false;
};

/// Criteria with ids in `fast_criteria()` make up the fast suite.
std::vector<int> fast_criteria();
std::string criterion_name(int id);
CriterionResult run_criterion(int id, const VerifyOptions& opts);
std::vector<CriterionResult> run_suite(const VerifyOptions& opts);

/// Exact text form of the numeric payload (17 significant digits).
std::string payload_text(const CriterionResult& r);
std::string report_json(const std::vector<CriterionResult>& results);
std::string report_line(const CriterionResult& r);

}  // namespace roughheat
