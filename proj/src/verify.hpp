#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace gdiff {

struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json details;
};

// Sizes default to the full gate; tests may shrink them for speed.
struct VerifyOptions {
  std::vector<std::string> only;  // empty = every check
  std::string corrupt;            // "" or "kbar" (skews lemma1's jump side)
  std::vector<int> t_grid{1, 10, 100, 1000};
  std::int64_t chains = 200000;   // chains per closed-form MC comparison
  std::int64_t draws = 1000000;   // scalar draws for moment checks
  std::int64_t sweep_n = 10000;   // valid configs per t in the vlb sweep
  std::vector<int> sweep_t{2, 50, 500};
  std::int64_t lemma2_n = 10000;
  int random_schedules = 100;
  int grad_params = 64;
  int grad_instances = 10;
  std::uint64_t seed = 2026;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed = true;
  nlohmann::json to_json() const;
  std::string summary_csv() const;  // name,passed per row
};

std::vector<std::string> verify_check_names();

VerifyReport run_verify(const VerifyOptions& opt);

}  // namespace gdiff
