#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfheat/scenario.hpp"

namespace tfheat {

struct VerifyCheck {
  std::string suite;  // module name
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<VerifyCheck> checks;
  bool passed() const;
  nlohmann::json to_json() const;
};

/// Invariant suites of every module, run on the scenario's order, grid and
/// spectrum. Random instances are drawn from `scenario.seed`.
VerifyReport run_verification(const ResolvedScenario& scenario);

}  // namespace tfheat
