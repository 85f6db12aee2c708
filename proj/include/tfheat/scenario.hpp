#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfheat/forward.hpp"
#include "tfheat/inverse.hpp"

namespace tfheat {

enum class ScenarioMode { forward, inverse, stability, verify };

std::string to_string(ScenarioMode mode);

/// A parsed but unresolved scenario document.
struct Scenario {
  std::string name;
  ScenarioMode mode;
  nlohmann::json document;
  std::filesystem::path base_dir;  // relative file references resolve here
};

/// Throws ValidationError carrying the line (syntax) or field path (schema).
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

struct Overrides {
  std::optional<int> modes;
  std::optional<int> grid;
  std::optional<ForwardMethod> method;
  std::optional<std::uint64_t> seed;
};

/// Everything a run consumes, with all defaults filled in.
struct ResolvedScenario {
  std::string name;
  ScenarioMode mode;
  std::string operator_kind;
  std::string functional_kind;
  ProblemData data;
  std::optional<CoefficientPath> sigma;        // forward
  std::optional<CoefficientPath> observation;  // inverse / stability
  std::optional<Eigen::VectorXd> observation_caputo;
  std::optional<CoefficientPath> sigma_true;   // embedded target, if any
  std::optional<double> roundtrip_tolerance;
  ForwardMethod method = ForwardMethod::picard;
  PicardControls picard;
  InverseControls inverse;
  std::vector<Perturbation> perturbations;
  std::uint64_t seed = 20240601;

  ForwardProblem forward_problem() const;
  InverseProblem inverse_problem() const;
  /// The resolved configuration as written to manifest.json.
  nlohmann::json manifest() const;
};

ResolvedScenario resolve(const Scenario& scenario, const Overrides& overrides = {});

}  // namespace tfheat
