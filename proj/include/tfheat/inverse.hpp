#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tfheat/error.hpp"
#include "tfheat/forward.hpp"

namespace tfheat {

enum class StartPolicy { midpoint, lower, upper };
/// causal: node-by-node solve of sigma = P[sigma] in time order within each
/// sweep; jacobi: sigma <- (1 - w) sigma + w clamp(P[sigma]) on the whole path.
enum class SweepOrder { causal, jacobi };

std::string to_string(StartPolicy policy);
StartPolicy start_policy_from_string(const std::string& name);
std::string to_string(SweepOrder order);
SweepOrder sweep_order_from_string(const std::string& name);

struct InverseControls {
  double tolerance = 1e-8;
  int max_iterations = 200;
  double damping = 1.0;
  StartPolicy start = StartPolicy::midpoint;
  SweepOrder sweep = SweepOrder::causal;
  /// Forward discretization inside P.
  ForwardMethod method = ForwardMethod::picard;
  PicardControls picard;
};

struct InverseProblem {
  ProblemData data;
  CoefficientPath observation;
  /// Exact D^alpha E at the nodes; caputo_l1 of the observation otherwise.
  std::optional<Eigen::VectorXd> observation_caputo;
  InverseControls controls;

  void validate() const;
  Eigen::VectorXd caputo_observation() const;
  /// sum_xi phi_xi f_xi(t_i) - D^alpha E(t_i)
  Eigen::VectorXd numerator() const;
};

struct ClauseResult {
  bool passed = true;
  int mode = -1;  // witnessing mode label, -1 when not applicable
  int node = -1;  // witnessing node
  std::string detail;
};

struct AdmissibilityReport {
  ClauseResult nonnegative_initial;   // (I)
  ClauseResult nonnegative_source;    // (II)
  ClauseResult strict_mode;           // (III)
  ClauseResult observation;           // (IV)

  bool passed() const {
    return nonnegative_initial.passed && nonnegative_source.passed && strict_mode.passed &&
           observation.passed;
  }
  std::string summary() const;
};

/// Strict inequalities are enforced with this margin at the nodes.
inline constexpr double kStrictMargin = 1e-12;

AdmissibilityReport admissibility_check(const InverseProblem& problem);

struct DomainBracket {
  double c0, c1, c2, c3;
  double lower() const { return c0 / c3; }
  double upper() const { return c1 / c2; }
  double midpoint() const { return 0.5 * (lower() + upper()); }
};

DomainBracket domain_bounds(const InverseProblem& problem);

struct PEvaluation {
  CoefficientPath value;
  SolutionField field;
  double min_denominator;
};

/// P[sigma] = (sum phi f - D^alpha E) / (sum mu phi v(.; sigma)).
CoefficientPath apply_P(const InverseProblem& problem, const CoefficientPath& sigma);
PEvaluation evaluate_P(const InverseProblem& problem, const CoefficientPath& sigma,
                       const DomainBracket& bracket);

struct IterationRecord {
  int iteration;
  double update;           // sup |sigma_{k+1} - sigma_k|
  double min_denominator;
  int clamped;             // nodes moved onto the bracket
  int forward_iterations;  // summed over modes
  double damping;
  double sigma_min, sigma_max;
};

struct InverseDiagnostics {
  DomainBracket bracket{};
  std::vector<IterationRecord> records;
  std::string status;
};

struct InverseResult {
  CoefficientPath sigma;
  SolutionField field;
  InverseDiagnostics diagnostics;
};

/// Thrown when the iteration budget is exhausted; carries the iterate with the
/// smallest update seen.
class InverseNonConvergence : public NonConvergenceError {
 public:
  InverseNonConvergence(const std::string& what, CoefficientPath best,
                        InverseDiagnostics diagnostics)
      : NonConvergenceError(what), best(std::move(best)), diagnostics(std::move(diagnostics)) {}
  CoefficientPath best;
  InverseDiagnostics diagnostics;
};

InverseResult solve_inverse(const InverseProblem& problem);

enum class PerturbationKind { initial, source, observation };

std::string to_string(PerturbationKind kind);

struct Perturbation {
  PerturbationKind kind;
  double scale;  // relative size
};

struct StabilityRow {
  Perturbation perturbation;
  bool solved = false;
  std::string note;
  double input_size = 0.0;        // H^{2+g}, C(H^{3/2+g}) or X^alpha norm
  double sigma_deviation = 0.0;   // ||sigma~ - sigma||_C
  double field_deviation = 0.0;   // max_t ||v~(t) - v(t)||
};

struct StabilityTable {
  std::vector<StabilityRow> rows;
  double sigma_slope = 0.0;  // log-log least squares over solved rows
  double field_slope = 0.0;
  double sigma_constant = 0.0;  // max deviation / input
};

/// Relative perturbations: h(1 + d), f(1 + d), E(1 + d cos(pi t / T)).
StabilityTable stability_experiment(const InverseProblem& problem,
                                    const std::vector<Perturbation>& perturbations);

}  // namespace tfheat
