#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tfheat/fractional_calculus.hpp"
#include "tfheat/spectra.hpp"

namespace tfheat {

/// Product-integration weights W_{n,j} with
///   sum_j W_{n,j} g_j ~ int_0^{t_n} g(s) (t_n-s)^{a-1} E_{a,a}(-lambda (t_n-s)^a) ds
/// for g piecewise linear on the grid. With `power_first_cell` the first
/// cell uses the basis {1 - (s/h)^a, (s/h)^a} instead. All weights are >= 0
/// and row n sums to t_n^a E_{a,a+1}(-lambda t_n^a).
class VolterraWeights {
 public:
  VolterraWeights(double alpha, double lambda, const TimeGrid& grid,
                  bool power_first_cell = false);

  int steps() const noexcept { return steps_; }
  double weight(int n, int j) const;
  /// Weight of node n in row n.
  double self_weight(int n) const;
  /// Row sum, int_0^{t_n} kernel.
  double mass(int n) const { return mass_[n]; }
  /// E_{a,1}(-lambda t_n^a)
  double relaxation(int n) const { return relax_[n]; }
  const Eigen::VectorXd& relaxation() const noexcept { return relax_; }

  /// (W g)_n for every n; entry 0 is 0.
  Eigen::VectorXd apply(const Eigen::VectorXd& g) const;
  /// sum_{j<n} W_{n,j} g_j, the history part of row n.
  double history(int n, const Eigen::VectorXd& g) const;

 private:
  int steps_;
  Eigen::VectorXd toeplitz_;  // weight at lag d = n - j for j >= 2
  Eigen::VectorXd first_;     // node 0 weight per row
  Eigen::VectorXd second_;    // node 1 weight per row
  Eigen::VectorXd mass_;
  Eigen::VectorXd relax_;
};

struct PicardControls {
  double tolerance = 1e-10;
  int max_iterations = 200;
  /// Splitting constant M; defaults to splitting_factor * max sigma.
  std::optional<double> splitting;
  double splitting_factor = 1.05;

  double splitting_for(const CoefficientPath& sigma) const;
};

struct ModeDiagnostics {
  int iterations = 0;
  double residual = 0.0;     // last sup-norm update
  double contraction = 0.0;  // largest observed ratio of successive updates
  double splitting = 0.0;
};

struct ModeTrajectory {
  Eigen::VectorXd values;
  ModeDiagnostics diagnostics;
};

/// Discretization of u -> h0 E(-mu M t^a) + int [f + mu (M - sigma) u] k_M.
///
/// The frozen problem D^a r + mu sigma(0) r = f(0), r(0) = h0 has the closed
/// form r = q + (h0 - q) E(-mu sigma(0) t^a), and its part of the integral is
/// taken exactly; only the remainder, which starts like O(t), goes through
/// the product-integration weights:
///   A u = r + W [f - f(0) + mu (M - sigma) u - mu (M - sigma(0)) r].
class PicardMap {
 public:
  PicardMap(double mu, const CoefficientPath& sigma, const CoefficientPath& f, double h0,
            double alpha, double splitting);

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  Eigen::VectorXd initial_iterate() const { return h0_ * weights_.relaxation(); }
  /// The frozen-coefficient reference r.
  const Eigen::VectorXd& reference() const noexcept { return reference_; }
  /// A u without the feedback term: r + W [f - f(0) - mu (M - sigma(0)) r].
  const Eigen::VectorXd& base() const noexcept { return base_; }
  /// (M - m) / M
  double contraction_bound() const { return contraction_bound_; }
  const VolterraWeights& weights() const noexcept { return weights_; }
  /// mu (M - sigma_j)
  const Eigen::VectorXd& feedback() const noexcept { return feedback_; }
  double splitting() const noexcept { return splitting_; }

 private:
  VolterraWeights weights_;
  Eigen::VectorXd reference_;
  Eigen::VectorXd base_;
  Eigen::VectorXd feedback_;
  double h0_;
  double splitting_;
  double contraction_bound_;
};

ModeTrajectory solve_mode_picard(double mu, const CoefficientPath& sigma,
                                 const CoefficientPath& f, double h0, double alpha,
                                 const PicardControls& controls = {});

/// L1 stepping with the reaction term implicit at each node.
ModeTrajectory solve_mode_l1(double mu, const CoefficientPath& sigma, const CoefficientPath& f,
                             double h0, double alpha);

enum class ForwardMethod { picard, l1 };

std::string to_string(ForwardMethod method);
ForwardMethod forward_method_from_string(const std::string& name);

struct ForwardProblem {
  ProblemData data;
  CoefficientPath sigma;
  ForwardMethod method = ForwardMethod::picard;
  PicardControls controls;

  void validate() const;
};

struct SolutionField {
  TimeGrid grid;
  Eigen::MatrixXd values;  // modes x nodes
  Eigen::MatrixXd caputo;  // f - mu sigma v
  std::vector<ModeDiagnostics> diagnostics;
  ForwardMethod method = ForwardMethod::picard;
};

SolutionField solve_forward(const ForwardProblem& problem);

/// E(t_i) = sum_xi phi_xi v_xi(t_i)
CoefficientPath observe(const SolutionField& field, const ModeSet& modes);

struct BoundReport {
  double homogeneous_violation = 0.0;  // max relative excess over |h| E(-mu m t^a)
  double source_violation = 0.0;       // max relative excess over int |f| k_m
  int worst_mode = -1;
  int worst_node = -1;

  double max_violation() const { return std::max(homogeneous_violation, source_violation); }
};

/// Solves the split problems (h, 0) and (0, f) and compares them with the
/// constant-floor bounds at every node.
BoundReport comparison_bound_check(const SolutionField& field, const ForwardProblem& problem);

/// max over modes and node pairs of |v(t_i) - v(t_j)| / |t_i - t_j|^alpha
double holder_modulus(const SolutionField& field, double alpha);

/// Rows "t,v_1,...,v_N".
void write_field_csv(const SolutionField& field, const std::string& path,
                     const std::vector<int>& labels = {});

}  // namespace tfheat
