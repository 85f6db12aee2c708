#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tfheat/fractional_calculus.hpp"

namespace tfheat {

/// mu_k = (pi k)^2, k = 1..n.
Eigen::VectorXd dirichlet_laplacian_modes(int n_modes);

/// Index-ordered eigenvalues (1 - eps) k^2 for odd k, (1 + eps) k^2 for even k.
Eigen::VectorXd involution_modes(int n_modes, double eps);

/// 1-D oscillator, mu_k = 2k + 1 for k = 0..n-1.
Eigen::VectorXd harmonic_oscillator_modes(int n_modes);

enum class FunctionalKind { mean_value, point, boundary_flux };

struct Functional {
  FunctionalKind kind = FunctionalKind::mean_value;
  double point = 0.5;  // used by FunctionalKind::point
};

std::string to_string(FunctionalKind kind);
FunctionalKind functional_kind_from_string(const std::string& name);

/// Observation weights on the sine basis sqrt(2) sin(k pi x) after sign
/// normalization. `orientation[k]` is -1 where the basis function was flipped.
struct WeightProfile {
  Eigen::VectorXd weights;
  Eigen::VectorXd orientation;
};

WeightProfile functional_weights(const Functional& functional, int n_modes);

struct GammaReport {
  std::vector<int> checkpoints;       // dyadic m
  std::vector<double> partial_sums;   // S_m
  double tail_exponent = 0.0;         // p in B_j ~ 2^{-j(p-1)}
  bool admissible = false;
};

GammaReport gamma_admissibility(const Eigen::VectorXd& weights,
                                        const Eigen::VectorXd& eigenvalues, double gamma);

/// (sum |(1 + mu)^rho c|^2)^{1/2}
double sobolev_norm(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& eigenvalues,
                    double rho);

/// Coefficients on sqrt(2) sin(k pi x) from samples g(i/J), i = 0..J,
/// by the trapezoidal rule (exact discrete orthogonality for k < J).
Eigen::VectorXd sine_projection(const Eigen::VectorXd& samples, int n_modes);

/// sum_k c_k sqrt(2) sin(k pi x) at each x.
Eigen::VectorXd sine_synthesis(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& x);

/// Truncated spectrum: eigenvalues sorted nondecreasing, weights normalized
/// to be nonnegative. `labels` keep the caller's original 1-based indices.
class ModeSet {
 public:
  ModeSet(Eigen::VectorXd eigenvalues, Eigen::VectorXd weights, double gamma = 0.0,
          Eigen::VectorXd orientation = {});

  int size() const noexcept { return static_cast<int>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const Eigen::VectorXd& orientation() const noexcept { return orientation_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  double gamma() const noexcept { return gamma_; }

  /// Reorders caller-indexed coefficients to the sorted labels and applies
  /// the orientation flips.
  Eigen::VectorXd orient(const Eigen::VectorXd& coeffs) const;
  Eigen::MatrixXd orient_rows(const Eigen::MatrixXd& coeffs) const;

  bool positive_spectrum() const { return eigenvalues_.minCoeff() > 0.0; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd orientation_;
  std::vector<int> labels_;
  double gamma_;
};

ModeSet dirichlet_mode_set(int n_modes, const Functional& functional, double gamma);

/// Reads (mu, phi) rows from delimiter-separated text (comma, semicolon,
/// tab or blanks); '#' starts a comment.
ModeSet load_mode_table(const std::string& path, double gamma);
ModeSet parse_mode_table(const std::string& text, double gamma);

/// Coefficient data of a forward or inverse problem. `source` holds f_xi on
/// the grid, one row per mode.
struct ProblemData {
  ModeSet modes;
  Eigen::VectorXd initial;
  Eigen::MatrixXd source;
  double alpha;
  TimeGrid grid;

  void validate() const;
  CoefficientPath source_path(int mode) const;
};

}  // namespace tfheat
