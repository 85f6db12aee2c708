#pragma once

#include <string>

namespace tfheat {

/// Orders (alpha, beta) of the two-parameter Mittag-Leffler function
/// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta).
///
/// Construction validates 0 < alpha <= 1 and calibrates the point beyond
/// which the large-argument asymptotic expansion replaces the integral
/// representation on the negative real axis. Calibration results are cached
/// process-wide per (alpha, beta), so constructing the same orders twice is
/// cheap.
class MlParams {
 public:
  MlParams(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  /// E_{alpha,beta}(-x) is completely monotone in x >= 0 when beta >= alpha.
  bool completely_monotone() const noexcept { return completely_monotone_; }

  /// Smallest x at which E(-x) is taken from the asymptotic expansion;
  /// +inf when the expansion never matched the integral route.
  double asymptotic_switch() const noexcept { return asymptotic_switch_; }

 private:
  double alpha_;
  double beta_;
  bool completely_monotone_;
  double asymptotic_switch_;
};

/// Which evaluation route produced a value.
enum class MlBranch { series, integral, asymptotic, closed_form };

struct MlValue {
  double value;
  MlBranch branch;
};

/// E_{alpha,beta}(z) for real z. Negative arguments of any size are
/// supported; positive arguments only while the power series is stable
/// (z^{1/alpha} <= 50), otherwise DomainError.
double ml_eval(const MlParams& params, double z);

/// ml_eval plus the branch that was used.
MlValue ml_eval_traced(const MlParams& params, double z);

/// Convenience overload; builds MlParams (cached calibration).
double ml_eval(double alpha, double beta, double z);

/// Convolution kernel t^{alpha-1} E_{alpha,alpha}(-mu m t^alpha), t > 0.
double ml_kernel(double alpha, double mu, double m, double t);

/// Same kernel with pre-built E_{alpha,alpha} orders (params.beta() must equal
/// params.alpha()).
double ml_kernel(const MlParams& kernel_params, double mu, double m, double t);

/// d/dt E_{alpha,1}(-mu t^alpha) = -mu t^{alpha-1} E_{alpha,alpha}(-mu t^alpha).
double ml_time_derivative(double alpha, double mu, double t);

/// 1 / Gamma(x), zero at the poles of Gamma.
double rgamma(double x);

/// Human-readable summary of the branch switch points for these orders.
std::string ml_branch_report(const MlParams& params);

/// Enables the branch-calibration dump on stderr.
void set_ml_debug(bool enabled);

}  // namespace tfheat
