#include "tfheat/mittag_leffler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "tfheat/error.hpp"
#include "tfheat/quadrature.hpp"

namespace tfheat {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Series on the negative axis is attempted while x^{1/alpha} stays below this;
// the largest term grows roughly like exp(x^{1/alpha}).
constexpr double kSeriesReach = 9.0;
// Accepted cancellation: sum|terms| / |sum|.
constexpr double kMaxCancellation = 1e4;
// Positive arguments: z^{1/alpha} beyond this is rejected.
constexpr double kPositiveReach = 50.0;
// Relative agreement required between asymptotic and integral routes.
constexpr double kSwitchMatch = 1e-12;

std::atomic<bool> g_debug{false};

double sin_pi(double x) {
  // sin(pi x) with exact zeros at the integers
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  if (r == 0.0 || r == 1.0) return 0.0;
  if (r == 0.5) return 1.0;
  if (r == 1.5) return -1.0;
  return std::sin(kPi * r);
}

struct SeriesResult {
  double value;
  bool accurate;
};

SeriesResult sum_series(double alpha, double beta, double z) {
  if (z == 0.0) return {rgamma(beta), true};
  const double log_abs_z = std::log(std::abs(z));
  const bool negative = z < 0.0;
  double sum = 0.0, comp = 0.0, abs_sum = 0.0;
  double prev_mag = kInf;
  for (int k = 0; k < 5000; ++k) {
    const double arg = k * alpha + beta;
    double term;
    if (arg > 171.0) {
      // |z|^k / Gamma(arg) through logs, Gamma positive here
      term = std::exp(k * log_abs_z - std::lgamma(arg));
    } else {
      term = std::pow(std::abs(z), k) * rgamma(arg);
    }
    if (negative && (k % 2 == 1)) term = -term;
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    const double mag = std::abs(term);
    abs_sum += mag;
    if (arg > 2.0 && mag <= prev_mag && mag <= 1e-17 * std::abs(sum)) break;
    if (arg > 2.0 && mag == 0.0) break;
    prev_mag = mag;
  }
  const bool accurate = std::isfinite(sum) && abs_sum <= kMaxCancellation * std::abs(sum);
  return {sum, accurate};
}

// Integral representation for z = -x < 0, 0 < alpha < 1, beta <= 1:
// E(-x) = int_0^inf K(chi) dchi with
// K = chi^{(1-beta)/alpha} exp(-chi^{1/alpha})
//     [chi sin(pi(1-beta)) + x sin(pi(1-beta+alpha))]
//     / (alpha pi (chi^2 + 2 chi x cos(alpha pi) + x^2)).
double integral_route(double alpha, double beta, double x) {
  const double s = (1.0 - beta) / alpha;
  const double inv_alpha = 1.0 / alpha;
  const double a1 = sin_pi(1.0 - beta);
  const double a2 = sin_pi(1.0 - beta + alpha);
  const double c = std::cos(alpha * kPi);
  const double scale = 1.0 / (alpha * kPi);
  auto integrand = [=](double chi) {
    if (chi <= 0.0) {
      if (s > 0.0) return 0.0;
      return scale * a2 / x;  // s == 0 limit
    }
    const double den = chi * chi + 2.0 * chi * x * c + x * x;
    const double pw = (s == 0.0) ? 1.0 : std::pow(chi, s);
    return scale * pw * std::exp(-std::pow(chi, inv_alpha)) * (chi * a1 + x * a2) / den;
  };
  const double chi_max = std::pow(50.0, alpha);
  std::vector<double> breaks;
  breaks.push_back(std::min(1.0, 0.5 * chi_max));
  if (c < 0.0) {
    const double centre = -x * c;
    const double width = x * std::sqrt(1.0 - c * c);
    for (double f : {-8.0, -1.0, 0.0, 1.0, 8.0}) {
      const double b = centre + f * width;
      if (b > 0.0 && b < chi_max) breaks.push_back(b);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  const auto r = quad::integrate(integrand, 0.0, chi_max, breaks, 1e-14, 0.0, 4000);
  return r.value;
}

// Reduces beta into (1 - alpha, 1] and climbs back with
// E_{a,b+a}(z) = (E_{a,b}(z) - 1/Gamma(b)) / z.
double integral_with_recurrence(double alpha, double beta, double x) {
  if (beta <= 1.0) return integral_route(alpha, beta, x);
  const int steps = static_cast<int>(std::ceil((beta - 1.0) / alpha - 1e-12));
  double b = beta - steps * alpha;
  double e = integral_route(alpha, b, x);
  for (int j = 0; j < steps; ++j) {
    e = (rgamma(b) - e) / x;
    b += alpha;
  }
  return e;
}

struct AsymptoticResult {
  double value;
  double tail;  // magnitude of the first omitted term
};

AsymptoticResult asymptotic_route(double alpha, double beta, double x) {
  double sum = 0.0;
  double prev = kInf;
  double tail = kInf;
  double xk = 1.0;
  for (int k = 1; k <= 60; ++k) {
    xk /= x;
    const double term = ((k % 2 == 1) ? 1.0 : -1.0) * xk * rgamma(beta - k * alpha);
    const double mag = std::abs(term);
    if (mag > prev && mag != 0.0) {
      tail = mag;
      break;
    }
    sum += term;
    if (mag != 0.0) prev = mag;
    tail = mag;
  }
  return {sum, tail};
}

double calibrate_switch(double alpha, double beta) {
  if (alpha >= 1.0) return kInf;
  const double x_start = std::max(1.0, std::pow(kSeriesReach, alpha));
  std::vector<double> xs;
  for (double x = x_start; x <= 1e8; x *= std::pow(10.0, 0.125)) xs.push_back(x);
  // scan from the top; the switch is the smallest x of the matching suffix
  double switch_x = kInf;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) {
    const double x = *it;
    const auto asym = asymptotic_route(alpha, beta, x);
    const double ref = integral_with_recurrence(alpha, beta, x);
    const double scale = std::max(std::abs(ref), 1e-300);
    const bool ok = std::abs(asym.value - ref) <= kSwitchMatch * scale &&
                    asym.tail <= 1e-13 * scale;
    if (!ok) break;
    switch_x = x;
  }
  if (g_debug.load()) {
    std::fprintf(stderr, "ml: alpha=%.6g beta=%.6g series_reach=%.6g asymptotic_switch=%.6g\n",
                 alpha, beta, std::pow(kSeriesReach, alpha), switch_x);
  }
  return switch_x;
}

double cached_switch(double alpha, double beta) {
  static std::mutex mutex;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({alpha, beta});
    if (it != cache.end()) return it->second;
  }
  const double value = calibrate_switch(alpha, beta);
  std::lock_guard lock(mutex);
  cache.emplace(std::make_pair(alpha, beta), value);
  return value;
}

MlValue eval_alpha_one(double beta, double z) {
  if (beta == 1.0) return {std::exp(z), MlBranch::closed_form};
  if (z > 0.0 && z > kPositiveReach)
    throw DomainError("ml_eval: positive argument beyond the supported range");
  const auto s = sum_series(1.0, beta, z);
  if (s.accurate) return {s.value, MlBranch::series};
  // integer beta: climb from exp(z)
  if (beta == std::floor(beta) && beta > 1.0) {
    double e = std::exp(z);
    for (double b = 1.0; b < beta; b += 1.0) e = (e - rgamma(b)) / z;
    return {e, MlBranch::closed_form};
  }
  throw NonConvergenceError("ml_eval: no accurate branch for alpha = 1 at this argument");
}

}  // namespace

double rgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x > 171.0) return std::exp(-std::lgamma(x));
  if (x < -170.0) return std::exp(std::lgamma(1.0 - x)) * sin_pi(x) / kPi;
  return 1.0 / std::tgamma(x);
}

MlParams::MlParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("MlParams: alpha must lie in (0, 1]");
  if (!std::isfinite(beta)) throw DomainError("MlParams: beta must be finite");
  completely_monotone_ = beta >= alpha;
  asymptotic_switch_ = cached_switch(alpha, beta);
}

MlValue ml_eval_traced(const MlParams& params, double z) {
  const double alpha = params.alpha();
  const double beta = params.beta();
  if (!std::isfinite(z)) throw DomainError("ml_eval: argument must be finite");
  if (alpha == 1.0) return eval_alpha_one(beta, z);
  if (z > 0.0) {
    if (std::pow(z, 1.0 / alpha) > kPositiveReach)
      throw DomainError("ml_eval: positive argument beyond the supported range");
    const auto s = sum_series(alpha, beta, z);
    if (!std::isfinite(s.value)) throw NonConvergenceError("ml_eval: series overflow");
    return {s.value, MlBranch::series};
  }
  const double x = -z;
  if (std::pow(x, 1.0 / alpha) <= kSeriesReach) {
    const auto s = sum_series(alpha, beta, z);
    if (s.accurate) return {s.value, MlBranch::series};
  }
  if (x >= params.asymptotic_switch())
    return {asymptotic_route(alpha, beta, x).value, MlBranch::asymptotic};
  const double v = integral_with_recurrence(alpha, beta, x);
  if (!std::isfinite(v)) throw NonConvergenceError("ml_eval: integral route failed");
  return {v, MlBranch::integral};
}

double ml_eval(const MlParams& params, double z) { return ml_eval_traced(params, z).value; }

double ml_eval(double alpha, double beta, double z) {
  return ml_eval(MlParams(alpha, beta), z);
}

double ml_kernel(const MlParams& kernel_params, double mu, double m, double t) {
  if (!(t > 0.0)) throw DomainError("ml_kernel: t must be positive");
  if (mu < 0.0) throw DomainError("ml_kernel: mu must be nonnegative");
  if (!(m > 0.0)) throw DomainError("ml_kernel: m must be positive");
  const double alpha = kernel_params.alpha();
  const double ta = std::pow(t, alpha);
  return ta / t * ml_eval(kernel_params, -mu * m * ta);
}

double ml_kernel(double alpha, double mu, double m, double t) {
  return ml_kernel(MlParams(alpha, alpha), mu, m, t);
}

double ml_time_derivative(double alpha, double mu, double t) {
  if (!(mu > 0.0)) throw DomainError("ml_time_derivative: mu must be positive");
  if (!(t > 0.0)) throw DomainError("ml_time_derivative: t must be positive");
  return -mu * ml_kernel(alpha, mu, 1.0, t);
}

std::string ml_branch_report(const MlParams& params) {
  std::ostringstream os;
  os << "E_{" << params.alpha() << "," << params.beta() << "}: series for |z|^(1/alpha) <= "
     << kSeriesReach << " (negative z, cancellation <= " << kMaxCancellation
     << "), integral representation beyond, asymptotic expansion for -z >= "
     << params.asymptotic_switch();
  return os.str();
}

void set_ml_debug(bool enabled) { g_debug.store(enabled); }

}  // namespace tfheat
