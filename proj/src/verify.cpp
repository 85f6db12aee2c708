#include "tfheat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "tfheat/io.hpp"
#include "tfheat/mittag_leffler.hpp"

namespace tfheat {

namespace {

class Recorder {
 public:
  explicit Recorder(VerifyReport& report) : report_(report) {}

  void check(const std::string& suite, const std::string& name, bool ok, const std::string& detail) {
    report_.checks.push_back({suite, name, ok, detail});
  }

  // Runs `body`; an exception counts as a failure of that check.
  void guarded(const std::string& suite, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& body) {
    try {
      auto [ok, detail] = body();
      check(suite, name, ok, detail);
    } catch (const std::exception& e) {
      check(suite, name, false, std::string("exception: ") + e.what());
    }
  }

 private:
  VerifyReport& report_;
};

std::string kv(const std::string& key, double value) { return key + "=" + format_number(value); }

Eigen::VectorXd random_path(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

// smooth random path lo + (hi - lo) * (0.5 + 0.5 * sum of a few damped cosines), kept in [lo, hi]
CoefficientPath smooth_random_path(std::mt19937_64& rng, const TimeGrid& g, double lo, double hi) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a1 = u(rng), a2 = 0.5 * u(rng), a3 = 0.25 * u(rng), shift = u(rng);
  const double T = g.horizon();
  return CoefficientPath::sample(g, [&](double t) {
    const double s = (a1 * std::cos(std::numbers::pi * t / T + shift) + a2 * std::cos(2 * std::numbers::pi * t / T) +
                      a3 * std::sin(3 * std::numbers::pi * t / T)) / 1.75;
    return lo + (hi - lo) * (0.5 + 0.5 * s);
  });
}

void mlf_suite(Recorder& r, double alpha) {
  const std::string s = "mlf";
  r.guarded(s, "bounds_and_monotonicity", [&] {
    const MlParams p(alpha, 1.0);
    double prev = 1.0;
    int bad = 0;
    for (int i = 0; i < 200; ++i) {
      const double z = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
      const double e = ml_eval(p, -z);
      if (!(e > 0.0 && e < 1.0) || e > prev) ++bad;
      prev = e;
    }
    return std::pair{bad == 0, kv("violations", bad)};
  });
  r.guarded(s, "decay_bounded", [&] {
    double worst = 0.0;
    for (double beta : {alpha, 1.0}) {
      const MlParams p(alpha, beta);
      for (int i = 0; i <= 60; ++i) {
        const double z = std::pow(10.0, -1.0 + 5.0 * i / 60.0);
        worst = std::max(worst, z * ml_eval(p, -z));
      }
    }
    return std::pair{std::isfinite(worst) && worst < 10.0, kv("max z*E(-z)", worst)};
  });
  r.guarded(s, "derivative_identity", [&] {
    double worst = 0.0;
    for (double mu : {0.5, 3.0}) {
      for (double t : {0.1, 0.5, 1.0}) {
        const double d = 1e-4 * t;
        auto e = [&](double x) { return ml_eval(alpha, 1.0, -mu * std::pow(x, alpha)); };
        // Richardson-extrapolated central difference
        const double d1 = (e(t + d) - e(t - d)) / (2 * d);
        const double d2 = (e(t + 2 * d) - e(t - 2 * d)) / (4 * d);
        const double fd = (4 * d1 - d2) / 3;
        const double exact = ml_time_derivative(alpha, mu, t);
        worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
      }
    }
    return std::pair{worst <= 1e-6, kv("max rel", worst)};
  });
  r.guarded(s, "integral_identity", [&] {
    const TimeGrid g(1.0, 64);
    double worst = 0.0;
    for (double lambda : {1.0, 40.0}) {
      const VolterraWeights w(alpha, lambda, g);
      for (int n = 1; n <= g.steps(); ++n) {
        const double x = lambda * std::pow(g.node(n), alpha);
        worst = std::max(worst, std::abs(lambda * w.mass(n) - (1.0 - ml_eval(alpha, 1.0, -x))));
      }
    }
    return std::pair{worst <= 1e-8, kv("max abs", worst)};
  });
}

void fraccalc_suite(Recorder& r, double alpha, const TimeGrid& g, std::mt19937_64& rng) {
  const std::string s = "fraccalc";
  const double h = g.step();
  r.guarded(s, "linearity", [&] {
    const Eigen::VectorXd a = random_path(rng, g.size(), -1, 1), b = random_path(rng, g.size(), -1, 1);
    const double c1 = 0.7, c2 = -1.3;
    const Eigen::VectorXd comb = c1 * a + c2 * b;
    const double e1 = (caputo_l1(comb, h, alpha) - c1 * caputo_l1(a, h, alpha) - c2 * caputo_l1(b, h, alpha))
                          .cwiseAbs().maxCoeff();
    const double e2 = (rl_integral(comb, h, alpha) - c1 * rl_integral(a, h, alpha) - c2 * rl_integral(b, h, alpha))
                          .cwiseAbs().maxCoeff();
    const double scale = 1.0 + caputo_l1(a, h, alpha).cwiseAbs().maxCoeff();
    return std::pair{std::max(e1, e2) <= 1e-12 * scale, kv("max", std::max(e1, e2))};
  });
  r.guarded(s, "rl_positivity", [&] {
    const Eigen::VectorXd v = random_path(rng, g.size(), 0, 1);
    const double m = rl_integral(v, h, alpha).minCoeff();
    return std::pair{m >= 0.0, kv("min", m)};
  });
  r.guarded(s, "caputo_nondecreasing", [&] {
    Eigen::VectorXd v = random_path(rng, g.size(), 0, 1);
    for (int i = 1; i < v.size(); ++i) v[i] += v[i - 1];
    const double m = caputo_l1(v, h, alpha).minCoeff();
    return std::pair{m >= -1e-12, kv("min", m)};
  });
  r.guarded(s, "affine_exactness", [&] {
    const CoefficientPath v = CoefficientPath::sample(g, [](double t) { return 2.0 + 3.0 * t; });
    const CoefficientPath d = caputo_l1(v, alpha);
    double worst = 0.0;
    for (int i = 1; i < g.size(); ++i)
      worst = std::max(worst, std::abs(d[i] - 3.0 * std::pow(g.node(i), 1 - alpha) * rgamma(2 - alpha)));
    return std::pair{worst <= 1e-10, kv("max", worst)};
  });
  r.guarded(s, "composition_constant", [&] {
    const double res = composition_check(CoefficientPath::constant(g, 1.7), alpha);
    return std::pair{res <= 1e-13, kv("residual", res)};
  });
}

void spectra_suite(Recorder& r, const ModeSet& modes) {
  const std::string s = "spectra";
  r.guarded(s, "eigenvalues_sorted_nonnegative", [&] {
    const auto& mu = modes.eigenvalues();
    bool ok = mu.minCoeff() >= 0.0;
    for (int i = 1; i < mu.size(); ++i) ok = ok && mu[i] >= mu[i - 1];
    return std::pair{ok, kv("min", mu.minCoeff()) + " " + kv("max", mu.maxCoeff())};
  });
  r.guarded(s, "weights_normalized", [&] {
    const auto& w = modes.weights();
    return std::pair{w.minCoeff() >= 0.0 && w.maxCoeff() > 0.0, kv("min", w.minCoeff())};
  });
  r.guarded(s, "sobolev_monotone", [&] {
    const Eigen::VectorXd c = Eigen::VectorXd::Ones(modes.size());
    double prev = 0.0;
    bool ok = true;
    for (double rho : {0.0, 0.5, 1.0, 2.0}) {
      const double n = sobolev_norm(c, modes.eigenvalues(), rho);
      ok = ok && n >= prev;
      prev = n;
    }
    return std::pair{ok, kv("norm rho=2", prev)};
  });
  if (modes.size() >= 8) {
    r.guarded(s, "gamma_admissibility", [&] {
      const GammaReport rep = gamma_admissibility(modes.weights(), modes.eigenvalues(), modes.gamma());
      return std::pair{rep.admissible, kv("gamma", modes.gamma()) + " " + kv("tail exponent", rep.tail_exponent)};
    });
  }
}

void forward_suite(Recorder& r, const ResolvedScenario& sc, std::mt19937_64& rng) {
  const std::string s = "forward";
  const ProblemData& d = sc.data;
  const CoefficientPath sigma = sc.sigma ? *sc.sigma : sc.sigma_true ? *sc.sigma_true
                                                                      : CoefficientPath::constant(d.grid, 1.0);
  r.guarded(s, "initial_condition", [&] {
    const SolutionField field = solve_forward(ForwardProblem{d, sigma, sc.method, sc.picard});
    const double e = (field.values.col(0) - d.initial).cwiseAbs().maxCoeff();
    return std::pair{e == 0.0, kv("max", e)};
  });
  // small random admissible instances on the scenario's first mode
  const double mu = d.modes.eigenvalues()[0];
  const int trials = 8;
  double worst_pos = 0.0, worst_box = 0.0, worst_ratio = -1.0, bound = 0.0;
  int pos_bad = 0, box_bad = 0;
  bool contraction_ok = true;
  for (int k = 0; k < trials; ++k) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const double h0 = u(rng);
    const CoefficientPath f = smooth_random_path(rng, d.grid, 0.0, u(rng));
    const CoefficientPath sg = smooth_random_path(rng, d.grid, 0.3, 3.0);
    for (ForwardMethod m : {ForwardMethod::picard, ForwardMethod::l1}) {
      const ModeTrajectory tr = m == ForwardMethod::picard ? solve_mode_picard(mu, sg, f, h0, d.alpha, sc.picard)
                                                           : solve_mode_l1(mu, sg, f, h0, d.alpha);
      const double lo = tr.values.minCoeff();
      worst_pos = std::min(worst_pos, lo);
      if (lo < -1e-10) ++pos_bad;
      const Eigen::VectorXd box = h0 + rl_integral(f, d.alpha).values().array();
      const double excess = (tr.values - box).maxCoeff();
      worst_box = std::max(worst_box, excess);
      if (excess > 1e-6) ++box_bad;
    }
    const PicardMap map(mu, sg, f, h0, d.alpha, sc.picard.splitting_for(sg));
    const Eigen::VectorXd a = random_path(rng, d.grid.size(), 0, 1), b = random_path(rng, d.grid.size(), 0, 1);
    const double ratio = (map.apply(a) - map.apply(b)).cwiseAbs().maxCoeff() / (a - b).cwiseAbs().maxCoeff();
    worst_ratio = std::max(worst_ratio, ratio - map.contraction_bound());
    bound = map.contraction_bound();
    contraction_ok = contraction_ok && ratio <= map.contraction_bound() + 0.05;
  }
  r.check(s, "positivity", pos_bad == 0, kv("min", worst_pos) + " " + kv("violations", pos_bad));
  r.check(s, "box_bound", box_bad == 0, kv("max excess", worst_box) + " " + kv("violations", box_bad));
  r.check(s, "picard_contraction", contraction_ok,
          kv("max ratio - bound", worst_ratio) + " " + kv("last bound", bound));
  r.guarded(s, "comparison_bounds", [&] {
    const ForwardProblem p{d, sigma, ForwardMethod::picard, sc.picard};
    const BoundReport rep = comparison_bound_check(solve_forward(p), p);
    return std::pair{rep.max_violation() <= 1e-3, kv("max relative", rep.max_violation())};
  });
  r.guarded(s, "holder_finite", [&] {
    const double hm = holder_modulus(solve_forward(ForwardProblem{d, sigma, sc.method, sc.picard}), d.alpha);
    return std::pair{std::isfinite(hm), kv("seminorm", hm)};
  });
}

void inverse_suite(Recorder& r, const ResolvedScenario& sc) {
  const std::string s = "inverse";
  const InverseProblem p = sc.inverse_problem();
  const AdmissibilityReport adm = admissibility_check(p);
  r.check(s, "admissibility", adm.passed(), adm.summary());
  if (!adm.passed()) return;
  r.guarded(s, "solve", [&] {
    const InverseResult res = solve_inverse(p);
    const DomainBracket& b = res.diagnostics.bracket;
    bool inside = true;
    double min_den = INFINITY;
    for (const auto& rec : res.diagnostics.records) {
      inside = inside && rec.sigma_min >= b.lower() - 1e-9 && rec.sigma_max <= b.upper() + 1e-9;
      min_den = std::min(min_den, rec.min_denominator);
    }
    const double fixed = (apply_P(p, res.sigma).values() - res.sigma.values()).cwiseAbs().maxCoeff();
    const double obs = (observe(res.field, p.data.modes).values() - p.observation.values()).cwiseAbs().maxCoeff();
    std::ostringstream os;
    os << kv("iterations", double(res.diagnostics.records.size())) << " " << kv("fixed-point residual", fixed)
       << " " << kv("min denominator", min_den) << " " << kv("observation mismatch", obs);
    const double tol = p.controls.tolerance / p.controls.damping;
    bool ok = inside && min_den > 0.0 && fixed <= tol;
    if (sc.sigma_true && sc.roundtrip_tolerance) {
      const double err = (res.sigma.values() - sc.sigma_true->values()).cwiseAbs().maxCoeff();
      os << " " << kv("sigma error", err);
      ok = ok && err <= *sc.roundtrip_tolerance;
    }
    return std::pair{ok, os.str()};
  });
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"suite", c.suite}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return j;
}

VerifyReport run_verification(const ResolvedScenario& sc) {
  VerifyReport report;
  report.seed = sc.seed;
  Recorder r(report);
  std::mt19937_64 rng(sc.seed);
  mlf_suite(r, sc.data.alpha);
  fraccalc_suite(r, sc.data.alpha, sc.data.grid, rng);
  spectra_suite(r, sc.data.modes);
  forward_suite(r, sc, rng);
  if (sc.observation) inverse_suite(r, sc);
  return report;
}

}  // namespace tfheat
