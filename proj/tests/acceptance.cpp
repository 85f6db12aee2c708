// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: acceptance [criterion...]   (no arguments: all)
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tfheat/error.hpp"
#include "tfheat/forward.hpp"
#include "tfheat/inverse.hpp"
#include "tfheat/mittag_leffler.hpp"
#include "tfheat/scenario.hpp"

using namespace tfheat;
using std::numbers::pi;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

double sup(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

ResolvedScenario scenario(const std::string& name) {
  return resolve(load_scenario(std::string(TFHEAT_SCENARIO_DIR) + "/" + name + ".json"));
}

Eigen::VectorXd parabola(int n) {
  Eigen::VectorXd h(n);
  for (int k = 1; k <= n; ++k) h[k - 1] = k % 2 ? 4 * std::sqrt(2.0) / std::pow(k * pi, 3) : 0.0;
  return h;
}

// smooth random path in [lo, hi]
CoefficientPath random_path(std::mt19937_64& rng, const TimeGrid& g, double lo, double hi) {
  std::uniform_real_distribution<double> u(0, 1);
  const double a = u(rng), b = u(rng), c = u(rng), w1 = 1 + 6 * u(rng), w2 = 1 + 12 * u(rng), ph = 6 * u(rng);
  const double total = a + b + c + 1e-12;
  return CoefficientPath::sample(g, [=](double t) {
    const double s = (a * 0.5 * (1 + std::sin(w1 * t + ph)) + b * 0.5 * (1 + std::cos(w2 * t)) + c * t) / total;
    return lo + (hi - lo) * std::clamp(s, 0.0, 1.0);
  });
}

Outcome c1_mittag_leffler() {
  int bound_bad = 0, mono_bad = 0;
  double worst_der = 0.0, worst_int_oracle = 0.0, worst_int_weights = 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double alpha : {0.3, 0.5, 0.8}) {
    const MlParams p(alpha, 1.0);
    double prev = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double z = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
      const double e = ml_eval(p, -z);
      if (!(e > 0.0 && e < 1.0)) ++bound_bad;
      if (e > prev) ++mono_bad;
      prev = e;
    }
    // d/dt E(-mu t^a) against Richardson-extrapolated central differences
    for (double mu : {0.1, 1.0, 3.0, 10.0})
      for (double t : {0.05, 0.25, 0.5, 1.0, 2.0}) {
        auto e = [&](double x) { return ml_eval(p, -mu * std::pow(x, alpha)); };
        const double d = 1e-3 * t;
        const double d1 = (e(t + d) - e(t - d)) / (2 * d), d2 = (e(t + 2 * d) - e(t - 2 * d)) / (4 * d);
        const double fd = (4 * d1 - d2) / 3;
        const double exact = ml_time_derivative(alpha, mu, t);
        worst_der = std::max(worst_der, std::abs(fd - exact) / std::abs(exact));
      }
    // int_0^t mu k(s) ds = (1 - E(-mu m t^a)) / m, N = 1024
    const MlParams kp(alpha, alpha);
    for (auto [mu, m] : {std::pair{1.0, 1.0}, std::pair{5.0, 0.7}, std::pair{20.0, 1.5}})
      for (double t : {0.25, 1.0}) {
        const double rhs = (1.0 - ml_eval(p, -mu * m * std::pow(t, alpha))) / m;
        // independent oracle: tanh-sinh in u = s^a, where the integrand E_{a,a}(-mu m u) mu / a is smooth
        const double lhs = ts.integrate([&](double x) { return mu / alpha * ml_eval(kp, -mu * m * x); }, 0.0,
                                        std::pow(t, alpha));
        worst_int_oracle = std::max(worst_int_oracle, std::abs(lhs - rhs));
        // product-integration weights on the grid
        const int n = 1024;
        const VolterraWeights w(alpha, mu * m, TimeGrid(t, n));
        worst_int_weights = std::max(worst_int_weights, std::abs(mu * w.mass(n) - rhs));
      }
  }
  std::ostringstream os;
  os << "bound violations " << bound_bad << ", monotonicity violations " << mono_bad
     << ", derivative rel err " << fmt("%.2e", worst_der) << ", INT E abs err (tanh-sinh oracle) "
     << fmt("%.2e", worst_int_oracle) << ", (product weights, N=1024) " << fmt("%.2e", worst_int_weights);
  return {bound_bad == 0 && mono_bad == 0 && worst_der <= 1e-6 && worst_int_oracle <= 1e-8 &&
              worst_int_weights <= 1e-8,
          os.str()};
}

Outcome c2_closed_form() {
  const int n_modes = 16;
  const double c = 1.0, alpha = 0.5;
  auto err = [&](int n, ForwardMethod method) {
    const TimeGrid g(1.0, n);
    const ModeSet m = dirichlet_mode_set(n_modes, {}, 0.0);
    const ProblemData d{m, parabola(n_modes), Eigen::MatrixXd::Zero(n_modes, g.size()), alpha, g};
    const SolutionField f = solve_forward({d, CoefficientPath::constant(g, c), method, {}});
    double e = 0.0;
    for (int k = 0; k < n_modes; ++k)
      for (int i = 0; i < g.size(); ++i)
        e = std::max(e, std::abs(f.values(k, i) - d.initial[k] * ml_eval(alpha, 1.0, -m.eigenvalues()[k] * c *
                                                                                          std::pow(g.node(i), alpha))));
    return e;
  };
  const double e256 = err(256, ForwardMethod::picard), e512 = err(512, ForwardMethod::picard);
  const double l256 = err(256, ForwardMethod::l1), l512 = err(512, ForwardMethod::l1);
  const double ratio = e256 / e512;
  // The Picard scheme reproduces constant-coefficient modes to round-off, where a
  // refinement ratio carries no information; it is required only above that floor.
  const double floor = 1e-10;
  const bool ratio_ok = ratio >= 1.4 || e256 <= floor;
  std::ostringstream os;
  os << "picard sup err N=512 " << fmt("%.2e", e512) << " (N=256 " << fmt("%.2e", e256) << ", ratio "
     << fmt("%.2f", ratio) << (ratio >= 1.4 ? "" : ", both at round-off floor") << "); l1 oracle N=512 "
     << fmt("%.2e", l512) << " ratio " << fmt("%.2f", l256 / l512);
  return {e512 <= 1e-4 && ratio_ok, os.str()};
}

Outcome c3_classical_limit() {
  const TimeGrid g(1.0, 512);
  const auto one = CoefficientPath::constant(g, 1.0), zero = CoefficientPath::constant(g, 0.0);
  const auto p = solve_mode_picard(1.0, one, zero, 1.0, 0.999);
  const auto l = solve_mode_l1(1.0, one, zero, 1.0, 0.999);
  double ep = 0.0, el = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    ep = std::max(ep, std::abs(p.values[i] - std::exp(-g.node(i))));
    el = std::max(el, std::abs(l.values[i] - std::exp(-g.node(i))));
  }
  return {ep <= 2e-3 && el <= 2e-3,
          "alpha=0.999 sup err vs exp(-t): picard " + fmt("%.2e", ep) + ", l1 " + fmt("%.2e", el)};
}

Outcome c4_positivity_box() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0, 1);
  int pos_bad = 0, box_bad = 0, checked = 0;
  double min_v = 0.0, max_excess = -INFINITY;
  const TimeGrid g(1.0, 128);
  for (int trial = 0; trial < 500; ++trial) {
    const double alpha = 0.1 + 0.85 * u(rng);
    const int n = 4;
    Eigen::VectorXd mu(n), phi = Eigen::VectorXd::Ones(n), h(n);
    Eigen::MatrixXd f(n, g.size());
    for (int k = 0; k < n; ++k) {
      mu[k] = std::pow(10.0, -1.0 + 4.0 * u(rng));
      h[k] = u(rng) < 0.2 ? 0.0 : 2 * u(rng);
      f.row(k) = u(rng) < 0.2 ? Eigen::RowVectorXd::Zero(g.size())
                              : Eigen::RowVectorXd(random_path(rng, g, 0.0, 5 * u(rng)).values().transpose());
    }
    const ModeSet m(mu, phi);
    // ModeSet sorts; sort the data alongside through orient()
    const ProblemData d{m, m.orient(h), m.orient_rows(f), alpha, g};
    const CoefficientPath sigma = random_path(rng, g, 0.3, 3.0);
    for (auto method : {ForwardMethod::picard, ForwardMethod::l1}) {
      const SolutionField field = solve_forward({d, sigma, method, {}});
      for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd box = d.initial[k] + rl_integral(d.source_path(k), alpha).values().array();
        const double lo = field.values.row(k).minCoeff();
        const double ex = (field.values.row(k).transpose() - box).maxCoeff();
        min_v = std::min(min_v, lo);
        max_excess = std::max(max_excess, ex);
        pos_bad += lo < -1e-10;
        box_bad += ex > 1e-6;
        ++checked;
      }
    }
  }
  std::ostringstream os;
  os << "500 instances, " << checked << " mode trajectories (picard+l1): positivity violations " << pos_bad
     << " (min v " << fmt("%.2e", min_v) << "), box violations " << box_bad << " (max excess "
     << fmt("%.2e", max_excess) << ")";
  return {pos_bad == 0 && box_bad == 0, os.str()};
}

Outcome c5_contraction() {
  std::mt19937_64 rng(20240602);
  std::uniform_real_distribution<double> u(0, 1);
  const TimeGrid g(1.0, 256);
  int bad = 0;
  double worst = -INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const double alpha = 0.1 + 0.85 * u(rng), mu = std::pow(10.0, -1.0 + 4.0 * u(rng));
    const CoefficientPath sigma = random_path(rng, g, 0.3, 3.0);
    const CoefficientPath f = random_path(rng, g, 0.0, 2.0);
    const PicardMap map(mu, sigma, f, u(rng), alpha, 1.05 * sigma.max());
    const Eigen::VectorXd a = random_path(rng, g, -1.0, 1.0).values();
    const Eigen::VectorXd b = random_path(rng, g, -1.0, 1.0).values();
    const double ratio = sup(map.apply(a) - map.apply(b)) / sup(a - b);
    worst = std::max(worst, ratio - map.contraction_bound());
    bad += ratio > map.contraction_bound() + 0.05;
  }
  return {bad == 0, "100 pairs: violations " + std::to_string(bad) + ", max(ratio - beta) " + fmt("%.3f", worst)};
}

struct ModeCase {
  std::string name;
  double mu;
  std::function<double(double)> sigma, f;
  double h0;
  std::function<double(double, double)> exact;  // (t, alpha), may be empty
};

// canonical single-mode cases with f(0) = mu sigma(0) h0
std::vector<ModeCase> canonical_cases(double alpha) {
  auto wavy = [](double t) { return 1.0 + 0.5 * std::sin(2 * pi * t); };
  std::vector<ModeCase> cs;
  cs.push_back({"manufactured 1+t^2", 4.0, wavy,
                [=](double t) {
                  return 2 * std::pow(t, 2 - alpha) / std::tgamma(3 - alpha) + 4.0 * wavy(t) * (1 + t * t);
                },
                1.0, [](double t, double) { return 1 + t * t; }});
  cs.push_back({"constant state", 3.0, wavy, [=](double t) { return 3.0 * wavy(t); }, 1.0,
                [](double, double) { return 1.0; }});
  cs.push_back({"roundtrip mode 1", pi * pi, [](double t) { return 1 + 0.25 * std::cos(pi * t); },
                [](double t) { return 2.5 * 2 * std::sqrt(2.0) / pi * (1 + t); }, 4 * std::sqrt(2.0) / std::pow(pi, 3),
                {}});
  cs.push_back({"pi^2 oscillating", pi * pi, wavy, [](double t) { return pi * pi * (1 + t); }, 1.0, {}});
  cs.push_back({"stiff mu=100", 100.0, [](double t) { return 2 + std::cos(3 * t); },
                [](double t) { return 100.0 * 3.0 * 0.5 * std::exp(-t); }, 0.5, {}});
  return cs;
}

Outcome c6_cross_validation() {
  // |picard - l1| at N = 512, frozen at twice the first verified run
  const std::map<std::pair<std::string, double>, double> frozen = {
      {{"manufactured 1+t^2", 0.3}, 3.0e-6},  {{"manufactured 1+t^2", 0.5}, 2.3e-5},
      {{"manufactured 1+t^2", 0.8}, 2.7e-4},  {{"constant state", 0.3}, 2.5e-10},
      {{"constant state", 0.5}, 1.1e-10},     {{"constant state", 0.8}, 4.1e-11},
      {{"roundtrip mode 1", 0.3}, 4.0e-6},    {{"roundtrip mode 1", 0.5}, 1.9e-5},
      {{"roundtrip mode 1", 0.8}, 4.8e-5},    {{"pi^2 oscillating", 0.3}, 4.3e-5},
      {{"pi^2 oscillating", 0.5}, 2.9e-4},    {{"pi^2 oscillating", 0.8}, 2.7e-3},
      {{"stiff mu=100", 0.3}, 7.0e-8},        {{"stiff mu=100", 0.5}, 2.3e-6},
      {{"stiff mu=100", 0.8}, 1.1e-4}};
  bool ok = true;
  std::ostringstream os;
  for (double alpha : {0.3, 0.5, 0.8}) {
    for (const auto& c : canonical_cases(alpha)) {
      double diff[2];
      int idx = 0;
      for (int n : {256, 512}) {
        const TimeGrid g(1.0, n);
        const auto s = CoefficientPath::sample(g, c.sigma), f = CoefficientPath::sample(g, c.f);
        diff[idx++] = sup(solve_mode_picard(c.mu, s, f, c.h0, alpha).values - solve_mode_l1(c.mu, s, f, c.h0, alpha).values);
      }
      const double bound = frozen.at({c.name, alpha});
      const bool pass = diff[1] <= bound;
      ok = ok && pass;
      os << "\n    alpha=" << alpha << " " << c.name << ": |picard-l1| N=512 " << fmt("%.2e", diff[1]) << " (N=256 "
         << fmt("%.2e", diff[0]) << ") bound " << fmt("%.1e", bound) << (pass ? "" : "  <-- exceeds");
    }
  }
  return {ok, "15 runs" + os.str()};
}

Outcome c7_roundtrip() {
  const ResolvedScenario sc = scenario("roundtrip-16modes");
  const InverseResult res = solve_inverse(sc.inverse_problem());
  const double err = sup(res.sigma.values() - sc.sigma_true->values());
  const DomainBracket& b = res.diagnostics.bracket;
  bool inside = true;
  double min_den = INFINITY;
  for (const auto& r : res.diagnostics.records) {
    inside = inside && r.sigma_min >= b.lower() - 1e-9 && r.sigma_max <= b.upper() + 1e-9;
    min_den = std::min(min_den, r.min_denominator);
  }
  std::ostringstream os;
  os << "N=512, 16 modes: sup err " << fmt("%.2e", err) << ", " << res.diagnostics.records.size()
     << " iterations, bracket [" << fmt("%.4f", b.lower()) << ", " << fmt("%.4f", b.upper()) << "], iterates inside "
     << (inside ? "yes" : "no") << ", min denominator " << fmt("%.3e", min_den);
  return {err <= 1e-3 && inside && min_den > 0.0, os.str()};
}

Outcome c8_constant_state() {
  std::vector<std::pair<double, std::function<double(double)>>> family = {
      {1.0, [](double) { return 1.0; }},
      {1.0, [](double t) { return 1.0 + 0.5 * std::sin(2 * pi * t); }},
      {2.0, [](double t) { return 2.0 + t * t; }},
      {5.0, [](double t) { return 5.0 * (1.2 - 0.4 * std::cos(3 * t)); }},
  };
  bool ok = true;
  std::ostringstream os;
  for (double alpha : {0.3, 0.5, 0.8}) {
    for (const auto& [mu, g] : family) {
      const TimeGrid grid(1.0, 256);
      const ModeSet m(Eigen::VectorXd::Constant(1, mu), Eigen::VectorXd::Ones(1));
      const CoefficientPath f = CoefficientPath::sample(grid, g);
      const InverseProblem p{ProblemData{m, Eigen::VectorXd::Ones(1), f.values().transpose(), alpha, grid},
                             CoefficientPath::constant(grid, 1.0), std::nullopt, {}};
      const InverseResult r = solve_inverse(p);
      const double err = sup(r.sigma.values() - f.values() / mu);
      const int its = int(r.diagnostics.records.size());
      ok = ok && err <= 1e-6 && its <= 5;
      os << " " << fmt("%.1e", err) << "/" << its;
    }
  }
  return {ok, "12 cases (err/iterations):" + os.str()};
}

Outcome c9_stability() {
  const ResolvedScenario sc = scenario("roundtrip-16modes");
  const StabilityTable t = stability_experiment(sc.inverse_problem(), {{PerturbationKind::observation, 1e-4},
                                                                        {PerturbationKind::observation, 1e-3},
                                                                        {PerturbationKind::observation, 1e-2}});
  bool solved = true;
  std::ostringstream os;
  for (const auto& r : t.rows) {
    solved = solved && r.solved;
    os << " [" << fmt("%.0e", r.perturbation.scale) << ": in " << fmt("%.3e", r.input_size) << ", out "
       << fmt("%.3e", r.sigma_deviation) << "]";
  }
  os << " slope " << fmt("%.4f", t.sigma_slope);
  return {solved && t.sigma_slope >= 0.8 && t.sigma_slope <= 1.2, "E perturbations:" + os.str()};
}

Outcome c10_gamma_table() {
  const int n = 256;
  const auto mu = dirichlet_laplacian_modes(n);
  const auto mv = gamma_admissibility(functional_weights({FunctionalKind::mean_value}, n).weights, mu, 0.0);
  const auto pt = gamma_admissibility(functional_weights({FunctionalKind::point, 0.5}, n).weights, mu, 0.5);
  const auto bf = functional_weights({FunctionalKind::boundary_flux}, n).weights;
  const auto b1 = gamma_admissibility(bf, mu, 1.0), b0 = gamma_admissibility(bf, mu, 0.0);
  std::ostringstream os;
  os << "tail exponents: mean_value/0 " << fmt("%.2f", mv.tail_exponent) << ", point/0.5 "
     << fmt("%.2f", pt.tail_exponent) << ", flux/1 " << fmt("%.2f", b1.tail_exponent) << ", flux/0 "
     << fmt("%.2f", b0.tail_exponent) << " (not admissible: " << (b0.admissible ? "no" : "yes") << ")";
  return {mv.admissible && pt.admissible && b1.admissible && !b0.admissible, os.str()};
}

Outcome c11_uniqueness() {
  bool ok = true;
  std::ostringstream os;
  for (const char* name : {"roundtrip-16modes", "constant-state", "constant-state-variable", "verify-dirichlet"}) {
    const ResolvedScenario sc = scenario(name);
    InverseProblem p = sc.inverse_problem();
    std::vector<Eigen::VectorXd> finals;
    for (auto start : {StartPolicy::midpoint, StartPolicy::lower, StartPolicy::upper}) {
      p.controls.start = start;
      finals.push_back(solve_inverse(p).sigma.values());
    }
    const double spread = std::max({sup(finals[0] - finals[1]), sup(finals[0] - finals[2]), sup(finals[1] - finals[2])});
    const bool pass = spread <= 10 * p.controls.tolerance;
    ok = ok && pass;
    os << " " << name << " " << fmt("%.1e", spread) << (pass ? "" : "(!)");
  }
  return {ok, "max spread over {mid, lower, upper} vs 10*tol:" + os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"Mittag-Leffler contract", c1_mittag_leffler},
      {"forward closed form", c2_closed_form},
      {"classical limit", c3_classical_limit},
      {"positivity and box", c4_positivity_box},
      {"Picard contraction", c5_contraction},
      {"method cross-validation", c6_cross_validation},
      {"inverse roundtrip", c7_roundtrip},
      {"constant-state exactness", c8_constant_state},
      {"stability slope", c9_stability},
      {"gamma table", c10_gamma_table},
      {"uniqueness probe", c11_uniqueness},
  };
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= int(criteria.size()); ++i) which.push_back(i);
  int failures = 0;
  for (int i : which) {
    if (i < 1 || i > int(criteria.size())) {
      std::printf("FAIL criterion %d: no such criterion\n", i);
      ++failures;
      continue;
    }
    const auto& [name, fn] = criteria[i - 1];
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.passed ? "PASS" : "FAIL", i, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += !o.passed;
  }
  return failures == 0 ? 0 : 1;
}
