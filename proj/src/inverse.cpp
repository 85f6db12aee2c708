#include "tfheat/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "tfheat/mittag_leffler.hpp"

namespace tfheat {
namespace {

constexpr double kDenominatorFloor = 1e-12;  // times C2

struct NodeTerm {
  double c;   // mu phi a
  double d0;  // v = a / (d0 + d1 s)
  double d1;
};

double node_map(const std::vector<NodeTerm>& terms, double s) {
  double acc = 0.0;
  for (const auto& t : terms) acc += t.c / (t.d0 + t.d1 * s);
  return s * acc;
}

// Solves s * sum c / (d0 + d1 s) = target on [lo, hi]; the root is clamped
// to the nearer end when it lies outside.
double solve_node(const std::vector<NodeTerm>& terms, double target, double lo, double hi,
                  bool& clamped) {
  clamped = false;
  double g_lo = node_map(terms, lo) - target;
  double g_hi = node_map(terms, hi) - target;
  if (g_lo >= 0.0) {
    clamped = g_lo > 0.0;
    return lo;
  }
  if (g_hi <= 0.0) {
    clamped = g_hi < 0.0;
    return hi;
  }
  double a = lo, b = hi;
  double s = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double g = node_map(terms, s) - target;
    if (g == 0.0) return s;
    if (g < 0.0) a = s; else b = s;
    // Newton step, kept inside the bracket
    double dg = 0.0;
    for (const auto& t : terms) {
      const double den = t.d0 + t.d1 * s;
      dg += t.c * t.d0 / (den * den);
    }
    double next = dg > 0.0 ? s - g / dg : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - s) <= 1e-15 * std::abs(s) || b - a <= 1e-15 * std::abs(s)) return next;
    s = next;
  }
  return s;
}

double clamp_count(double v, double lo, double hi, int& count) {
  if (v < lo) { ++count; return lo; }
  if (v > hi) { ++count; return hi; }
  return v;
}

struct SweepOutcome {
  Eigen::VectorXd sigma;
  double min_denominator;
  int clamped;
  int forward_iterations;
};

// One time-ordered sweep: at every node the scalar equation
// sigma_n * sum mu phi v_n(sigma_n) = N_n is solved with earlier nodes fixed.
SweepOutcome causal_sweep(const InverseProblem& problem, const Eigen::VectorXd& numerator,
                          const DomainBracket& bracket, const Eigen::VectorXd& previous,
                          double omega) {
  const auto& d = problem.data;
  const auto& mu = d.modes.eigenvalues();
  const auto& phi = d.modes.weights();
  const int n_modes = d.modes.size();
  const int n_steps = d.grid.steps();
  const double lo = bracket.lower(), hi = bracket.upper();
  const double floor = kDenominatorFloor * bracket.c2;
  SweepOutcome out{Eigen::VectorXd(n_steps + 1), std::numeric_limits<double>::infinity(), 0,
                   n_modes};
  auto& s = out.sigma;

  const double den0 = (mu.array() * phi.array() * d.initial.array()).sum();
  if (!(den0 > floor)) throw DegenerateDenominatorError("P: denominator below floor at node 0");
  out.min_denominator = den0;
  s[0] = (1.0 - omega) * previous[0] +
         omega * clamp_count(numerator[0] / den0, lo, hi, out.clamped);

  std::vector<NodeTerm> terms(n_modes);
  if (problem.controls.method == ForwardMethod::picard) {
    const double big_m = problem.controls.picard.splitting
                             ? *problem.controls.picard.splitting
                             : problem.controls.picard.splitting_factor * previous.maxCoeff();
    const MlParams e1(d.alpha, 1.0);
    std::vector<VolterraWeights> weights;
    Eigen::MatrixXd base(n_modes, n_steps + 1), feedback(n_modes, n_steps + 1);
    weights.reserve(n_modes);
    for (int k = 0; k < n_modes; ++k) {
      weights.emplace_back(d.alpha, mu[k] * big_m, d.grid);
      const double q = d.source(k, 0) / (mu[k] * s[0]);
      Eigen::VectorXd r(n_steps + 1);
      for (int i = 0; i <= n_steps; ++i)
        r[i] = q + (d.initial[k] - q) * ml_eval(e1, -mu[k] * s[0] * std::pow(d.grid.node(i), d.alpha));
      Eigen::VectorXd g = d.source.row(k).transpose().array() - d.source(k, 0);
      g -= mu[k] * (big_m - s[0]) * r;
      base.row(k) = (r + weights[k].apply(g)).transpose();
      feedback(k, 0) = mu[k] * (big_m - s[0]) * d.initial[k];
    }
    Eigen::VectorXd fb(n_steps + 1), a(n_modes), d0(n_modes), d1(n_modes);
    for (int n = 1; n <= n_steps; ++n) {
      for (int k = 0; k < n_modes; ++k) {
        fb = feedback.row(k).transpose();
        a[k] = base(k, n) + weights[k].history(n, fb);
        const double w = weights[k].self_weight(n);
        d0[k] = 1.0 - w * mu[k] * big_m;
        d1[k] = w * mu[k];
        terms[k] = {mu[k] * phi[k] * a[k], d0[k], d1[k]};
      }
      bool clamped = false;
      const double root = solve_node(terms, numerator[n], lo, hi, clamped);
      if (clamped) ++out.clamped;
      s[n] = (1.0 - omega) * previous[n] + omega * root;
      const double den = node_map(terms, s[n]) / s[n];
      out.min_denominator = std::min(out.min_denominator, den);
      if (!(den > floor))
        throw DegenerateDenominatorError("P: denominator below floor at node " + std::to_string(n));
      for (int k = 0; k < n_modes; ++k)
        feedback(k, n) = mu[k] * (big_m - s[n]) * a[k] / (d0[k] + d1[k] * s[n]);
    }
  } else {
    const double c = std::pow(d.grid.step(), -d.alpha) / std::tgamma(2.0 - d.alpha);
    Eigen::VectorXd b(n_steps);
    for (int j = 0; j < n_steps; ++j)
      b[j] = std::pow(double(j + 1), 1.0 - d.alpha) - std::pow(double(j), 1.0 - d.alpha);
    Eigen::MatrixXd v(n_modes, n_steps + 1);
    v.col(0) = d.initial;
    Eigen::VectorXd a(n_modes);
    for (int n = 1; n <= n_steps; ++n) {
      for (int k = 0; k < n_modes; ++k) {
        double hist = 0.0;
        for (int j = 1; j < n; ++j) hist += b[j] * (v(k, n - j) - v(k, n - j - 1));
        a[k] = d.source(k, n) + c * (v(k, n - 1) - hist);
        terms[k] = {mu[k] * phi[k] * a[k], c, mu[k]};
      }
      bool clamped = false;
      const double root = solve_node(terms, numerator[n], lo, hi, clamped);
      if (clamped) ++out.clamped;
      s[n] = (1.0 - omega) * previous[n] + omega * root;
      for (int k = 0; k < n_modes; ++k) v(k, n) = a[k] / (c + mu[k] * s[n]);
      const double den = (mu.array() * phi.array() * v.col(n).array()).sum();
      out.min_denominator = std::min(out.min_denominator, den);
      if (!(den > floor))
        throw DegenerateDenominatorError("P: denominator below floor at node " + std::to_string(n));
    }
  }
  return out;
}

ForwardProblem forward_for(const InverseProblem& problem, const CoefficientPath& sigma) {
  return ForwardProblem{problem.data, sigma, problem.controls.method, problem.controls.picard};
}

}  // namespace

std::string to_string(StartPolicy policy) {
  switch (policy) {
    case StartPolicy::midpoint: return "midpoint";
    case StartPolicy::lower: return "lower";
    case StartPolicy::upper: return "upper";
  }
  return "unknown";
}

StartPolicy start_policy_from_string(const std::string& name) {
  if (name == "midpoint") return StartPolicy::midpoint;
  if (name == "lower") return StartPolicy::lower;
  if (name == "upper") return StartPolicy::upper;
  throw ValidationError("unknown start policy '" + name + "'");
}

std::string to_string(SweepOrder order) { return order == SweepOrder::causal ? "causal" : "jacobi"; }

SweepOrder sweep_order_from_string(const std::string& name) {
  if (name == "causal") return SweepOrder::causal;
  if (name == "jacobi") return SweepOrder::jacobi;
  throw ValidationError("unknown sweep order '" + name + "'");
}

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::initial: return "h";
    case PerturbationKind::source: return "f";
    case PerturbationKind::observation: return "E";
  }
  return "unknown";
}

void InverseProblem::validate() const {
  data.validate();
  if (!(observation.grid() == data.grid)) throw ShapeError("InverseProblem: observation grid mismatch");
  if (!(data.modes.eigenvalues().minCoeff() > 0.0))
    throw DomainError("InverseProblem: eigenvalues must be positive");
  if (observation_caputo && observation_caputo->size() != data.grid.size())
    throw ShapeError("InverseProblem: observation derivative length mismatch");
  if (!(controls.tolerance > 0.0) || controls.max_iterations < 1 ||
      !(controls.damping > 0.0 && controls.damping <= 1.0))
    throw DomainError("InverseProblem: invalid iteration controls");
}

Eigen::VectorXd InverseProblem::caputo_observation() const {
  if (observation_caputo) return *observation_caputo;
  return caputo_l1(observation.values(), data.grid.step(), data.alpha);
}

Eigen::VectorXd InverseProblem::numerator() const {
  return data.source.transpose() * data.modes.weights() - caputo_observation();
}

std::string AdmissibilityReport::summary() const {
  std::ostringstream os;
  auto line = [&](const char* name, const ClauseResult& c) {
    os << name << ": " << (c.passed ? "pass" : "fail");
    if (!c.passed) {
      if (c.mode >= 0) os << " (mode " << c.mode << ")";
      if (c.node >= 0) os << " (node " << c.node << ")";
      if (!c.detail.empty()) os << " " << c.detail;
    }
    os << '\n';
  };
  line("I   h_xi >= 0 where phi_xi != 0", nonnegative_initial);
  line("II  f_xi >= 0 where phi_xi != 0", nonnegative_source);
  line("III some mode with h > 0, f > 0, phi != 0", strict_mode);
  line("IV  E > 0 and D^a E < F[f]", observation);
  return os.str();
}

AdmissibilityReport admissibility_check(const InverseProblem& problem) {
  problem.validate();
  const auto& d = problem.data;
  const auto& phi = d.modes.weights();
  const auto& labels = d.modes.labels();
  AdmissibilityReport rep;
  bool found_strict = false;
  for (int k = 0; k < d.modes.size(); ++k) {
    if (!(phi[k] > 0.0)) continue;
    if (rep.nonnegative_initial.passed && d.initial[k] < 0.0)
      rep.nonnegative_initial = {false, labels[k], -1, "negative initial coefficient"};
    Eigen::Index node;
    const double fmin = d.source.row(k).minCoeff(&node);
    if (rep.nonnegative_source.passed && fmin < 0.0)
      rep.nonnegative_source = {false, labels[k], int(node), "negative source coefficient"};
    if (d.initial[k] > kStrictMargin && fmin > kStrictMargin) found_strict = true;
  }
  if (!found_strict)
    rep.strict_mode = {false, -1, -1, "no observed mode with strictly positive h and f"};
  Eigen::Index node;
  const double emin = problem.observation.values().minCoeff(&node);
  if (!(emin > kStrictMargin)) {
    rep.observation = {false, -1, int(node), "E is not positive"};
  } else {
    const Eigen::VectorXd gap = -problem.numerator();
    const double gmax = gap.maxCoeff(&node);
    if (!(gmax < -kStrictMargin))
      rep.observation = {false, -1, int(node), "D^a E >= F[f]"};
  }
  return rep;
}

DomainBracket domain_bounds(const InverseProblem& problem) {
  problem.validate();
  const auto& d = problem.data;
  const Eigen::VectorXd num = problem.numerator();
  const Eigen::VectorXd mphi = d.modes.eigenvalues().cwiseProduct(d.modes.weights());
  DomainBracket b{};
  b.c0 = num.minCoeff();
  b.c1 = num.maxCoeff();
  b.c2 = d.modes.eigenvalues().minCoeff() * problem.observation.min();
  // sum mu phi I^a f_xi, with I^a applied mode by mode
  Eigen::VectorXd integrated = Eigen::VectorXd::Zero(d.grid.size());
  for (int k = 0; k < d.modes.size(); ++k) {
    if (mphi[k] == 0.0) continue;
    integrated += mphi[k] * rl_integral(d.source.row(k).transpose(), d.grid.step(), d.alpha);
  }
  b.c3 = mphi.dot(d.initial) + integrated.maxCoeff();
  if (!(b.c0 > 0.0 && b.c1 > 0.0 && b.c2 > 0.0 && b.c3 > 0.0)) {
    std::ostringstream os;
    os << "domain_bounds: nonpositive constant (C0=" << b.c0 << ", C1=" << b.c1
       << ", C2=" << b.c2 << ", C3=" << b.c3 << ")";
    throw InadmissibleError(os.str());
  }
  return b;
}

PEvaluation evaluate_P(const InverseProblem& problem, const CoefficientPath& sigma,
                       const DomainBracket& bracket) {
  if (!(sigma.min() > 0.0)) throw DomainError("apply_P: sigma must be positive");
  SolutionField field = solve_forward(forward_for(problem, sigma));
  const Eigen::VectorXd mphi =
      problem.data.modes.eigenvalues().cwiseProduct(problem.data.modes.weights());
  const Eigen::VectorXd den = field.values.transpose() * mphi;
  Eigen::Index node;
  const double dmin = den.minCoeff(&node);
  if (!(dmin > kDenominatorFloor * bracket.c2))
    throw DegenerateDenominatorError("apply_P: denominator below floor at node " +
                                     std::to_string(node));
  Eigen::VectorXd p = problem.numerator().cwiseQuotient(den);
  return {CoefficientPath(problem.data.grid, std::move(p)), std::move(field), dmin};
}

CoefficientPath apply_P(const InverseProblem& problem, const CoefficientPath& sigma) {
  return evaluate_P(problem, sigma, domain_bounds(problem)).value;
}

InverseResult solve_inverse(const InverseProblem& problem) {
  const auto rep = admissibility_check(problem);
  if (!rep.passed()) throw InadmissibleError("solve_inverse: data are not admissible\n" + rep.summary());
  const auto& c = problem.controls;
  InverseDiagnostics diag;
  diag.bracket = domain_bounds(problem);
  const auto& br = diag.bracket;
  const TimeGrid& grid = problem.data.grid;
  const double start = c.start == StartPolicy::lower   ? br.lower()
                       : c.start == StartPolicy::upper ? br.upper()
                                                       : br.midpoint();
  Eigen::VectorXd sigma = Eigen::VectorXd::Constant(grid.size(), start);
  Eigen::VectorXd best = sigma;
  double best_update = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd numerator = problem.numerator();
  double omega = c.damping;
  double prev_update = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int k = 1; k <= c.max_iterations; ++k) {
    IterationRecord rec{};
    rec.iteration = k;
    rec.damping = omega;
    Eigen::VectorXd next;
    if (c.sweep == SweepOrder::causal) {
      auto sw = causal_sweep(problem, numerator, br, sigma, omega);
      next = std::move(sw.sigma);
      rec.min_denominator = sw.min_denominator;
      rec.clamped = sw.clamped;
      rec.forward_iterations = sw.forward_iterations;
    } else {
      auto pe = evaluate_P(problem, CoefficientPath(grid, sigma), br);
      int clamped = 0;
      next.resize(grid.size());
      for (int i = 0; i < grid.size(); ++i)
        next[i] = (1.0 - omega) * sigma[i] +
                  omega * clamp_count(pe.value[i], br.lower(), br.upper(), clamped);
      rec.min_denominator = pe.min_denominator;
      rec.clamped = clamped;
      for (const auto& md : pe.field.diagnostics) rec.forward_iterations += md.iterations;
    }
    rec.update = (next - sigma).cwiseAbs().maxCoeff();
    rec.sigma_min = next.minCoeff();
    rec.sigma_max = next.maxCoeff();
    diag.records.push_back(rec);
    sigma = std::move(next);
    if (rec.update < best_update) {
      best_update = rec.update;
      best = sigma;
    }
    if (rec.update <= c.tolerance) {
      diag.status = "converged";
      CoefficientPath path(grid, sigma);
      SolutionField field = solve_forward(forward_for(problem, path));
      return {std::move(path), std::move(field), std::move(diag)};
    }
    growth = rec.update > prev_update ? growth + 1 : 0;
    if (growth >= 2) {
      omega *= 0.5;
      growth = 0;
    }
    prev_update = rec.update;
  }
  diag.status = "max iterations reached";
  throw InverseNonConvergence("solve_inverse: no convergence in " +
                                  std::to_string(c.max_iterations) + " iterations",
                              CoefficientPath(grid, best), std::move(diag));
}

StabilityTable stability_experiment(const InverseProblem& problem,
                                    const std::vector<Perturbation>& perturbations) {
  const InverseResult baseline = solve_inverse(problem);
  const auto& d = problem.data;
  const auto& mu = d.modes.eigenvalues();
  const double gamma = d.modes.gamma();
  StabilityTable table;
  for (const auto& pert : perturbations) {
    StabilityRow row;
    row.perturbation = pert;
    InverseProblem p = problem;
    switch (pert.kind) {
      case PerturbationKind::initial: {
        const Eigen::VectorXd dh = pert.scale * d.initial;
        p.data.initial += dh;
        row.input_size = sobolev_norm(dh, mu, 2.0 + gamma);
        break;
      }
      case PerturbationKind::source: {
        const Eigen::MatrixXd df = pert.scale * d.source;
        p.data.source += df;
        for (int i = 0; i < d.grid.size(); ++i)
          row.input_size = std::max(row.input_size, sobolev_norm(df.col(i), mu, 1.5 + gamma));
        break;
      }
      case PerturbationKind::observation: {
        Eigen::VectorXd de(d.grid.size());
        for (int i = 0; i < d.grid.size(); ++i)
          de[i] = pert.scale * problem.observation[i] *
                  std::cos(std::numbers::pi * d.grid.node(i) / d.grid.horizon());
        const Eigen::VectorXd dde = caputo_l1(de, d.grid.step(), d.alpha);
        p.observation = CoefficientPath(d.grid, problem.observation.values() + de);
        if (problem.observation_caputo) p.observation_caputo = *problem.observation_caputo + dde;
        row.input_size = de.cwiseAbs().maxCoeff() + dde.cwiseAbs().maxCoeff();
        break;
      }
    }
    const auto adm = admissibility_check(p);
    if (!adm.passed()) {
      row.note = "inadmissible perturbation, skipped";
      table.rows.push_back(row);
      continue;
    }
    try {
      const InverseResult r = solve_inverse(p);
      row.solved = true;
      row.sigma_deviation = (r.sigma.values() - baseline.sigma.values()).cwiseAbs().maxCoeff();
      row.field_deviation = (r.field.values - baseline.field.values).colwise().norm().maxCoeff();
    } catch (const std::exception& e) {
      row.note = e.what();
    }
    table.rows.push_back(row);
  }
  std::vector<double> lx, ls, lv;
  for (const auto& r : table.rows) {
    if (!r.solved || !(r.input_size > 0.0)) continue;
    table.sigma_constant = std::max(table.sigma_constant, r.sigma_deviation / r.input_size);
    if (r.sigma_deviation > 0.0 && r.field_deviation > 0.0) {
      lx.push_back(std::log(r.input_size));
      ls.push_back(std::log(r.sigma_deviation));
      lv.push_back(std::log(r.field_deviation));
    }
  }
  auto slope = [&](const std::vector<double>& y) {
    if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (y[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
  };
  table.sigma_slope = slope(ls);
  table.field_slope = slope(lv);
  return table;
}

}  // namespace tfheat
