#include "tfheat/forward.hpp"

#include <algorithm>
#include <cmath>

#include "tfheat/error.hpp"
#include "tfheat/io.hpp"
#include "tfheat/mittag_leffler.hpp"
#include "tfheat/quadrature.hpp"

namespace tfheat {
namespace {

// rows below this use adaptive quadrature for the first-cell moment
constexpr int kExactFirstCellRows = 8;
// successive growing updates tolerated before declaring non-contraction
constexpr int kGrowthLimit = 3;

void require_same_grid(const CoefficientPath& a, const CoefficientPath& b, const char* what) {
  if (!(a.grid() == b.grid())) throw ShapeError(std::string(what) + ": paths on different grids");
}

}  // namespace

VolterraWeights::VolterraWeights(double alpha, double lambda, const TimeGrid& grid,
                                 bool power_first_cell)
    : steps_(grid.steps()) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("VolterraWeights: alpha must lie in (0, 1)");
  if (lambda < 0.0) throw DomainError("VolterraWeights: lambda must be nonnegative");
  const int n_steps = steps_;
  const double h = grid.step();
  const MlParams e1(alpha, 1.0), e_a(alpha, alpha), e_a1(alpha, alpha + 1.0),
      e_a2(alpha, alpha + 2.0), e_2a1(alpha, 2.0 * alpha + 1.0);

  // zeroth and first moments of the kernel over [0, tau]
  Eigen::VectorXd k0(n_steps + 1), k1(n_steps + 1);
  relax_.resize(n_steps + 1);
  k0[0] = k1[0] = 0.0;
  relax_[0] = 1.0;
  for (int m = 1; m <= n_steps; ++m) {
    const double tau = m * h;
    const double ta = std::pow(tau, alpha);
    k0[m] = ta * ml_eval(e_a1, -lambda * ta);
    k1[m] = ta * tau * ml_eval(e_a2, -lambda * ta);
    relax_[m] = ml_eval(e1, -lambda * ta);
  }
  mass_ = k0;

  // per lag m: near (right endpoint) and far (left endpoint) weights of a cell
  Eigen::VectorXd cell(n_steps), near(n_steps), far(n_steps);
  for (int m = 0; m < n_steps; ++m) {
    const double a = k0[m + 1] - k0[m];
    const double b = h * k0[m + 1] - (k1[m + 1] - k1[m]);
    cell[m] = std::max(a, 0.0);
    far[m] = std::clamp(b / h, 0.0, cell[m]);
    near[m] = cell[m] - far[m];
  }

  toeplitz_.resize(n_steps + 1);
  toeplitz_[0] = near[0];
  for (int d = 1; d < n_steps; ++d) toeplitz_[d] = near[d] + far[d - 1];
  toeplitz_[n_steps] = far[n_steps - 1];

  // first cell moment P_n = int_0^h (s/h)^a k(t_n - s) ds
  auto kernel = [&](double tau) {
    if (tau <= 0.0) return 0.0;
    const double ta = std::pow(tau, alpha);
    return ta / tau * ml_eval(e_a, -lambda * ta);
  };
  Eigen::VectorXd p(n_steps + 1);
  p[0] = 0.0;
  {
    const double ha = std::pow(h, alpha);
    p[1] = std::tgamma(1.0 + alpha) * ha * ml_eval(e_2a1, -lambda * ha);
  }
  for (int n = 2; n <= n_steps; ++n) {
    const int m = n - 1;
    if (n <= kExactFirstCellRows) {
      const double tn = n * h;
      // s = h u^{1/a}
      auto integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double ua = std::pow(u, 1.0 / alpha);
        return (h / alpha) * ua * kernel(tn - h * ua);
      };
      p[n] = quad::integrate(integrand, 0.0, 1.0, 1e-12).value;
    } else {
      // linear fit of the kernel on the cell matching both moments
      const double a_cell = cell[m] / h;           // a + b/2
      const double s_mom = (h * cell[m] - far[m] * h) / (h * h);  // a/2 + b/3
      const double b = 12.0 * (s_mom - 0.5 * a_cell);
      const double a = a_cell - 0.5 * b;
      p[n] = h * (a / (1.0 + alpha) + b / (2.0 + alpha));
    }
    p[n] = std::clamp(p[n], 0.0, cell[m]);
  }
  p[1] = std::clamp(p[1], 0.0, cell[0]);

  if (!power_first_cell) {
    // linear hat on cell 0: P_n is the far-from-0 share of the cell
    for (int n = 1; n <= n_steps; ++n) p[n] = near[n - 1];
  }

  first_.resize(n_steps + 1);
  second_.resize(n_steps + 1);
  first_[0] = second_[0] = 0.0;
  for (int n = 1; n <= n_steps; ++n) {
    const int m = n - 1;
    first_[n] = cell[m] - p[n];
    if (n == 1) {
      second_[n] = p[n];
    } else {
      // node 1 also closes cell 1 at lag n - 2
      second_[n] = p[n] + far[n - 2];
    }
  }
}

double VolterraWeights::weight(int n, int j) const {
  if (n < 0 || n > steps_ || j < 0 || j > n) throw ShapeError("VolterraWeights: index out of range");
  if (n == 0) return 0.0;
  if (j == 0) return first_[n];
  if (j == 1) return second_[n];
  return toeplitz_[n - j];
}

double VolterraWeights::self_weight(int n) const { return weight(n, n); }

double VolterraWeights::history(int n, const Eigen::VectorXd& g) const {
  if (n == 0) return 0.0;
  double acc = first_[n] * g[0];
  if (n >= 2) acc += second_[n] * g[1];
  for (int j = 2; j < n; ++j) acc += toeplitz_[n - j] * g[j];
  return acc;
}

Eigen::VectorXd VolterraWeights::apply(const Eigen::VectorXd& g) const {
  if (g.size() != steps_ + 1) throw ShapeError("VolterraWeights::apply: length mismatch");
  Eigen::VectorXd out(steps_ + 1);
  out[0] = 0.0;
  for (int n = 1; n <= steps_; ++n) out[n] = history(n, g) + self_weight(n) * g[n];
  return out;
}

double PicardControls::splitting_for(const CoefficientPath& sigma) const {
  if (splitting) return *splitting;
  return splitting_factor * sigma.max();
}

PicardMap::PicardMap(double mu, const CoefficientPath& sigma, const CoefficientPath& f,
                     double h0, double alpha, double splitting)
    : weights_(alpha, mu * splitting, sigma.grid()), h0_(h0), splitting_(splitting) {
  require_same_grid(sigma, f, "PicardMap");
  if (!(splitting > 0.0)) throw DomainError("PicardMap: splitting constant must be positive");
  if (mu < 0.0) throw DomainError("PicardMap: eigenvalue must be nonnegative");
  feedback_ = mu * (splitting - sigma.values().array());
  const TimeGrid& grid = sigma.grid();
  const double s0 = sigma[0], f0 = f[0];
  reference_.resize(grid.size());
  Eigen::VectorXd g = f.values().array() - f0;
  if (mu * s0 > 0.0) {
    const MlParams e1(alpha, 1.0);
    const double q = f0 / (mu * s0);
    for (int i = 0; i < grid.size(); ++i)
      reference_[i] = q + (h0 - q) * ml_eval(e1, -mu * s0 * std::pow(grid.node(i), alpha));
    g -= mu * (splitting - s0) * reference_;
  } else {
    // mu = 0: r = h0 + f(0) t^a / Gamma(1 + a), no feedback
    for (int i = 0; i < grid.size(); ++i)
      reference_[i] = h0 + f0 * std::pow(grid.node(i), alpha) / std::tgamma(1.0 + alpha);
  }
  base_ = reference_ + weights_.apply(g);
  contraction_bound_ = (splitting - sigma.min()) / splitting;
}

Eigen::VectorXd PicardMap::apply(const Eigen::VectorXd& u) const {
  return base_ + weights_.apply(feedback_.cwiseProduct(u));
}

ModeTrajectory solve_mode_picard(double mu, const CoefficientPath& sigma,
                                 const CoefficientPath& f, double h0, double alpha,
                                 const PicardControls& controls) {
  if (!(sigma.min() > 0.0)) throw DomainError("solve_mode_picard: sigma must be positive");
  const PicardMap map(mu, sigma, f, h0, alpha, controls.splitting_for(sigma));
  ModeTrajectory out;
  out.diagnostics.splitting = map.splitting();
  Eigen::VectorXd v = map.initial_iterate();
  double prev = -1.0;
  int growing = 0;
  for (int it = 1; it <= controls.max_iterations; ++it) {
    Eigen::VectorXd next = map.apply(v);
    const double diff = (next - v).cwiseAbs().maxCoeff();
    v.swap(next);
    out.diagnostics.iterations = it;
    out.diagnostics.residual = diff;
    if (prev > 0.0) {
      out.diagnostics.contraction = std::max(out.diagnostics.contraction, diff / prev);
      growing = diff > prev ? growing + 1 : 0;
      if (growing >= kGrowthLimit)
        throw NonConvergenceError("solve_mode_picard: non-contraction (check the splitting constant)");
    }
    if (diff <= controls.tolerance * (1.0 + v.cwiseAbs().maxCoeff())) {
      v[0] = h0;
      out.values = std::move(v);
      return out;
    }
    prev = diff;
  }
  throw NonConvergenceError("solve_mode_picard: tolerance not reached after " +
                            std::to_string(controls.max_iterations) + " iterations");
}

ModeTrajectory solve_mode_l1(double mu, const CoefficientPath& sigma, const CoefficientPath& f,
                             double h0, double alpha) {
  require_same_grid(sigma, f, "solve_mode_l1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("solve_mode_l1: alpha must lie in (0, 1)");
  if (mu < 0.0) throw DomainError("solve_mode_l1: eigenvalue must be nonnegative");
  if (!(sigma.min() > 0.0)) throw DomainError("solve_mode_l1: sigma must be positive");
  const int n_steps = sigma.grid().steps();
  const double c = std::pow(sigma.grid().step(), -alpha) / std::tgamma(2.0 - alpha);
  Eigen::VectorXd b(n_steps);
  for (int j = 0; j < n_steps; ++j)
    b[j] = std::pow(double(j + 1), 1.0 - alpha) - std::pow(double(j), 1.0 - alpha);
  Eigen::VectorXd v(n_steps + 1);
  v[0] = h0;
  for (int n = 1; n <= n_steps; ++n) {
    // c (v_n - v_{n-1}) + c sum_{j>=1} b_j (v_{n-j} - v_{n-j-1}) + mu sigma_n v_n = f_n
    double hist = 0.0;
    for (int j = 1; j < n; ++j) hist += b[j] * (v[n - j] - v[n - j - 1]);
    v[n] = (f[n] + c * v[n - 1] - c * hist) / (c + mu * sigma[n]);
  }
  ModeTrajectory out;
  out.values = std::move(v);
  return out;
}

std::string to_string(ForwardMethod method) {
  return method == ForwardMethod::picard ? "picard" : "l1";
}

ForwardMethod forward_method_from_string(const std::string& name) {
  if (name == "picard") return ForwardMethod::picard;
  if (name == "l1" || name == "l1_stepping") return ForwardMethod::l1;
  throw ValidationError("unknown forward method '" + name + "'");
}

void ForwardProblem::validate() const {
  data.validate();
  if (!(sigma.grid() == data.grid)) throw ShapeError("ForwardProblem: sigma is on a different grid");
  if (!(sigma.min() > 0.0)) throw DomainError("ForwardProblem: sigma must be positive on the grid");
  if (controls.splitting && !(*controls.splitting > sigma.max()))
    throw DomainError("ForwardProblem: splitting constant must exceed max sigma");
  if (!(controls.splitting_factor > 1.0))
    throw DomainError("ForwardProblem: splitting factor must exceed 1");
  if (!(controls.tolerance > 0.0) || controls.max_iterations < 1)
    throw DomainError("ForwardProblem: invalid Picard controls");
}

SolutionField solve_forward(const ForwardProblem& problem) {
  problem.validate();
  const auto& d = problem.data;
  const int n_modes = d.modes.size();
  SolutionField field{d.grid, Eigen::MatrixXd(n_modes, d.grid.size()),
                      Eigen::MatrixXd(n_modes, d.grid.size()), {}, problem.method};
  field.diagnostics.resize(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    const double mu = d.modes.eigenvalues()[k];
    const CoefficientPath f = d.source_path(k);
    ModeTrajectory tr;
    try {
      tr = problem.method == ForwardMethod::picard
               ? solve_mode_picard(mu, problem.sigma, f, d.initial[k], d.alpha, problem.controls)
               : solve_mode_l1(mu, problem.sigma, f, d.initial[k], d.alpha);
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError("mode " + std::to_string(d.modes.labels()[k]) + ": " + e.what());
    } catch (const DomainError& e) {
      throw DomainError("mode " + std::to_string(d.modes.labels()[k]) + ": " + e.what());
    }
    field.values.row(k) = tr.values.transpose();
    field.caputo.row(k) =
        (f.values().array() - mu * problem.sigma.values().array() * tr.values.array()).transpose();
    field.diagnostics[k] = tr.diagnostics;
  }
  return field;
}

CoefficientPath observe(const SolutionField& field, const ModeSet& modes) {
  if (field.values.rows() != modes.size()) throw ShapeError("observe: mode count mismatch");
  return CoefficientPath(field.grid, field.values.transpose() * modes.weights());
}

BoundReport comparison_bound_check(const SolutionField& field, const ForwardProblem& problem) {
  problem.validate();
  const auto& d = problem.data;
  if (field.values.rows() != d.modes.size() || !(field.grid == d.grid))
    throw ShapeError("comparison_bound_check: field does not match the problem");
  const double floor = problem.sigma.min();
  const CoefficientPath zero = CoefficientPath::constant(d.grid, 0.0);
  BoundReport rep;
  double worst = -1.0;
  const MlParams e1(d.alpha, 1.0);
  auto solve = [&](double mu, const CoefficientPath& f, double h0) {
    return problem.method == ForwardMethod::picard
               ? solve_mode_picard(mu, problem.sigma, f, h0, d.alpha, problem.controls).values
               : solve_mode_l1(mu, problem.sigma, f, h0, d.alpha).values;
  };
  for (int k = 0; k < d.modes.size(); ++k) {
    const double mu = d.modes.eigenvalues()[k];
    const CoefficientPath f = d.source_path(k);
    const Eigen::VectorXd vh = solve(mu, zero, d.initial[k]);
    Eigen::VectorXd bh(d.grid.size());
    for (int i = 0; i < d.grid.size(); ++i)
      bh[i] = std::abs(d.initial[k]) * ml_eval(e1, -mu * floor * std::pow(d.grid.node(i), d.alpha));
    Eigen::VectorXd vf = Eigen::VectorXd::Zero(d.grid.size());
    Eigen::VectorXd bf = Eigen::VectorXd::Zero(d.grid.size());
    if (f.values().cwiseAbs().maxCoeff() > 0.0) {
      vf = solve(mu, f, 0.0);
      bf = VolterraWeights(d.alpha, mu * floor, d.grid).apply(f.values().cwiseAbs());
    }
    const double sh = std::max(bh.maxCoeff(), 1e-300);
    const double sf = std::max(bf.maxCoeff(), 1e-300);
    for (int i = 0; i < d.grid.size(); ++i) {
      const double eh = std::max(0.0, (std::abs(vh[i]) - bh[i]) / sh);
      const double ef = std::max(0.0, (std::abs(vf[i]) - bf[i]) / sf);
      rep.homogeneous_violation = std::max(rep.homogeneous_violation, eh);
      rep.source_violation = std::max(rep.source_violation, ef);
      if (std::max(eh, ef) > worst) {
        worst = std::max(eh, ef);
        rep.worst_mode = d.modes.labels()[k];
        rep.worst_node = i;
      }
    }
  }
  return rep;
}

double holder_modulus(const SolutionField& field, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("holder_modulus: alpha must lie in (0, 1]");
  const int n = field.grid.size();
  Eigen::VectorXd dist(n);
  for (int d = 1; d < n; ++d) dist[d] = std::pow(d * field.grid.step(), alpha);
  double best = 0.0;
  for (Eigen::Index k = 0; k < field.values.rows(); ++k) {
    const auto row = field.values.row(k);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) best = std::max(best, std::abs(row[j] - row[i]) / dist[j - i]);
  }
  return best;
}

void write_field_csv(const SolutionField& field, const std::string& path,
                     const std::vector<int>& labels) {
  std::vector<std::string> header{"t"};
  for (Eigen::Index k = 0; k < field.values.rows(); ++k)
    header.push_back("v_" + std::to_string(labels.empty() ? int(k + 1) : labels[k]));
  Eigen::MatrixXd data(field.grid.size(), field.values.rows() + 1);
  data.col(0) = field.grid.nodes();
  data.rightCols(field.values.rows()) = field.values.transpose();
  write_table(path, header, data);
}

}  // namespace tfheat
