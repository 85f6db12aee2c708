#include "tfheat/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "tfheat/error.hpp"

namespace tfheat {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  if (r == 0.0 || r == 1.0) return 0.0;
  if (r == 0.5) return 1.0;
  if (r == 1.5) return -1.0;
  return std::sin(kPi * r);
}

void require_modes(int n_modes) {
  if (n_modes < 1) throw DomainError("at least one mode is required");
}

}  // namespace

Eigen::VectorXd dirichlet_laplacian_modes(int n_modes) {
  require_modes(n_modes);
  Eigen::VectorXd mu(n_modes);
  for (int k = 1; k <= n_modes; ++k) mu[k - 1] = (kPi * k) * (kPi * k);
  return mu;
}

Eigen::VectorXd involution_modes(int n_modes, double eps) {
  require_modes(n_modes);
  if (!(std::abs(eps) < 1.0)) throw DomainError("involution_modes: |eps| must be < 1");
  Eigen::VectorXd mu(n_modes);
  for (int k = 1; k <= n_modes; ++k)
    mu[k - 1] = (k % 2 == 1 ? 1.0 - eps : 1.0 + eps) * double(k) * double(k);
  return mu;
}

Eigen::VectorXd harmonic_oscillator_modes(int n_modes) {
  require_modes(n_modes);
  Eigen::VectorXd mu(n_modes);
  for (int k = 0; k < n_modes; ++k) mu[k] = 2.0 * k + 1.0;
  return mu;
}

std::string to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::mean_value: return "mean_value";
    case FunctionalKind::point: return "point";
    case FunctionalKind::boundary_flux: return "boundary_flux";
  }
  return "unknown";
}

FunctionalKind functional_kind_from_string(const std::string& name) {
  if (name == "mean_value") return FunctionalKind::mean_value;
  if (name == "point") return FunctionalKind::point;
  if (name == "boundary_flux") return FunctionalKind::boundary_flux;
  throw ValidationError("unknown functional kind '" + name + "'");
}

WeightProfile functional_weights(const Functional& functional, int n_modes) {
  require_modes(n_modes);
  if (functional.kind == FunctionalKind::point &&
      !(functional.point > 0.0 && functional.point < 1.0))
    throw DomainError("functional_weights: point must lie in (0, 1)");
  Eigen::VectorXd raw(n_modes);
  for (int k = 1; k <= n_modes; ++k) {
    switch (functional.kind) {
      case FunctionalKind::mean_value:
        raw[k - 1] = (k % 2 == 1) ? 2.0 * kSqrt2 / (k * kPi) : 0.0;
        break;
      case FunctionalKind::point:
        raw[k - 1] = kSqrt2 * sin_pi(k * functional.point);
        break;
      case FunctionalKind::boundary_flux:
        raw[k - 1] = kSqrt2 * k * kPi * ((k % 2 == 0) ? 1.0 : -1.0);
        break;
    }
  }
  WeightProfile out{raw.cwiseAbs(), Eigen::VectorXd(n_modes)};
  for (int k = 0; k < n_modes; ++k) out.orientation[k] = raw[k] < 0.0 ? -1.0 : 1.0;
  if (!(out.weights.maxCoeff() > 0.0))
    throw DomainError("functional_weights: functional vanishes on the truncated basis");
  return out;
}

GammaReport gamma_admissibility(const Eigen::VectorXd& weights,
                                        const Eigen::VectorXd& eigenvalues, double gamma) {
  if (weights.size() != eigenvalues.size())
    throw ShapeError("gamma_admissibility: length mismatch");
  if (weights.size() < 8) throw ShapeError("gamma_admissibility: at least 8 modes are required");
  if (gamma < 0.0) throw DomainError("gamma_admissibility: gamma must be nonnegative");
  const int n = static_cast<int>(weights.size());
  GammaReport rep;
  Eigen::VectorXd a(n);
  for (int i = 0; i < n; ++i) {
    const double mu = eigenvalues[i];
    if (mu <= 0.0 && gamma > 0.0) {
      a[i] = weights[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      const double r = weights[i] / std::pow(mu, gamma);
      a[i] = r * r;
    }
  }
  double s = 0.0;
  int next = 1;
  for (int i = 0; i < n; ++i) {
    s += a[i];
    if (i + 1 == next || i + 1 == n) {
      rep.checkpoints.push_back(i + 1);
      rep.partial_sums.push_back(s);
      while (next <= i + 1) next *= 2;
    }
  }
  if (!std::isfinite(s)) return rep;

  // dyadic blocks (2^j, 2^{j+1}] from j = 2 (j = 1 below 16 modes, so
  // there are always two), least-squares slope of log2 B_j
  std::vector<double> js, logs;
  int zero_blocks = 0, blocks = 0;
  for (int j = n >= 16 ? 2 : 1; (1 << (j + 1)) <= n; ++j) {
    double b = 0.0;
    for (int i = (1 << j); i < (1 << (j + 1)); ++i) b += a[i];  // 0-based i = xi - 1
    ++blocks;
    if (b > 0.0) {
      js.push_back(j);
      logs.push_back(std::log2(b));
    } else {
      ++zero_blocks;
    }
  }
  if (blocks > 0 && zero_blocks == blocks) {
    rep.tail_exponent = std::numeric_limits<double>::infinity();
    rep.admissible = true;
    return rep;
  }
  if (js.size() < 2) return rep;
  const double mj = std::accumulate(js.begin(), js.end(), 0.0) / js.size();
  const double ml = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < js.size(); ++i) {
    sxy += (js[i] - mj) * (logs[i] - ml);
    sxx += (js[i] - mj) * (js[i] - mj);
  }
  const double slope = sxy / sxx;
  // a_xi ~ xi^{-p}  =>  B_j ~ 2^{j(1-p)}
  rep.tail_exponent = 1.0 - slope;
  rep.admissible = rep.tail_exponent > 1.0;
  return rep;
}

double sobolev_norm(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& eigenvalues,
                    double rho) {
  if (coeffs.size() != eigenvalues.size()) throw ShapeError("sobolev_norm: length mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    const double t = std::pow(1.0 + eigenvalues[i], rho) * coeffs[i];
    s += t * t;
  }
  return std::sqrt(s);
}

Eigen::VectorXd sine_projection(const Eigen::VectorXd& samples, int n_modes) {
  require_modes(n_modes);
  const Eigen::Index intervals = samples.size() - 1;
  if (samples.size() < 2 * n_modes || n_modes >= intervals)
    throw DomainError("sine_projection: insufficient resolution for " +
                      std::to_string(n_modes) + " modes");
  const double h = 1.0 / intervals;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_modes);
  for (int k = 1; k <= n_modes; ++k) {
    // endpoint terms carry sin(0) = sin(k pi) = 0
    double acc = 0.0;
    for (Eigen::Index i = 1; i < intervals; ++i)
      acc += samples[i] * sin_pi(double(k) * double(i) / double(intervals));
    c[k - 1] = kSqrt2 * h * acc;
  }
  return c;
}

Eigen::VectorXd sine_synthesis(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index k = 0; k < coeffs.size(); ++k)
      out[i] += coeffs[k] * kSqrt2 * sin_pi(double(k + 1) * x[i]);
  return out;
}

ModeSet::ModeSet(Eigen::VectorXd eigenvalues, Eigen::VectorXd weights, double gamma,
                 Eigen::VectorXd orientation)
    : gamma_(gamma) {
  const Eigen::Index n = eigenvalues.size();
  if (n < 1) throw DomainError("ModeSet: empty spectrum");
  if (weights.size() != n) throw ShapeError("ModeSet: weights and eigenvalues differ in length");
  if (orientation.size() == 0) orientation = Eigen::VectorXd::Ones(n);
  if (orientation.size() != n) throw ShapeError("ModeSet: orientation length mismatch");
  if (!eigenvalues.allFinite() || !weights.allFinite())
    throw DomainError("ModeSet: non-finite entries");
  if (eigenvalues.minCoeff() < 0.0) throw DomainError("ModeSet: eigenvalues must be nonnegative");
  if (gamma < 0.0) throw DomainError("ModeSet: gamma must be nonnegative");
  // fold remaining negative weights into the orientation
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights[i] < 0.0) {
      weights[i] = -weights[i];
      orientation[i] = -orientation[i];
    }
  }
  if (!(weights.maxCoeff() > 0.0)) throw DomainError("ModeSet: all weights vanish");
  labels_.resize(n);
  std::iota(labels_.begin(), labels_.end(), 0);
  std::stable_sort(labels_.begin(), labels_.end(),
                   [&](int a, int b) { return eigenvalues[a] < eigenvalues[b]; });
  eigenvalues_.resize(n);
  weights_.resize(n);
  orientation_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eigenvalues_[i] = eigenvalues[labels_[i]];
    weights_[i] = weights[labels_[i]];
    orientation_[i] = orientation[labels_[i]];
  }
  for (int& l : labels_) ++l;
}

Eigen::VectorXd ModeSet::orient(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != size()) throw ShapeError("ModeSet::orient: length mismatch");
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out[i] = orientation_[i] * coeffs[labels_[i] - 1];
  return out;
}

Eigen::MatrixXd ModeSet::orient_rows(const Eigen::MatrixXd& coeffs) const {
  if (coeffs.rows() != size()) throw ShapeError("ModeSet::orient_rows: row count mismatch");
  Eigen::MatrixXd out(coeffs.rows(), coeffs.cols());
  for (int i = 0; i < size(); ++i) out.row(i) = orientation_[i] * coeffs.row(labels_[i] - 1);
  return out;
}

ModeSet dirichlet_mode_set(int n_modes, const Functional& functional, double gamma) {
  auto w = functional_weights(functional, n_modes);
  return ModeSet(dirichlet_laplacian_modes(n_modes), w.weights, gamma, w.orientation);
}

ModeSet parse_mode_table(const std::string& text, double gamma) {
  std::vector<double> mu, phi;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto p = line.find('#'); p != std::string::npos) line.erase(p);
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 2)
      throw ValidationError("mode table line " + std::to_string(line_no) +
                            ": expected 2 columns (mu, phi)");
    try {
      size_t used = 0;
      const double m = std::stod(tok[0], &used);
      if (used != tok[0].size()) throw std::invalid_argument("trailing");
      const double f = std::stod(tok[1], &used);
      if (used != tok[1].size()) throw std::invalid_argument("trailing");
      mu.push_back(m);
      phi.push_back(f);
    } catch (const std::logic_error&) {
      // a header row is tolerated on the first data line only
      if (mu.empty() && phi.empty() && line_no <= 1) continue;
      throw ValidationError("mode table line " + std::to_string(line_no) +
                            ": unparsable number");
    }
  }
  if (mu.empty()) throw ValidationError("mode table is empty");
  return ModeSet(Eigen::Map<Eigen::VectorXd>(mu.data(), mu.size()),
                 Eigen::Map<Eigen::VectorXd>(phi.data(), phi.size()), gamma);
}

ModeSet load_mode_table(const std::string& path, double gamma) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mode table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mode_table(ss.str(), gamma);
}

void ProblemData::validate() const {
  const int n = modes.size();
  if (initial.size() != n)
    throw ShapeError("ProblemData: initial data has " + std::to_string(initial.size()) +
                     " coefficients for " + std::to_string(n) + " modes");
  if (source.rows() != n || source.cols() != grid.size())
    throw ShapeError("ProblemData: source must be modes x grid nodes");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("ProblemData: alpha must lie in (0, 1)");
  if (!initial.allFinite() || !source.allFinite())
    throw DomainError("ProblemData: non-finite coefficients");
}

CoefficientPath ProblemData::source_path(int mode) const {
  return CoefficientPath(grid, source.row(mode).transpose());
}

}  // namespace tfheat
