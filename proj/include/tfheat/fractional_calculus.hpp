#pragma once

#include <Eigen/Dense>

namespace tfheat {

/// Uniform partition t_i = i T / N, i = 0..N, of [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  /// Number of nodes, N + 1.
  int size() const noexcept { return steps_ + 1; }
  double step() const noexcept { return horizon_ / steps_; }
  double node(int i) const noexcept { return horizon_ * i / steps_; }
  Eigen::VectorXd nodes() const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  int steps_;
};

/// A real function of time sampled on every node of a TimeGrid.
class CoefficientPath {
 public:
  CoefficientPath(TimeGrid grid, Eigen::VectorXd values);

  static CoefficientPath constant(const TimeGrid& grid, double value);

  template <class F>
  static CoefficientPath sample(const TimeGrid& grid, F&& f) {
    Eigen::VectorXd v(grid.size());
    for (int i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
    return CoefficientPath(grid, std::move(v));
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](int i) const { return values_[i]; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }

 private:
  TimeGrid grid_;
  Eigen::VectorXd values_;
};

/// L1-scheme Caputo derivative at every node; node 0 is 0.
/// Exact for samples of affine functions.
CoefficientPath caputo_l1(const CoefficientPath& path, double alpha);

/// Same on raw node values with spacing `step`.
Eigen::VectorXd caputo_l1(const Eigen::Ref<const Eigen::VectorXd>& values, double step,
                          double alpha);

/// Riemann-Liouville integral by product integration of the piecewise-linear
/// interpolant against (t - tau)^{alpha-1} / Gamma(alpha); node 0 is 0.
CoefficientPath rl_integral(const CoefficientPath& path, double alpha);

Eigen::VectorXd rl_integral(const Eigen::Ref<const Eigen::VectorXd>& values, double step,
                            double alpha);

/// max_i |I^alpha (D^alpha v)(t_i) - (v(t_i) - v(0))| for the discrete pair above.
double composition_check(const CoefficientPath& path, double alpha);

/// Weakly singular Gronwall bound z E_{alpha,1}(c Gamma(alpha) t^alpha).
double gronwall_bound(double z, double c, double alpha, double t);

}  // namespace tfheat
