#include "tfheat/fractional_calculus.hpp"

#include <cmath>
#include <string>

#include "tfheat/error.hpp"
#include "tfheat/mittag_leffler.hpp"

namespace tfheat {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw DomainError("TimeGrid: horizon must be positive and finite");
  if (steps < 2) throw DomainError("TimeGrid: at least 2 steps are required");
}

Eigen::VectorXd TimeGrid::nodes() const {
  Eigen::VectorXd t(size());
  for (int i = 0; i < size(); ++i) t[i] = node(i);
  return t;
}

CoefficientPath::CoefficientPath(TimeGrid grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw ShapeError("CoefficientPath: expected " + std::to_string(grid_.size()) +
                     " values, got " + std::to_string(values_.size()));
  if (!values_.allFinite()) throw DomainError("CoefficientPath: values must be finite");
}

CoefficientPath CoefficientPath::constant(const TimeGrid& grid, double value) {
  return CoefficientPath(grid, Eigen::VectorXd::Constant(grid.size(), value));
}

Eigen::VectorXd caputo_l1(const Eigen::Ref<const Eigen::VectorXd>& values, double step,
                          double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("caputo_l1: alpha must lie in (0, 1)");
  const Eigen::Index n_nodes = values.size();
  if (n_nodes < 2) throw ShapeError("caputo_l1: at least 2 nodes are required");
  // b_j = (j+1)^{1-alpha} - j^{1-alpha}
  Eigen::VectorXd b(n_nodes - 1);
  for (Eigen::Index j = 0; j < n_nodes - 1; ++j)
    b[j] = std::pow(double(j + 1), 1.0 - alpha) - std::pow(double(j), 1.0 - alpha);
  const double scale = std::pow(step, -alpha) / std::tgamma(2.0 - alpha);
  Eigen::VectorXd diff = values.tail(n_nodes - 1) - values.head(n_nodes - 1);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_nodes);
  for (Eigen::Index n = 1; n < n_nodes; ++n) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += b[j] * diff[n - 1 - j];
    out[n] = scale * acc;
  }
  return out;
}

CoefficientPath caputo_l1(const CoefficientPath& path, double alpha) {
  return CoefficientPath(path.grid(), caputo_l1(path.values(), path.grid().step(), alpha));
}

Eigen::VectorXd rl_integral(const Eigen::Ref<const Eigen::VectorXd>& values, double step,
                            double alpha) {
  if (!(alpha > 0.0)) throw DomainError("rl_integral: alpha must be positive");
  const Eigen::Index n_nodes = values.size();
  if (n_nodes < 2) throw ShapeError("rl_integral: at least 2 nodes are required");
  const Eigen::Index steps = n_nodes - 1;
  const double ap1 = alpha + 1.0;
  // c_d = (d+1)^{a+1} - 2 d^{a+1} + (d-1)^{a+1} for interior lags d >= 1
  Eigen::VectorXd pw(steps + 2);
  for (Eigen::Index d = 0; d < steps + 2; ++d) pw[d] = std::pow(double(d), ap1);
  Eigen::VectorXd interior(steps + 1);
  interior[0] = 1.0;
  for (Eigen::Index d = 1; d <= steps; ++d) interior[d] = pw[d + 1] - 2.0 * pw[d] + pw[d - 1];
  const double scale = std::pow(step, alpha) / std::tgamma(alpha + 2.0);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_nodes);
  for (Eigen::Index n = 1; n < n_nodes; ++n) {
    const double nd = double(n);
    double acc = (pw[n - 1] - (nd - 1.0 - alpha) * std::pow(nd, alpha)) * values[0];
    for (Eigen::Index j = 1; j <= n; ++j) acc += interior[n - j] * values[j];
    out[n] = scale * acc;
  }
  return out;
}

CoefficientPath rl_integral(const CoefficientPath& path, double alpha) {
  return CoefficientPath(path.grid(), rl_integral(path.values(), path.grid().step(), alpha));
}

double composition_check(const CoefficientPath& path, double alpha) {
  const double h = path.grid().step();
  const Eigen::VectorXd round_trip = rl_integral(caputo_l1(path.values(), h, alpha), h, alpha);
  const Eigen::VectorXd shifted = path.values().array() - path.values()[0];
  return (round_trip - shifted).cwiseAbs().maxCoeff();
}

double gronwall_bound(double z, double c, double alpha, double t) {
  if (z < 0.0 || c < 0.0 || t < 0.0)
    throw DomainError("gronwall_bound: arguments must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("gronwall_bound: alpha must lie in (0, 1)");
  if (z == 0.0) return 0.0;
  const double arg = c * std::tgamma(alpha) * std::pow(t, alpha);
  if (std::pow(arg, 1.0 / alpha) > 50.0)
    throw OverflowError("gronwall_bound: c Gamma(alpha) t^alpha exceeds the series range");
  return z * ml_eval(alpha, 1.0, arg);
}

}  // namespace tfheat
