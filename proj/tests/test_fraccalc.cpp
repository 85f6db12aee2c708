#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tfheat/error.hpp"
#include "tfheat/fractional_calculus.hpp"
#include "tfheat/mittag_leffler.hpp"

using namespace tfheat;

namespace {

double sup(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

// (1/Gamma(1-a)) int_0^t (t-s)^{-a} v'(s) ds by tanh-sinh
double caputo_oracle(const std::function<double(double)>& dv, double alpha, double t) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double s) { return std::pow(t - s, -alpha) * dv(s); }, 0.0, t) /
         std::tgamma(1.0 - alpha);
}

}  // namespace

TEST_SUITE("fraccalc") {

TEST_CASE("TimeGrid") {
  const TimeGrid g(2.0, 4);
  CHECK(g.size() == 5);
  CHECK(g.step() == 0.5);
  CHECK(g.node(4) == 2.0);
  CHECK(g.nodes()[2] == 1.0);
  CHECK_THROWS(TimeGrid(1.0, 1));
  CHECK_THROWS(TimeGrid(0.0, 8));
}

TEST_CASE("CoefficientPath validation") {
  const TimeGrid g(1.0, 4);
  CHECK_THROWS_AS(CoefficientPath(g, Eigen::VectorXd::Zero(3)), ShapeError);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(5);
  v[2] = std::nan("");
  CHECK_THROWS(CoefficientPath(g, v));
  CHECK(CoefficientPath::constant(g, 2.5).min() == 2.5);
}

TEST_CASE("caputo_l1 examples") {
  const TimeGrid g(1.0, 64);
  CHECK(sup(caputo_l1(CoefficientPath::constant(g, 3.0), 0.5).values()) == 0.0);
  const CoefficientPath line = CoefficientPath::sample(g, [](double t) { return t; });
  const CoefficientPath d = caputo_l1(line, 0.5);
  CHECK(d[0] == 0.0);
  for (int i = 1; i < g.size(); ++i)
    REQUIRE(d[i] == doctest::Approx(1.1283792 * std::sqrt(g.node(i))).epsilon(1e-7));
  CHECK_THROWS_AS(caputo_l1(line, 1.0), DomainError);
  CHECK_THROWS_AS(caputo_l1(line, 0.0), DomainError);
}

TEST_CASE("caputo_l1 of t^2 against quadrature, order 2 - alpha") {
  const double alpha = 0.5;
  auto err = [&](int n) {
    const TimeGrid g(1.0, n);
    const CoefficientPath v = CoefficientPath::sample(g, [](double t) { return t * t; });
    const CoefficientPath d = caputo_l1(v, alpha);
    double e = 0.0;
    for (int i = n / 8; i <= n; i += n / 8)
      e = std::max(e, std::abs(d[i] - caputo_oracle([](double s) { return 2 * s; }, alpha, g.node(i))));
    return e;
  };
  const double e1 = err(256), e2 = err(512);
  CHECK(e2 < 1e-3);
  CHECK(std::log2(e1 / e2) > 1.3);  // 2 - alpha = 1.5
}

TEST_CASE("rl_integral examples") {
  const TimeGrid g(1.0, 128);
  const CoefficientPath one = CoefficientPath::constant(g, 1.0);
  const CoefficientPath i1 = rl_integral(one, 0.5);
  CHECK(i1[0] == 0.0);
  for (int i = 1; i < g.size(); ++i)
    REQUIRE(i1[i] == doctest::Approx(std::sqrt(g.node(i)) / std::tgamma(1.5)).epsilon(1e-12));
  CHECK(sup(rl_integral(CoefficientPath::constant(g, 0.0), 0.5).values()) == 0.0);
  // piecewise-linear reconstruction is exact for t
  const CoefficientPath it = rl_integral(CoefficientPath::sample(g, [](double t) { return t; }), 0.5);
  for (int i = 1; i < g.size(); ++i)
    REQUIRE(it[i] == doctest::Approx(std::pow(g.node(i), 1.5) / std::tgamma(2.5)).epsilon(1e-11));
  CHECK_THROWS_AS(rl_integral(one, 0.0), DomainError);
  CHECK_NOTHROW(rl_integral(one, 1.5));
}

TEST_CASE("monomial accuracy improves under refinement") {
  for (double alpha : {0.3, 0.7}) {
    double prev_c = 0.0, prev_i = 0.0;
    for (int n : {64, 128, 256}) {
      const TimeGrid g(1.0, n);
      const CoefficientPath v = CoefficientPath::sample(g, [](double t) { return t * t; });
      const CoefficientPath d = caputo_l1(v, alpha), in = rl_integral(v, alpha);
      double ec = 0.0, ei = 0.0;
      for (int i = 1; i < g.size(); ++i) {
        const double t = g.node(i);
        ec = std::max(ec, std::abs(d[i] - 2.0 * std::pow(t, 2 - alpha) / std::tgamma(3 - alpha)));
        ei = std::max(ei, std::abs(in[i] - 2.0 * std::pow(t, 2 + alpha) / std::tgamma(3 + alpha)));
      }
      if (prev_c > 0.0) {
        CHECK(prev_c / ec > std::pow(2.0, 2 - alpha) * 0.9);
        CHECK(prev_i / ei > 3.5);  // second order
      }
      prev_c = ec;
      prev_i = ei;
    }
  }
}

TEST_CASE("composition_check") {
  auto residual = [](int n, double alpha, auto fn) {
    const TimeGrid g(1.0, n);
    return composition_check(CoefficientPath::sample(g, fn), alpha);
  };
  auto sq = [](double t) { return t * t; };
  const double r256 = residual(256, 0.5, sq), r128 = residual(128, 0.5, sq);
  CHECK(r256 < 5e-3);
  CHECK(r128 / r256 >= 1.4);
  CHECK(residual(64, 0.5, [](double) { return 4.0; }) < 1e-14);
  // 1 + t at alpha = 0.3: L1 is exact, the residual is the product rule on t^0.7
  // (2.2e-4 at N = 256, frozen at twice that)
  CHECK(residual(256, 0.3, [](double t) { return 1 + t; }) < 4.5e-4);
}

TEST_CASE("linearity on random paths") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const TimeGrid g(1.0, 100);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(g.size()), b(g.size());
    for (int i = 0; i < g.size(); ++i) a[i] = u(rng), b[i] = u(rng);
    const double c1 = u(rng), c2 = u(rng), alpha = 0.5 * (u(rng) + 1.0) * 0.98 + 0.01;
    const Eigen::VectorXd comb = c1 * a + c2 * b;
    const double h = g.step();
    CHECK(sup(caputo_l1(comb, h, alpha) - c1 * caputo_l1(a, h, alpha) - c2 * caputo_l1(b, h, alpha)) <
          1e-11 * (1 + sup(caputo_l1(a, h, alpha))));
    CHECK(sup(rl_integral(comb, h, alpha) - c1 * rl_integral(a, h, alpha) - c2 * rl_integral(b, h, alpha)) <
          1e-13);
  }
}

TEST_CASE("positivity and monotone inputs") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  const TimeGrid g(1.0, 200);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = 0.05 + 0.9 * u(rng);
    Eigen::VectorXd v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = u(rng);
    CHECK(rl_integral(v, g.step(), alpha).minCoeff() >= 0.0);
    for (int i = 1; i < g.size(); ++i) v[i] += v[i - 1];
    CHECK(caputo_l1(v, g.step(), alpha).minCoeff() >= 0.0);
  }
}

TEST_CASE("gronwall_bound") {
  CHECK(gronwall_bound(0.0, 3.0, 0.5, 1.0) == 0.0);
  CHECK(gronwall_bound(1.0, 0.0, 0.5, 1.0) == 1.0);
  const double arg = std::tgamma(0.5);
  // direct series of E_{1/2,1}(sqrt(pi))
  double s = 0.0;
  for (int k = 0; k < 200; ++k) s += std::pow(arg, k) / std::tgamma(0.5 * k + 1);
  CHECK(gronwall_bound(2.0, 1.0, 0.5, 1.0) == doctest::Approx(2.0 * s).epsilon(1e-12));
  CHECK_THROWS_AS(gronwall_bound(1.0, 100.0, 0.5, 1.0), OverflowError);
  CHECK_THROWS_AS(gronwall_bound(-1.0, 1.0, 0.5, 1.0), DomainError);
}

}  // TEST_SUITE
