#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "tfheat/error.hpp"
#include "tfheat/forward.hpp"
#include "tfheat/io.hpp"
#include "tfheat/mittag_leffler.hpp"
#include "tfheat/scenario.hpp"

using namespace tfheat;
using std::numbers::pi;

namespace {

double sup(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

CoefficientPath wavy(const TimeGrid& g) {
  return CoefficientPath::sample(g, [](double t) { return 1.0 + 0.5 * std::sin(2 * pi * t); });
}

ProblemData parabola_data(const TimeGrid& g, double alpha, int n = 16) {
  const ModeSet m = dirichlet_mode_set(n, {}, 0.0);
  Eigen::VectorXd h(n);
  for (int k = 1; k <= n; ++k) h[k - 1] = k % 2 ? 4 * std::sqrt(2.0) / std::pow(k * pi, 3) : 0.0;
  return ProblemData{m, h, Eigen::MatrixXd::Zero(n, g.size()), alpha, g};
}

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("VolterraWeights rows are nonnegative and carry the kernel mass") {
  const TimeGrid g(1.0, 40);
  for (bool power : {false, true}) {
    const VolterraWeights w(0.4, 7.0, g, power);
    for (int n = 1; n <= 40; ++n) {
      double row = 0.0;
      for (int j = 0; j <= n; ++j) {
        REQUIRE(w.weight(n, j) >= 0.0);
        row += w.weight(n, j);
      }
      CHECK(row == doctest::Approx(w.mass(n)).epsilon(1e-12));
      CHECK(w.mass(n) == doctest::Approx(std::pow(g.node(n), 0.4) *
                                         ml_eval(0.4, 1.4, -7.0 * std::pow(g.node(n), 0.4)))
                             .epsilon(1e-10));
    }
  }
}

TEST_CASE("picard: constant sigma closed form") {
  const TimeGrid g(1.0, 512);
  const double c = 1.3;
  const auto tr = solve_mode_picard(pi * pi, CoefficientPath::constant(g, c), CoefficientPath::constant(g, 0.0),
                                    1.0, 0.5);
  double err = 0.0;
  for (int i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(tr.values[i] - ml_eval(0.5, 1.0, -pi * pi * c * std::sqrt(g.node(i)))));
  CHECK(err <= 1e-4);
  CHECK(tr.diagnostics.contraction <= (tr.diagnostics.splitting - c) / tr.diagnostics.splitting + 0.05);
}

TEST_CASE("picard: zero data gives zero in one iteration") {
  const TimeGrid g(1.0, 64);
  const auto tr = solve_mode_picard(4.0, wavy(g), CoefficientPath::constant(g, 0.0), 0.0, 0.5);
  CHECK(sup(tr.values) == 0.0);
  CHECK(tr.diagnostics.iterations == 1);
}

TEST_CASE("picard and l1 agree under refinement") {
  auto diff = [](int n) {
    const TimeGrid g(1.0, n);
    const auto f = CoefficientPath::sample(g, [](double t) { return 1 + t; });
    const auto a = solve_mode_picard(4.0, wavy(g), f, 1.0, 0.6);
    const auto b = solve_mode_l1(4.0, wavy(g), f, 1.0, 0.6);
    return sup(a.values - b.values);
  };
  // f(0) != mu sigma(0) h0: the L1 oracle carries an O(h^alpha) layer error
  // (measured 3.25e-2, 2.27e-2, 1.55e-2), so only the trend and a frozen bound are checked
  const double d1 = diff(128), d2 = diff(256), d3 = diff(512);
  CHECK(d1 / d2 > 1.3);
  CHECK(d2 / d3 > 1.3);
  CHECK(d3 < 3.2e-2);
}

TEST_CASE("l1 examples") {
  const TimeGrid g(1.0, 256);
  const double mu = 3.0;
  const auto sigma = wavy(g);
  const CoefficientPath f(g, mu * sigma.values());
  CHECK(sup(solve_mode_l1(mu, sigma, f, 1.0, 0.5).values.array() - 1.0) < 1e-14);

  const auto one = CoefficientPath::constant(g, 1.0), zero = CoefficientPath::constant(g, 0.0);
  auto l1_error = [](int n) {
    const TimeGrid gg(1.0, n);
    const auto tr = solve_mode_l1(1.0, CoefficientPath::constant(gg, 1.0), CoefficientPath::constant(gg, 0.0), 1.0, 0.5);
    double e = 0.0;
    for (int i = 0; i < gg.size(); ++i) e = std::max(e, std::abs(tr.values[i] - ml_eval(0.5, 1.0, -std::sqrt(gg.node(i)))));
    return e;
  };
  // sup error is set by the t^alpha layer: 1.43e-2 at N = 256, 1.03e-2 at N = 512
  const double e256 = l1_error(256), e512 = l1_error(512);
  CHECK(e256 < 2.9e-2);
  CHECK(e256 / e512 > 1.3);

  const TimeGrid g2(1.0, 512);
  const auto near1 = solve_mode_l1(1.0, CoefficientPath::constant(g2, 1.0), CoefficientPath::constant(g2, 0.0),
                                   1.0, 0.999);
  double e2 = 0.0;
  for (int i = 0; i < g2.size(); ++i) e2 = std::max(e2, std::abs(near1.values[i] - std::exp(-g2.node(i))));
  CHECK(e2 < 2e-3);
}

TEST_CASE("solve_forward: constant-state single mode") {
  const TimeGrid g(1.0, 64);
  const ModeSet m(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1));
  const auto sigma = wavy(g);
  ProblemData d{m, Eigen::VectorXd::Ones(1), sigma.values().transpose(), 0.5, g};
  for (auto method : {ForwardMethod::picard, ForwardMethod::l1}) {
    const auto field = solve_forward({d, sigma, method, {}});
    CHECK(field.values(0, 0) == 1.0);
    CHECK((field.values.array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(field.caputo.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(sup(observe(field, m).values().array() - 1.0) < 1e-9);
    CHECK(holder_modulus(field, 0.5) < 1e-7);
  }
}

TEST_CASE("solve_forward: 16 modes, sigma = 1, closed form per mode") {
  const TimeGrid g(1.0, 256);
  const auto d = parabola_data(g, 0.5);
  const auto field = solve_forward({d, CoefficientPath::constant(g, 1.0), ForwardMethod::picard, {}});
  double err = 0.0;
  for (int k = 0; k < 16; ++k)
    for (int i = 0; i < g.size(); ++i)
      err = std::max(err, std::abs(field.values(k, i) - d.initial[k] * ml_eval(0.5, 1.0, -d.modes.eigenvalues()[k] *
                                                                                           std::sqrt(g.node(i)))));
  CHECK(err < 1e-10);
  CHECK((field.values.col(0) - d.initial).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_forward: oscillating sigma respects the comparison bounds") {
  const TimeGrid g(1.0, 512);
  const auto d = parabola_data(g, 0.5);
  const ForwardProblem p{d, wavy(g), ForwardMethod::picard, {}};
  const auto rep = comparison_bound_check(solve_forward(p), p);
  CHECK(rep.homogeneous_violation <= 1e-3);
  CHECK(rep.source_violation == 0.0);
}

TEST_CASE("comparison bounds: source part at constant sigma is tight") {
  const TimeGrid g(1.0, 256);
  auto d = parabola_data(g, 0.7, 4);
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < g.size(); ++i) d.source(k, i) = (k + 1) * (1.0 + std::cos(3 * g.node(i)));
  const ForwardProblem p{d, CoefficientPath::constant(g, 0.8), ForwardMethod::picard, {}};
  const auto rep = comparison_bound_check(solve_forward(p), p);
  CHECK(rep.max_violation() < 1e-5);
}

TEST_CASE("observe") {
  const TimeGrid g(1.0, 128);
  const auto d = parabola_data(g, 0.5, 1);
  ProblemData one = d;
  one.initial << 1.0;
  const auto field = solve_forward({one, CoefficientPath::constant(g, 1.0), ForwardMethod::picard, {}});
  const auto e = observe(field, one.modes);
  for (int i = 0; i < g.size(); i += 16)
    CHECK(e[i] == doctest::Approx(2 * std::sqrt(2.0) / pi * ml_eval(0.5, 1.0, -pi * pi * std::sqrt(g.node(i))))
                      .epsilon(1e-9));
  SolutionField zero = field;
  zero.values.setZero();
  CHECK(sup(observe(zero, one.modes).values()) == 0.0);
  CHECK_THROWS_AS(observe(field, dirichlet_mode_set(2, {}, 0.0)), ShapeError);
}

TEST_CASE("holder modulus") {
  auto modulus = [](int n) {
    const TimeGrid g(1.0, n);
    const ModeSet m(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1));
    ProblemData d{m, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, g.size()), 0.5, g};
    return holder_modulus(solve_forward({d, CoefficientPath::constant(g, 1.0), ForwardMethod::picard, {}}), 0.5);
  };
  const double a = modulus(256), b = modulus(512);
  CHECK(std::isfinite(a));
  CHECK(std::abs(a - b) / b < 0.1);

  const TimeGrid g(2.0, 50);
  SolutionField line{g, Eigen::MatrixXd(1, g.size()), Eigen::MatrixXd::Zero(1, g.size()), {}, ForwardMethod::l1};
  line.values.row(0) = 3.0 * g.nodes().transpose();
  CHECK(holder_modulus(line, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("monotone damping at constant sigma") {
  const TimeGrid g(1.0, 256);
  auto d = parabola_data(g, 0.4, 6);
  d.initial = Eigen::VectorXd::LinSpaced(6, 0.5, 2.0);
  for (auto method : {ForwardMethod::picard, ForwardMethod::l1}) {
    const auto field = solve_forward({d, CoefficientPath::constant(g, 0.7), method, {}});
    for (int k = 0; k < 6; ++k)
      for (int i = 1; i < g.size(); ++i) REQUIRE(field.values(k, i) <= field.values(k, i - 1) + 1e-14);
  }
}

TEST_CASE("random positivity and box property") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  const TimeGrid g(1.0, 128);
  for (int trial = 0; trial < 40; ++trial) {
    const double alpha = 0.1 + 0.85 * u(rng), mu = std::pow(10.0, 3 * u(rng)), h0 = 2 * u(rng);
    const double s0 = 0.3 + 2.7 * u(rng), s1 = 0.3 + 2.7 * u(rng), fa = u(rng), fb = 3 * u(rng);
    const auto sigma = CoefficientPath::sample(g, [&](double t) { return s0 + (s1 - s0) * t * t; });
    const auto f = CoefficientPath::sample(g, [&](double t) { return fa * std::abs(std::sin(fb * t)); });
    const Eigen::VectorXd box = h0 + rl_integral(f, alpha).values().array();
    for (auto tr : {solve_mode_picard(mu, sigma, f, h0, alpha), solve_mode_l1(mu, sigma, f, h0, alpha)}) {
      REQUIRE(tr.values.minCoeff() >= -1e-10);
      REQUIRE((tr.values - box).maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("Picard map contraction on random pairs") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  const TimeGrid g(1.0, 128);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sigma = CoefficientPath::sample(g, [&, a = u(rng)](double t) { return 0.5 + a * (1 + std::cos(5 * t)); });
    const PicardMap map(10.0 * u(rng) + 0.1, sigma, CoefficientPath::constant(g, 1.0), 1.0, 0.5, 1.05 * sigma.max());
    Eigen::VectorXd a(g.size()), b(g.size());
    for (int i = 0; i < g.size(); ++i) a[i] = u(rng), b[i] = u(rng);
    CHECK(sup(map.apply(a) - map.apply(b)) / sup(a - b) <= map.contraction_bound() + 0.05);
  }
}

TEST_CASE("forward errors") {
  const TimeGrid g(1.0, 64);
  const auto d = parabola_data(g, 0.5, 2);
  CHECK_THROWS_AS(solve_forward({d, CoefficientPath::constant(g, 0.0), ForwardMethod::picard, {}}), DomainError);
  PicardControls tight;
  tight.splitting = 0.9;
  CHECK_THROWS_AS(solve_forward({d, CoefficientPath::constant(g, 1.0), ForwardMethod::picard, tight}), DomainError);
  PicardControls one_step;
  one_step.max_iterations = 1;
  CHECK_THROWS_AS(solve_forward({d, wavy(g), ForwardMethod::picard, one_step}), NonConvergenceError);
  try {
    solve_forward({d, wavy(g), ForwardMethod::picard, one_step});
  } catch (const NonConvergenceError& e) {
    CHECK(std::string(e.what()).find("mode 1") != std::string::npos);
  }
  // splitting far below sigma: the map expands
  CHECK_THROWS_AS(solve_mode_picard(400.0, CoefficientPath::constant(g, 3.0), CoefficientPath::constant(g, 1.0), 1.0,
                                    0.5, PicardControls{1e-10, 200, 0.2, 1.05}),
                  NonConvergenceError);
  const TimeGrid other(1.0, 32);
  CHECK_THROWS_AS(solve_forward({d, CoefficientPath::constant(other, 1.0), ForwardMethod::picard, {}}), ShapeError);
  CHECK(forward_method_from_string("l1_stepping") == ForwardMethod::l1);
  CHECK_THROWS_AS(forward_method_from_string("euler"), ValidationError);
}

TEST_CASE("field export round trip") {
  const TimeGrid g(1.0, 16);
  const auto d = parabola_data(g, 0.5, 3);
  const auto field = solve_forward({d, wavy(g), ForwardMethod::l1, {}});
  const auto path = (std::filesystem::temp_directory_path() / "tfheat_field.csv").string();
  write_field_csv(field, path, d.modes.labels());
  const Table t = read_table(path);
  CHECK(t.header.size() == 4);
  CHECK(t.header[1] == "v_1");
  CHECK((t.data.rightCols(3).transpose() - field.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("golden: dirichlet-h-sine scenario") {
  const auto sc = resolve(load_scenario(std::string(TFHEAT_SCENARIO_DIR) + "/dirichlet-h-sine.json"));
  const auto field = solve_forward(sc.forward_problem());
  const Table golden = read_table(std::string(TFHEAT_GOLDEN_DIR) + "/dirichlet-h-sine.csv");
  REQUIRE(golden.data.rows() == field.grid.size());
  REQUIRE(golden.data.cols() == field.values.rows() + 2);
  const Eigen::MatrixXd v = golden.data.middleCols(1, field.values.rows()).transpose();
  CHECK((v - field.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((golden.data.col(golden.data.cols() - 1) - observe(field, sc.data.modes).values()).cwiseAbs().maxCoeff() <
        1e-12);
}

}  // TEST_SUITE
