// tfheat: scenario runner for the time-fractional heat solvers.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tfheat/error.hpp"
#include "tfheat/io.hpp"
#include "tfheat/mittag_leffler.hpp"
#include "tfheat/scenario.hpp"
#include "tfheat/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tfheat;

namespace {

enum Exit { kOk = 0, kValidation = 1, kSolver = 2, kAcceptance = 3 };

struct Options {
  std::string scenario;
  std::string out;
  std::optional<int> modes;
  std::optional<int> grid;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  bool ml_debug = false;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

std::vector<std::string> mode_header(const std::string& first, const std::vector<int>& labels) {
  std::vector<std::string> h{first};
  for (int l : labels) h.push_back("v_" + std::to_string(l));
  return h;
}

json mode_diagnostics(const SolutionField& field, const ModeSet& modes) {
  json a = json::array();
  for (size_t k = 0; k < field.diagnostics.size(); ++k) {
    const auto& d = field.diagnostics[k];
    a.push_back({{"mode", modes.labels()[k]},
                 {"iterations", d.iterations},
                 {"residual", d.residual},
                 {"contraction", d.contraction},
                 {"splitting", d.splitting}});
  }
  return a;
}

json inverse_diagnostics(const InverseDiagnostics& d) {
  json recs = json::array();
  for (const auto& r : d.records)
    recs.push_back({{"iteration", r.iteration},
                    {"update", r.update},
                    {"min_denominator", r.min_denominator},
                    {"clamped", r.clamped},
                    {"forward_iterations", r.forward_iterations},
                    {"damping", r.damping},
                    {"sigma_min", r.sigma_min},
                    {"sigma_max", r.sigma_max}});
  return {{"bracket",
           {{"C0", d.bracket.c0}, {"C1", d.bracket.c1}, {"C2", d.bracket.c2}, {"C3", d.bracket.c3},
            {"lower", d.bracket.lower()}, {"upper", d.bracket.upper()}}},
          {"records", recs},
          {"status", d.status}};
}

// t, v_1..v_N, E
void write_field(const fs::path& dir, const SolutionField& field, const ModeSet& modes) {
  const CoefficientPath e = observe(field, modes);
  Eigen::MatrixXd table(field.grid.size(), field.values.rows() + 2);
  table.col(0) = field.grid.nodes();
  table.middleCols(1, field.values.rows()) = field.values.transpose();
  table.col(table.cols() - 1) = e.values();
  auto header = mode_header("t", modes.labels());
  header.push_back("E");
  write_table((dir / "data.csv").string(), header, table);
}

ResolvedScenario load(const Options& o) {
  Overrides ov;
  ov.modes = o.modes;
  ov.grid = o.grid;
  ov.seed = o.seed;
  if (o.method) ov.method = forward_method_from_string(*o.method);
  return resolve(load_scenario(o.scenario), ov);
}

fs::path output_dir(const Options& o, const ResolvedScenario& sc) {
  fs::path dir = o.out.empty() ? fs::path("out") / sc.name : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

int run_forward(const ResolvedScenario& sc, const fs::path& dir, json& diag) {
  const ForwardProblem p = sc.forward_problem();
  const SolutionField field = solve_forward(p);
  write_field(dir, field, sc.data.modes);
  const CoefficientPath e = observe(field, sc.data.modes);
  Eigen::MatrixXd obs(e.size(), 2);
  obs << field.grid.nodes(), e.values();
  write_table((dir / "observation.csv").string(), {"t", "E"}, obs);
  diag["method"] = to_string(field.method);
  diag["modes"] = mode_diagnostics(field, sc.data.modes);
  std::cout << "forward: " << field.values.rows() << " modes, " << field.grid.steps() << " steps, E(T) = "
            << format_number(e[e.size() - 1]) << '\n';
  return kOk;
}

int run_inverse(const ResolvedScenario& sc, const fs::path& dir, json& diag) {
  const InverseProblem p = sc.inverse_problem();
  const AdmissibilityReport adm = admissibility_check(p);
  diag["admissibility"] = {{"passed", adm.passed()}, {"summary", adm.summary()}};
  const InverseResult res = solve_inverse(p);
  diag["inverse"] = inverse_diagnostics(res.diagnostics);
  diag["modes"] = mode_diagnostics(res.field, sc.data.modes);

  const TimeGrid& g = sc.data.grid;
  const bool has_truth = sc.sigma_true.has_value();
  Eigen::MatrixXd sig(g.size(), has_truth ? 3 : 2);
  sig.col(0) = g.nodes();
  sig.col(1) = res.sigma.values();
  std::vector<std::string> header{"t", "sigma"};
  if (has_truth) {
    sig.col(2) = sc.sigma_true->values();
    header.push_back("sigma_true");
  }
  write_table((dir / "sigma.csv").string(), header, sig);
  write_field(dir, res.field, sc.data.modes);

  const CoefficientPath model = observe(res.field, sc.data.modes);
  const Eigen::VectorXd fixed = apply_P(p, res.sigma).values() - res.sigma.values();
  Eigen::MatrixXd obs(g.size(), 4);
  obs << g.nodes(), p.observation.values(), model.values(), model.values() - p.observation.values();
  write_table((dir / "observation.csv").string(), {"t", "E", "E_model", "residual"}, obs);
  diag["residuals"] = {{"fixed_point", fixed.cwiseAbs().maxCoeff()},
                       {"observation", (model.values() - p.observation.values()).cwiseAbs().maxCoeff()}};

  std::cout << "inverse: " << res.diagnostics.records.size() << " iterations, status "
            << res.diagnostics.status << ", bracket [" << format_number(res.diagnostics.bracket.lower())
            << ", " << format_number(res.diagnostics.bracket.upper()) << "]\n";
  if (has_truth) {
    const double err = (res.sigma.values() - sc.sigma_true->values()).cwiseAbs().maxCoeff();
    diag["sigma_error"] = err;
    std::cout << "sigma error (sup) = " << format_number(err);
    if (sc.roundtrip_tolerance) {
      const bool ok = err <= *sc.roundtrip_tolerance;
      diag["roundtrip"] = {{"tolerance", *sc.roundtrip_tolerance}, {"passed", ok}};
      std::cout << " tolerance " << format_number(*sc.roundtrip_tolerance) << (ok ? " PASS" : " FAIL");
      std::cout << '\n';
      return ok ? kOk : kAcceptance;
    }
    std::cout << '\n';
  }
  return kOk;
}

int run_stability(const ResolvedScenario& sc, const fs::path& dir, json& diag) {
  const StabilityTable t = stability_experiment(sc.inverse_problem(), sc.perturbations);
  std::ofstream out(dir / "stability.csv");
  out << "kind,scale,solved,input_size,sigma_deviation,field_deviation\n";
  json rows = json::array();
  for (const auto& r : t.rows) {
    out << to_string(r.perturbation.kind) << ',' << format_number(r.perturbation.scale) << ','
        << (r.solved ? 1 : 0) << ',' << format_number(r.input_size) << ','
        << format_number(r.sigma_deviation) << ',' << format_number(r.field_deviation) << '\n';
    rows.push_back({{"kind", to_string(r.perturbation.kind)},
                    {"scale", r.perturbation.scale},
                    {"solved", r.solved},
                    {"note", r.note},
                    {"input_size", r.input_size},
                    {"sigma_deviation", r.sigma_deviation},
                    {"field_deviation", r.field_deviation}});
  }
  diag["stability"] = {{"rows", rows},
                       {"sigma_slope", t.sigma_slope},
                       {"field_slope", t.field_slope},
                       {"sigma_constant", t.sigma_constant}};
  std::cout << "stability: sigma slope " << format_number(t.sigma_slope) << ", field slope "
            << format_number(t.field_slope) << '\n';
  return kOk;
}

int run_verify(const ResolvedScenario& sc, const fs::path& dir, json& diag) {
  const VerifyReport rep = run_verification(sc);
  for (const auto& c : rep.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.suite << '.' << c.name << "  " << c.detail << '\n';
  diag["verify"] = rep.to_json();
  write_json(dir / "verify.json", rep.to_json());
  std::cout << "seed " << rep.seed << ", " << (rep.passed() ? "all checks passed" : "FAILURES") << '\n';
  return rep.passed() ? kOk : kAcceptance;
}

int cmd_run(const Options& o, bool force_verify) {
  const ResolvedScenario sc = load(o);
  const fs::path dir = output_dir(o, sc);
  write_json(dir / "manifest.json", sc.manifest());
  json diag;
  diag["scenario"] = sc.name;
  diag["seed"] = sc.seed;
  int code = kOk;
  if (force_verify || sc.mode == ScenarioMode::verify) {
    code = run_verify(sc, dir, diag);
  } else {
    switch (sc.mode) {
      case ScenarioMode::forward: code = run_forward(sc, dir, diag); break;
      case ScenarioMode::inverse: code = run_inverse(sc, dir, diag); break;
      case ScenarioMode::stability: code = run_stability(sc, dir, diag); break;
      case ScenarioMode::verify: break;
    }
  }
  write_json(dir / "diagnostics.json", diag);
  std::cout << "wrote " << dir.string() << '\n';
  return code;
}

int cmd_describe(const Options& o) {
  const ResolvedScenario sc = load(o);
  const ModeSet& m = sc.data.modes;
  const TimeGrid& g = sc.data.grid;
  std::ostringstream os;
  os << "scenario    " << sc.name << " (" << to_string(sc.mode) << ")\n";
  os << "operator    " << sc.operator_kind << ", " << m.size() << " modes, mu in ["
     << format_number(m.eigenvalues().minCoeff()) << ", " << format_number(m.eigenvalues().maxCoeff())
     << "]\n";
  const auto& w = m.weights();
  int nonzero = 0;
  for (int i = 0; i < w.size(); ++i) nonzero += w[i] != 0.0;
  os << "functional  " << sc.functional_kind << ", phi in [" << format_number(w.minCoeff()) << ", "
     << format_number(w.maxCoeff()) << "], " << nonzero << " nonzero\n";
  os << "weights    ";
  for (int i = 0; i < std::min<int>(8, w.size()); ++i) os << ' ' << format_number(w[i]);
  if (w.size() > 8) os << " ...";
  os << '\n';
  if (m.size() >= 8) {
    const GammaReport rep = gamma_admissibility(w, m.eigenvalues(), m.gamma());
    os << "gamma       " << format_number(m.gamma()) << " " << (rep.admissible ? "admissible" : "NOT admissible")
       << " (tail exponent " << format_number(rep.tail_exponent) << ")\n";
  } else {
    os << "gamma       " << format_number(m.gamma()) << " (fewer than 8 modes, not assessed)\n";
  }
  os << "order       alpha = " << format_number(sc.data.alpha) << '\n';
  os << "grid        T = " << format_number(g.horizon()) << ", N = " << g.steps()
     << ", h = " << format_number(g.step()) << '\n';
  os << "method      " << to_string(sc.method) << ", tolerance " << format_number(sc.picard.tolerance) << '\n';
  if (sc.observation) {
    const InverseProblem p = sc.inverse_problem();
    const AdmissibilityReport adm = admissibility_check(p);
    os << "admissible  " << (adm.passed() ? "yes" : "no") << '\n';
    if (adm.passed()) {
      const DomainBracket b = domain_bounds(p);
      os << "bracket     [" << format_number(b.lower()) << ", " << format_number(b.upper()) << "]  C0="
         << format_number(b.c0) << " C1=" << format_number(b.c1) << " C2=" << format_number(b.c2)
         << " C3=" << format_number(b.c3) << '\n';
    } else {
      os << adm.summary() << '\n';
    }
  }
  // one forward solve: O(N^2) history sums per Picard sweep and mode, ~10 sweeps
  const double work = double(m.size()) * double(g.steps()) * double(g.steps()) * 10.0;
  os << "cost        ~" << std::scientific << std::setprecision(1) << work << " flops per forward solve\n";
  std::cout << os.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-fractional heat equation: forward solves and coefficient recovery"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "scenario document (JSON)")->required();
    sub->add_option("--modes", o.modes, "override n_modes");
    sub->add_option("--grid", o.grid, "override N");
    sub->add_option("--method", o.method, "forward method")->check(CLI::IsMember({"picard", "l1"}));
    sub->add_option("--seed", o.seed, "seed for randomized checks");
    sub->add_flag("--ml-debug", o.ml_debug)->group("");
  };
  auto* run = app.add_subcommand("run", "solve the scenario and write outputs");
  add_common(run);
  run->add_option("--out", o.out, "output directory (default out/<name>)");
  auto* describe = app.add_subcommand("describe", "print the resolved configuration");
  add_common(describe);
  auto* verify = app.add_subcommand("verify", "run the invariant suites on the scenario");
  add_common(verify);
  verify->add_option("--out", o.out, "output directory (default out/<name>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  set_ml_debug(o.ml_debug);

  try {
    if (run->parsed()) return cmd_run(o, false);
    if (describe->parsed()) return cmd_describe(o);
    if (verify->parsed()) return cmd_run(o, true);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const ShapeError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const InadmissibleError& e) {
    std::cerr << "inadmissible data: " << e.what() << '\n';
    return kValidation;
  } catch (const InverseNonConvergence& e) {
    std::cerr << "inverse: " << e.what() << '\n';
    return kSolver;
  } catch (const NonConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const DegenerateDenominatorError& e) {
    std::cerr << "inverse: " << e.what() << '\n';
    return kSolver;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}
