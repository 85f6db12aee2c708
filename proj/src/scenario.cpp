#include "tfheat/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "tfheat/io.hpp"

namespace tfheat {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("scenario field '" + path + "': " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(join(path, it.key()), "unknown field");
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(join(path, key), "missing");
  return obj.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

int as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

// "kind" given either as a bare string or inside an object
std::string kind_of(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object()) return as_string(need(j, "kind", path), join(path, "kind"));
  fail(path, "expected a string or an object with 'kind'");
}

struct Context {
  std::filesystem::path base_dir;
  TimeGrid grid;
  int n_modes;
  bool dirichlet;
  const ModeSet* modes;

  std::string file(const json& j, const std::string& path) const {
    const std::filesystem::path p(as_string(j, path));
    return (p.is_absolute() ? p : base_dir / p).string();
  }
};

Eigen::VectorXd spatial(const json& j, const std::string& path, const Context& ctx) {
  Eigen::VectorXd raw;
  auto from_samples = [&](const Eigen::VectorXd& samples) {
    if (!ctx.dirichlet) fail(path, "spatial samples are only supported for the dirichlet operator");
    try {
      return sine_projection(samples, ctx.n_modes);
    } catch (const DomainError& e) {
      fail(path, e.what());
    }
  };
  if (j.is_number()) {
    if (as_number(j, path) != 0.0) fail(path, "a bare number must be 0");
    return Eigen::VectorXd::Zero(ctx.n_modes);
  } else if (j.is_array()) {
    raw = to_vector(as_numbers(j, path));
  } else if (j.is_object()) {
    if (j.contains("coefficients")) {
      allow_keys(j, path, {"coefficients"});
      raw = to_vector(as_numbers(j["coefficients"], join(path, "coefficients")));
    } else if (j.contains("samples")) {
      allow_keys(j, path, {"samples"});
      raw = from_samples(to_vector(as_numbers(j["samples"], join(path, "samples"))));
    } else if (j.contains("file")) {
      allow_keys(j, path, {"file", "kind"});
      const std::string kind = j.contains("kind") ? as_string(j["kind"], join(path, "kind")) : "coefficients";
      const Table t = read_table(ctx.file(j["file"], join(path, "file")));
      const Eigen::VectorXd col = t.data.col(t.data.cols() - 1);
      if (kind == "coefficients") raw = col;
      else if (kind == "samples") raw = from_samples(col);
      else fail(join(path, "kind"), "expected 'coefficients' or 'samples'");
    } else {
      fail(path, "expected 'coefficients', 'samples' or 'file'");
    }
  } else {
    fail(path, "expected coefficients");
  }
  if (raw.size() < ctx.n_modes)
    fail(path, "has " + std::to_string(raw.size()) + " coefficients, " +
                   std::to_string(ctx.n_modes) + " modes requested");
  return ctx.modes->orient(raw.head(ctx.n_modes));
}

CoefficientPath temporal(const json& j, const std::string& path, const Context& ctx) {
  const TimeGrid& g = ctx.grid;
  if (j.is_number()) return CoefficientPath::constant(g, as_number(j, path));
  if (!j.is_object()) fail(path, "expected a number or an object");
  if (j.contains("constant")) {
    allow_keys(j, path, {"constant"});
    return CoefficientPath::constant(g, as_number(j["constant"], join(path, "constant")));
  }
  if (j.contains("values")) {
    allow_keys(j, path, {"values"});
    auto v = as_numbers(j["values"], join(path, "values"));
    if (int(v.size()) != g.size())
      fail(join(path, "values"), "has " + std::to_string(v.size()) + " entries for " +
                                     std::to_string(g.size()) + " grid nodes");
    return CoefficientPath(g, to_vector(v));
  }
  if (j.contains("file")) {
    allow_keys(j, path, {"file"});
    const Table t = read_table(ctx.file(j["file"], join(path, "file")));
    if (t.data.rows() != g.size())
      fail(join(path, "file"), "has " + std::to_string(t.data.rows()) + " rows for " +
                                   std::to_string(g.size()) + " grid nodes");
    if (t.data.cols() == 2) {
      for (int i = 0; i < g.size(); ++i)
        if (std::abs(t.data(i, 0) - g.node(i)) > 1e-9 * g.horizon())
          fail(join(path, "file"), "time column does not match the grid at row " + std::to_string(i));
    } else if (t.data.cols() != 1) {
      fail(join(path, "file"), "expected one column (values) or two (t, value)");
    }
    return CoefficientPath(g, t.data.col(t.data.cols() - 1));
  }
  if (j.contains("series")) {
    allow_keys(j, path, {"series"});
    const json& s = j["series"];
    const std::string sp = join(path, "series");
    allow_keys(s, sp, {"mean", "slope", "cos", "sin"});
    const double mean = s.contains("mean") ? as_number(s["mean"], join(sp, "mean")) : 0.0;
    const double slope = s.contains("slope") ? as_number(s["slope"], join(sp, "slope")) : 0.0;
    std::vector<std::pair<double, double>> cos_terms, sin_terms;
    for (const char* key : {"cos", "sin"}) {
      if (!s.contains(key)) continue;
      const json& terms = s[key];
      if (!terms.is_array()) fail(join(sp, key), "expected [[amplitude, frequency], ...]");
      for (size_t i = 0; i < terms.size(); ++i) {
        auto pair = as_numbers(terms[i], join(sp, key) + "[" + std::to_string(i) + "]");
        if (pair.size() != 2) fail(join(sp, key), "each term is [amplitude, frequency]");
        (std::string(key) == "cos" ? cos_terms : sin_terms).emplace_back(pair[0], pair[1]);
      }
    }
    return CoefficientPath::sample(g, [&](double t) {
      double v = mean + slope * t;
      for (auto [a, nu] : cos_terms) v += a * std::cos(2.0 * std::numbers::pi * nu * t);
      for (auto [a, nu] : sin_terms) v += a * std::sin(2.0 * std::numbers::pi * nu * t);
      return v;
    });
  }
  fail(path, "expected 'constant', 'values', 'file' or 'series'");
}

Eigen::MatrixXd source(const json& j, const std::string& path, const Context& ctx) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(ctx.n_modes, ctx.grid.size());
  if (j.is_number()) {
    if (as_number(j, path) != 0.0) fail(path, "a bare number must be 0");
    return f;
  }
  if (!j.is_object()) fail(path, "expected an object");
  auto separable = [&](const json& term, const std::string& tp) {
    allow_keys(term, tp, {"space", "time"});
    const Eigen::VectorXd c = spatial(need(term, "space", tp), join(tp, "space"), ctx);
    const CoefficientPath th = temporal(need(term, "time", tp), join(tp, "time"), ctx);
    return Eigen::MatrixXd(c * th.values().transpose());
  };
  if (j.contains("terms")) {
    allow_keys(j, path, {"terms"});
    const json& terms = j["terms"];
    if (!terms.is_array()) fail(join(path, "terms"), "expected an array");
    for (size_t i = 0; i < terms.size(); ++i)
      f += separable(terms[i], join(path, "terms") + "[" + std::to_string(i) + "]");
    return f;
  }
  if (j.contains("file")) {
    allow_keys(j, path, {"file"});
    const Table t = read_table(ctx.file(j["file"], join(path, "file")));
    if (t.data.rows() != ctx.grid.size() || t.data.cols() < ctx.n_modes)
      fail(join(path, "file"), "expected one row per grid node and one column per mode");
    return ctx.modes->orient_rows(t.data.leftCols(ctx.n_modes).transpose());
  }
  return separable(j, path);
}

PicardControls picard_controls(const json& j, const std::string& path, ForwardMethod& method) {
  PicardControls c;
  allow_keys(j, path, {"method", "tolerance", "max_iterations", "splitting", "splitting_factor"});
  if (j.contains("method")) {
    try {
      method = forward_method_from_string(as_string(j["method"], join(path, "method")));
    } catch (const ValidationError& e) {
      fail(join(path, "method"), e.what());
    }
  }
  if (j.contains("tolerance")) c.tolerance = as_number(j["tolerance"], join(path, "tolerance"));
  if (j.contains("max_iterations")) c.max_iterations = as_count(j["max_iterations"], join(path, "max_iterations"));
  if (j.contains("splitting") && !j["splitting"].is_null())
    c.splitting = as_number(j["splitting"], join(path, "splitting"));
  if (j.contains("splitting_factor"))
    c.splitting_factor = as_number(j["splitting_factor"], join(path, "splitting_factor"));
  if (!(c.tolerance > 0.0)) fail(join(path, "tolerance"), "must be positive");
  if (c.max_iterations < 1) fail(join(path, "max_iterations"), "must be at least 1");
  if (!(c.splitting_factor > 1.0)) fail(join(path, "splitting_factor"), "must exceed 1");
  return c;
}

InverseControls inverse_controls(const json& j, const std::string& path) {
  InverseControls c;
  allow_keys(j, path, {"tolerance", "max_iterations", "damping", "start", "sweep"});
  if (j.contains("tolerance")) c.tolerance = as_number(j["tolerance"], join(path, "tolerance"));
  if (j.contains("max_iterations")) c.max_iterations = as_count(j["max_iterations"], join(path, "max_iterations"));
  if (j.contains("damping")) c.damping = as_number(j["damping"], join(path, "damping"));
  try {
    if (j.contains("start")) c.start = start_policy_from_string(as_string(j["start"], join(path, "start")));
    if (j.contains("sweep")) c.sweep = sweep_order_from_string(as_string(j["sweep"], join(path, "sweep")));
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  if (!(c.tolerance > 0.0)) fail(join(path, "tolerance"), "must be positive");
  if (c.max_iterations < 1) fail(join(path, "max_iterations"), "must be at least 1");
  if (!(c.damping > 0.0 && c.damping <= 1.0)) fail(join(path, "damping"), "must lie in (0, 1]");
  return c;
}

json path_json(const CoefficientPath& p) {
  return json(std::vector<double>(p.values().data(), p.values().data() + p.size()));
}

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

std::string to_string(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::forward: return "forward";
    case ScenarioMode::inverse: return "inverse";
    case ScenarioMode::stability: return "stability";
    case ScenarioMode::verify: return "verify";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const size_t upto = std::min<size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + long(upto), '\n');
    throw ValidationError("scenario line " + std::to_string(line) + ": syntax error: " + e.what());
  }
  allow_keys(doc, "", {"name", "description", "mode", "operator", "functional", "gamma", "alpha", "T",
                       "N", "n_modes", "h", "f", "sigma", "observation", "observation_caputo",
                       "sigma_true", "tolerance", "solver", "inverse", "perturbations", "seed"});
  Scenario s;
  s.name = as_string(need(doc, "name", ""), "name");
  const std::string mode = as_string(need(doc, "mode", ""), "mode");
  if (mode == "forward") s.mode = ScenarioMode::forward;
  else if (mode == "inverse") s.mode = ScenarioMode::inverse;
  else if (mode == "stability") s.mode = ScenarioMode::stability;
  else if (mode == "verify") s.mode = ScenarioMode::verify;
  else fail("mode", "expected forward, inverse, stability or verify");
  for (const char* key : {"alpha", "T", "N", "operator", "functional", "h"}) need(doc, key, "");
  const bool wants_sigma = s.mode == ScenarioMode::forward;
  const bool wants_obs = s.mode == ScenarioMode::inverse || s.mode == ScenarioMode::stability;
  if (wants_sigma) {
    need(doc, "sigma", "");
    for (const char* key : {"observation", "observation_caputo", "sigma_true", "tolerance", "inverse", "perturbations"})
      if (doc.contains(key)) fail(key, "not allowed in forward mode");
  }
  if (wants_obs) {
    need(doc, "observation", "");
    if (doc.contains("sigma")) fail("sigma", "not allowed in " + mode + " mode (use observation.from_forward)");
  }
  if (s.mode == ScenarioMode::stability) need(doc, "perturbations", "");
  else if (doc.contains("perturbations") && s.mode != ScenarioMode::verify)
    fail("perturbations", "only allowed in stability mode");
  s.document = std::move(doc);
  s.base_dir = base_dir;
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

ResolvedScenario resolve(const Scenario& scenario, const Overrides& overrides) {
  const json& d = scenario.document;
  ResolvedScenario r{.name = scenario.name,
                     .mode = scenario.mode,
                     .operator_kind = "",
                     .functional_kind = "",
                     .data = ProblemData{ModeSet(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)),
                                         {}, {}, 0.5, TimeGrid(1.0, 2)},
                     .sigma = {}, .observation = {}, .observation_caputo = {}, .sigma_true = {},
                     .roundtrip_tolerance = {}, .method = ForwardMethod::picard, .picard = {},
                     .inverse = {}, .perturbations = {}, .seed = 20240601};

  const double alpha = as_number(d["alpha"], "alpha");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha", "must lie in (0, 1)");
  const double horizon = as_number(d["T"], "T");
  if (!(horizon > 0.0)) fail("T", "must be positive");
  const int steps = overrides.grid.value_or(as_count(d["N"], "N"));
  if (steps < 2) fail("N", "must be at least 2");
  const TimeGrid grid(horizon, steps);
  const double gamma = d.contains("gamma") ? as_number(d["gamma"], "gamma") : 0.0;
  if (gamma < 0.0) fail("gamma", "must be nonnegative");
  if (d.contains("seed")) {
    if (!d["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    r.seed = d["seed"].get<std::uint64_t>();
  }
  if (overrides.seed) r.seed = *overrides.seed;

  // spectrum and weights
  r.operator_kind = kind_of(d["operator"], "operator");
  r.functional_kind = kind_of(d["functional"], "functional");
  std::optional<int> n_modes;
  if (d.contains("n_modes")) n_modes = as_count(d["n_modes"], "n_modes");
  if (overrides.modes) n_modes = *overrides.modes;
  Eigen::VectorXd mu;
  std::optional<Eigen::VectorXd> table_weights;
  if (r.operator_kind == "table") {
    allow_keys(d["operator"], "operator", {"kind", "path"});
    Context tmp{scenario.base_dir, grid, 0, false, nullptr};
    const Table t = read_table(tmp.file(need(d["operator"], "path", "operator"), "operator.path"));
    if (t.data.cols() != 2) fail("operator.path", "expected two columns (mu, phi)");
    const int rows = int(t.data.rows());
    if (!n_modes) n_modes = rows;
    if (*n_modes > rows) fail("n_modes", "table has only " + std::to_string(rows) + " rows");
    mu = t.data.col(0).head(*n_modes);
    table_weights = t.data.col(1).head(*n_modes);
  } else {
    if (!n_modes) fail("n_modes", "missing");
    if (*n_modes < 1) fail("n_modes", "must be at least 1");
    if (r.operator_kind == "dirichlet") {
      if (d["operator"].is_object()) allow_keys(d["operator"], "operator", {"kind"});
      mu = dirichlet_laplacian_modes(*n_modes);
    } else if (r.operator_kind == "involution") {
      allow_keys(d["operator"], "operator", {"kind", "eps"});
      const double eps = as_number(need(d["operator"], "eps", "operator"), "operator.eps");
      if (!(std::abs(eps) < 1.0)) fail("operator.eps", "|eps| must be < 1");
      mu = involution_modes(*n_modes, eps);
    } else if (r.operator_kind == "oscillator") {
      if (d["operator"].is_object()) allow_keys(d["operator"], "operator", {"kind"});
      mu = harmonic_oscillator_modes(*n_modes);
    } else {
      fail("operator.kind", "expected dirichlet, involution, oscillator or table");
    }
  }
  const int n = *n_modes;
  const bool dirichlet = r.operator_kind == "dirichlet";
  std::optional<ModeSet> modes;
  try {
    if (r.functional_kind == "table") {
      if (!table_weights) fail("functional", "'table' requires a table operator");
      modes.emplace(mu, *table_weights, gamma);
    } else if (r.functional_kind == "weights") {
      allow_keys(d["functional"], "functional", {"kind", "values"});
      auto w = to_vector(as_numbers(need(d["functional"], "values", "functional"), "functional.values"));
      if (w.size() < n) fail("functional.values", "fewer weights than modes");
      modes.emplace(mu, w.head(n), gamma);
    } else {
      if (!dirichlet) fail("functional", "built-in functionals assume the dirichlet sine basis");
      Functional fn;
      if (r.functional_kind == "point") {
        allow_keys(d["functional"], "functional", {"kind", "x"});
        fn.kind = FunctionalKind::point;
        fn.point = as_number(need(d["functional"], "x", "functional"), "functional.x");
      } else {
        if (d["functional"].is_object()) allow_keys(d["functional"], "functional", {"kind"});
        fn.kind = functional_kind_from_string(r.functional_kind);
      }
      modes.emplace(dirichlet_mode_set(n, fn, gamma));
    }
  } catch (const DomainError& e) {
    fail("functional", e.what());
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind("scenario field", 0) == 0) throw;
    fail("functional", msg);
  }

  const Context ctx{scenario.base_dir, grid, n, dirichlet, &*modes};
  r.data = ProblemData{*modes, spatial(d["h"], "h", ctx),
                       d.contains("f") ? source(d["f"], "f", ctx)
                                       : Eigen::MatrixXd::Zero(n, grid.size()),
                       alpha, grid};

  if (d.contains("solver")) r.picard = picard_controls(d["solver"], "solver", r.method);
  if (overrides.method) r.method = *overrides.method;
  if (d.contains("inverse")) r.inverse = inverse_controls(d["inverse"], "inverse");
  r.inverse.method = r.method;
  r.inverse.picard = r.picard;

  if (d.contains("sigma")) {
    r.sigma = temporal(d["sigma"], "sigma", ctx);
    if (!(r.sigma->min() > 0.0)) fail("sigma", "must be positive on the grid");
  }
  if (d.contains("observation")) {
    const json& o = d["observation"];
    if (o.is_object() && o.contains("from_forward")) {
      allow_keys(o, "observation", {"from_forward"});
      const json& ff = o["from_forward"];
      allow_keys(ff, "observation.from_forward", {"sigma", "method"});
      CoefficientPath target = temporal(need(ff, "sigma", "observation.from_forward"),
                                        "observation.from_forward.sigma", ctx);
      if (!(target.min() > 0.0)) fail("observation.from_forward.sigma", "must be positive on the grid");
      ForwardMethod m = ForwardMethod::l1;
      if (ff.contains("method")) {
        try {
          m = forward_method_from_string(as_string(ff["method"], "observation.from_forward.method"));
        } catch (const ValidationError& e) {
          fail("observation.from_forward.method", e.what());
        }
      }
      const SolutionField field = solve_forward(ForwardProblem{r.data, target, m, r.picard});
      r.observation = observe(field, *modes);
      r.sigma_true = target;
    } else {
      r.observation = temporal(o, "observation", ctx);
    }
  }
  if (d.contains("observation_caputo"))
    r.observation_caputo = temporal(d["observation_caputo"], "observation_caputo", ctx).values();
  if (d.contains("sigma_true")) r.sigma_true = temporal(d["sigma_true"], "sigma_true", ctx);
  if (d.contains("tolerance")) {
    r.roundtrip_tolerance = as_number(d["tolerance"], "tolerance");
    if (!(*r.roundtrip_tolerance > 0.0)) fail("tolerance", "must be positive");
  }
  if (d.contains("perturbations")) {
    const json& ps = d["perturbations"];
    if (!ps.is_array()) fail("perturbations", "expected an array");
    for (size_t i = 0; i < ps.size(); ++i) {
      const std::string pp = "perturbations[" + std::to_string(i) + "]";
      allow_keys(ps[i], pp, {"kind", "scale"});
      const std::string kind = as_string(need(ps[i], "kind", pp), join(pp, "kind"));
      Perturbation p{PerturbationKind::observation, as_number(need(ps[i], "scale", pp), join(pp, "scale"))};
      if (kind == "h") p.kind = PerturbationKind::initial;
      else if (kind == "f") p.kind = PerturbationKind::source;
      else if (kind != "E") fail(join(pp, "kind"), "expected h, f or E");
      r.perturbations.push_back(p);
    }
  }
  try {
    r.data.validate();
  } catch (const std::exception& e) {
    fail("", e.what());
  }
  return r;
}

ForwardProblem ResolvedScenario::forward_problem() const {
  if (!sigma) throw ValidationError("scenario '" + name + "' has no sigma");
  return ForwardProblem{data, *sigma, method, picard};
}

InverseProblem ResolvedScenario::inverse_problem() const {
  if (!observation) throw ValidationError("scenario '" + name + "' has no observation");
  return InverseProblem{data, *observation, observation_caputo, inverse};
}

nlohmann::json ResolvedScenario::manifest() const {
  json m;
  m["name"] = name;
  m["mode"] = to_string(mode);
  m["operator"] = operator_kind;
  m["functional"] = functional_kind;
  m["alpha"] = data.alpha;
  m["T"] = data.grid.horizon();
  m["N"] = data.grid.steps();
  m["n_modes"] = data.modes.size();
  m["gamma"] = data.modes.gamma();
  m["labels"] = data.modes.labels();
  m["eigenvalues"] = vec_json(data.modes.eigenvalues());
  m["weights"] = vec_json(data.modes.weights());
  m["orientation"] = vec_json(data.modes.orientation());
  m["h"] = vec_json(data.initial);
  m["method"] = to_string(method);
  m["solver"] = {{"tolerance", picard.tolerance},
                 {"max_iterations", picard.max_iterations},
                 {"splitting", picard.splitting ? json(*picard.splitting) : json(nullptr)},
                 {"splitting_factor", picard.splitting_factor}};
  m["seed"] = seed;
  if (sigma) m["sigma"] = path_json(*sigma);
  if (observation) {
    m["observation"] = path_json(*observation);
    m["inverse"] = {{"tolerance", inverse.tolerance},
                    {"max_iterations", inverse.max_iterations},
                    {"damping", inverse.damping},
                    {"start", to_string(inverse.start)},
                    {"sweep", to_string(inverse.sweep)}};
  }
  if (sigma_true) m["sigma_true"] = path_json(*sigma_true);
  if (roundtrip_tolerance) m["tolerance"] = *roundtrip_tolerance;
  if (!perturbations.empty()) {
    json ps = json::array();
    for (const auto& p : perturbations) ps.push_back({{"kind", to_string(p.kind)}, {"scale", p.scale}});
    m["perturbations"] = ps;
  }
  return m;
}

}  // namespace tfheat
