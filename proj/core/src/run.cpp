#include "urbanot/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "urbanot/error.hpp"
#include "urbanot/functionals.hpp"
#include "urbanot/oracle.hpp"
#include "urbanot/planner.hpp"
#include "urbanot/semidiscrete.hpp"
#include "urbanot/subcity.hpp"
#include "urbanot/transport.hpp"

#ifndef URBANOT_VERSION
#define URBANOT_VERSION "0.0.0"
#endif

namespace urbanot {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr int kMaxCells1d = 4096;
constexpr int kMaxCells2d = 512;
constexpr int kMaxKMax = 64;

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::ConfigError, message); }

template <class T>
T read(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for '") + key + "'");
  }
}

FamilySpec read_family(const json& j, const char* key, FamilySpec fallback, const char* coefficient,
                       const char* exponent) {
  if (!j.contains(key)) return fallback;
  const json& s = j.at(key);
  if (!s.is_object()) config_error(std::string("'") + key + "' must be an object");
  for (const auto& [name, value] : s.items()) {
    (void)value;
    if (name != "kind" && name != coefficient && name != exponent)
      config_error(std::string("unknown key '") + name + "' in '" + key + "'");
  }
  FamilySpec out;
  out.kind = read<std::string>(s, "kind", fallback.kind);
  out.coefficient = read<double>(s, coefficient, 1.0);
  out.exponent = read<double>(s, exponent, out.kind == "quadratic" ? 2.0 : fallback.exponent);
  return out;
}

std::vector<double> read_vector(const json& j) {
  try {
    return j.get<std::vector<double>>();
  } catch (const json::exception&) {
    config_error("expected an array of numbers");
  }
}

FunctionFamily make_f(const FamilySpec& s) {
  if (s.kind == "quadratic") return FunctionFamily::quadratic();
  return FunctionFamily::power(s.coefficient, s.exponent);
}

ConcentrationFamily make_g(const FamilySpec& s) { return ConcentrationFamily::power(s.coefficient, s.exponent); }

json family_json(const FamilySpec& s, const char* coefficient, const char* exponent) {
  json j;
  j["kind"] = s.kind;
  if (s.kind != "quadratic") {
    j[coefficient] = s.coefficient;
    j[exponent] = s.exponent;
  }
  return j;
}

std::string fixed(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ojson point_json(const Point& x) { return ojson(x); }

ojson breakdown_json(const ObjectiveBreakdown& b) {
  ojson j;
  j["transport"] = b.transport;
  j["F"] = b.F;
  j["G"] = b.G;
  j["total"] = b.total;
  return j;
}

ojson condition_json(const AtomizationReport& rep) {
  ojson j;
  j["radii"] = rep.radii;
  j["products"] = rep.products;
  j["limsup_estimate"] = rep.limsup_estimate;
  j["satisfied"] = rep.satisfied;
  return j;
}

ojson profiles_json(const std::vector<SubcityProfile>& profiles) {
  ojson arr = ojson::array();
  for (const SubcityProfile& s : profiles) {
    ojson j;
    j["center"] = point_json(s.center);
    j["mass"] = s.mass;
    j["radius"] = s.radius;
    j["weight"] = s.weight;
    arr.push_back(j);
  }
  return arr;
}

ojson atoms_json(const AtomicMeasure& nu) {
  ojson arr = ojson::array();
  for (const Atom& a : nu.atoms()) {
    ojson j;
    j["position"] = point_json(a.position);
    j["mass"] = a.mass;
    arr.push_back(j);
  }
  return arr;
}

Grid make_grid(const RunConfig& c) {
  return Grid(Domain::box(*c.domain_lo, *c.domain_hi), c.grid);
}

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir_.string());
  }

  template <class Writer>
  void write(const std::string& name, Writer&& writer) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + (dir_ / name).string());
    writer(out);
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + (dir_ / name).string());
    names_.push_back(name);
  }

  void density(const GridDensity& mu, const std::string& stem = "density") {
    write(stem + ".csv", [&](std::ostream& o) { write_density_csv(mu, o); });
    write(stem + ".pgm", [&](std::ostream& o) { write_density_pgm(mu, o); });
  }

  void energy_curve(const EnergyCurve& curve) {
    write("energy_curve.csv", [&](std::ostream& o) {
      o << "m,E,E',E''\n";
      for (const EnergySample& s : curve.samples())
        o << fixed(s.m) << ',' << fixed(s.E) << ',' << fixed(s.dE) << ',' << fixed(s.d2E) << '\n';
    });
  }

  void plan(const TransportPlan& plan) {
    write("plan.csv", [&](std::ostream& o) { write_plan_csv(plan, o); });
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

ojson module_versions() {
  ojson j;
  for (const char* m : {"measures", "discrete_transport", "functionals", "semidiscrete", "subcity", "planner",
                        "oracle", "cli"})
    j[m] = URBANOT_VERSION;
  return j;
}

ojson tolerance_json(const RunConfig& c) {
  ojson j;
  j["input_probability"] = kInputProbabilityTol;
  j["internal_probability"] = kInternalProbabilityTol;
  j["weight_mass_balance"] = c.tolerances.weights;
  j["bounded_relative_improvement"] = c.tolerances.bounded_relative;
  j["transport_denominator"] = c.tolerances.transport_denominator;
  j["compare_objective"] = c.tolerances.compare_objective;
  j["compare_density_l1"] = c.tolerances.compare_density_l1;
  j["solver_precision"] = c.tolerances.solver_precision;
  j["oracle_mass_resolution"] = 1.0 / c.mass_denominator;
  return j;
}

WeightSolveOptions weight_options(const RunConfig& c) {
  WeightSolveOptions w;
  w.tol = c.tolerances.weights;
  return w;
}

TransportOptions transport_options(const RunConfig& c) {
  TransportOptions t;
  t.denominator = c.tolerances.transport_denominator;
  return t;
}

BoundedOptions bounded_options(const RunConfig& c) {
  BoundedOptions b;
  b.rounds = c.rounds;
  b.grid_cells = c.grid;
  b.relative_tol = c.tolerances.bounded_relative;
  b.weights = weight_options(c);
  b.transport = transport_options(c);
  return b;
}

MassOptimizerOptions mass_options(const RunConfig& c) {
  MassOptimizerOptions m;
  m.seed = c.seed;
  return m;
}

ojson atomic_json(const AtomicProblemSolution& s) {
  ojson j;
  j["k"] = s.k;
  j["masses"] = s.masses;
  j["value"] = s.value;
  j["m0"] = s.m0;
  j["k_bound"] = s.k_bound ? ojson(*s.k_bound) : ojson(nullptr);
  j["k_searched"] = s.k_searched;
  j["value_by_k"] = s.value_by_k;
  j["regime_by_k"] = s.regime_by_k;
  j["condition"] = condition_json(s.condition);
  j["condition_warning"] = s.condition_warning;
  return j;
}

ojson run_energy_curve(const RunConfig& c, Artifacts& art, std::ostream& log) {
  const EnergyCurve curve(make_f(c.f), make_g(c.g), c.p, c.n, c.energy_samples);
  const double m0 = subadditivity_threshold(curve);
  const AtomizationReport cond = check_atomization_condition(curve.f(), curve.g(), c.p, c.n);
  art.energy_curve(curve);
  ojson r;
  r["samples"] = curve.samples().size();
  r["E_at_1"] = curve.samples().back().E;
  r["m0"] = m0;
  r["k_bound"] = m0 > 0.0 ? ojson(1 + static_cast<int>(std::floor(2.0 / m0))) : ojson(nullptr);
  r["curvature_sign_changes"] = curvature_sign_changes(curve);
  r["radius_bound"] = radius_bound(curve.f(), c.p, c.n);
  r["condition"] = condition_json(cond);
  log << "energy-curve: m0=" << m0 << " condition " << (cond.satisfied ? "satisfied" : "NOT satisfied") << '\n';
  return r;
}

ojson run_plan_rn(const RunConfig& c, Artifacts& art, std::ostream& log) {
  const EnergyCurve curve(make_f(c.f), make_g(c.g), c.p, c.n, c.energy_samples);
  const AtomicProblemSolution atomic = solve_atomic_problem(curve, c.k_max, mass_options(c));
  AssemblyOptions opt;
  opt.layout = c.layout == "grid" ? Layout::Grid : Layout::Line;
  opt.grid_cells = c.grid;
  opt.transport = transport_options(c);
  const PlanSolution sol = assemble_rn_solution(atomic.masses, curve.f(), curve.g(), c.p, c.n, opt);
  art.energy_curve(curve);
  art.density(sol.mu);
  if (c.write_plan)
    art.plan(solve_discrete_transport(to_point_cloud(sol.mu), to_point_cloud(sol.nu), c.p, opt.transport));

  ojson r;
  r["atomic_problem"] = atomic_json(atomic);
  r["radius_bound"] = radius_bound(curve.f(), c.p, c.n);
  r["atoms"] = atoms_json(sol.nu);
  r["profiles"] = profiles_json(sol.profiles);
  r["objective_closed_form"] = breakdown_json(sol.objective);
  r["objective_on_grid"] = breakdown_json(sol.grid_objective);
  r["bounding_box"] = {{"lo", sol.mu.grid().domain().lo()}, {"hi", sol.mu.grid().domain().hi()}};
  r["grid_resolution"] = sol.mu.grid().resolution();
  if (atomic.condition_warning) log << "warning: atomization condition not satisfied; k capped at k_max\n";
  log << "plan-rn: k*=" << atomic.k << " value=" << fixed(atomic.value) << '\n';
  return r;
}

AtomicMeasure default_bounded_init(const RunConfig& c) {
  const AtomicProblemSolution atomic = solve_atomic_problem(make_f(c.f), make_g(c.g), c.p, c.n, c.k_max, mass_options(c));
  const auto& lo = *c.domain_lo;
  const auto& hi = *c.domain_hi;
  std::vector<Atom> atoms;
  const auto k = atomic.masses.size();
  for (std::size_t i = 0; i < k; ++i) {
    Point x(lo.size());
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = 0.5 * (lo[a] + hi[a]);
    x[0] = lo[0] + (static_cast<double>(i) + 0.5) * (hi[0] - lo[0]) / static_cast<double>(k);
    atoms.push_back({x, atomic.masses[i]});
  }
  return AtomicMeasure(std::move(atoms));
}

ojson run_plan_bounded(const RunConfig& c, Artifacts& art, std::ostream& log) {
  const Grid grid = make_grid(c);
  const AtomicMeasure init = c.atoms.empty() ? default_bounded_init(c) : AtomicMeasure(c.atoms);
  const BoundedOptions opt = bounded_options(c);
  const PlanSolution sol = solve_bounded(grid, make_f(c.f), make_g(c.g), c.p, init, opt);
  art.density(sol.mu);
  if (c.write_plan) {
    const MuSubproblemResult mu = min_Fp_nu(sol.nu, make_f(c.f), c.p, grid, opt.weights, opt.transport);
    art.plan(mu.plan);
  }
  ojson r;
  r["initial_atoms"] = atoms_json(init);
  r["atoms"] = atoms_json(sol.nu);
  r["profiles"] = profiles_json(sol.profiles);
  r["objective"] = breakdown_json(sol.objective);
  r["history"] = sol.history;
  r["rounds"] = sol.rounds;
  r["method"] = sol.method;
  r["note"] = "alternating heuristic; joint optimality with clipped supports is not characterized";
  log << "plan-bounded: " << sol.nu.size() << " atoms, total=" << fixed(sol.objective.total) << '\n';
  return r;
}

ojson run_mu_subproblem(const RunConfig& c, Artifacts& art, std::ostream& log) {
  const Grid grid = make_grid(c);
  const AtomicMeasure nu(c.atoms);
  const MuSubproblemResult mu =
      min_Fp_nu(nu, make_f(c.f), c.p, grid, weight_options(c), transport_options(c));
  art.density(mu.density);
  if (c.write_plan) art.plan(mu.plan);
  std::vector<double> radii;
  for (double w : mu.weights.c) radii.push_back(w > 0.0 ? std::pow(w, 1.0 / c.p) : 0.0);
  ojson r;
  r["atoms"] = atoms_json(nu);
  r["weights"] = mu.weights.c;
  r["radii"] = radii;
  r["mass_residual"] = mu.weights.residual;
  r["iterations"] = mu.weights.iterations;
  r["transport"] = mu.transport;
  r["F"] = mu.F;
  r["total"] = mu.total();
  r["dual_value"] = mu.dual_value;
  r["plan_marginal_residual"] = mu.plan.marginal_residual();
  log << "mu-subproblem: total=" << fixed(mu.total()) << '\n';
  return r;
}

ojson run_validate(const RunConfig& c, Artifacts& art, std::ostream& log, bool& heuristic) {
  BruteForceInstance inst{make_grid(c), c.sites, c.mass_denominator, make_f(c.f), make_g(c.g), c.p};
  ValidationOptions opt;
  opt.bounded = bounded_options(c);
  opt.solver_precision = c.tolerances.solver_precision;
  opt.compare.objective = c.tolerances.compare_objective;
  opt.compare.density_l1 = c.tolerances.compare_density_l1;
  opt.compare.atom_distance = std::numeric_limits<double>::infinity();
  opt.compare.atom_mass = std::numeric_limits<double>::infinity();
  const ValidationReport rep = validate_against_oracle(inst, opt);
  heuristic = true;
  art.density(rep.structured.mu);
  art.density(rep.oracle.solution.mu, "oracle_density");

  ojson r;
  ojson o;
  o["units"] = rep.oracle.units;
  o["mass_resolution"] = 1.0 / rep.oracle.mass_denominator;
  o["configurations"] = rep.oracle.configurations;
  o["atoms"] = atoms_json(rep.oracle.solution.nu);
  o["objective"] = breakdown_json(rep.oracle.solution.objective);
  o["max_inner_gap"] = rep.oracle.max_inner_gap;
  r["oracle"] = o;
  ojson s;
  s["atoms"] = atoms_json(rep.structured.nu);
  s["objective"] = breakdown_json(rep.structured.objective);
  s["rounds"] = rep.structured.rounds;
  r["structured"] = s;
  r["snapped_value"] = rep.snapped_value;
  r["snap_effect"] = rep.snap_effect;
  r["unit_move_effect"] = rep.unit_move_effect;
  r["quantization_tolerance"] = rep.quantization_tolerance;
  r["objective_gap"] = rep.objective_gap;
  r["lower_bound_ok"] = rep.lower_bound_ok;
  r["within_tolerance"] = rep.within_tolerance;
  ojson cmp;
  cmp["objective_gap"] = rep.comparison.objective_gap;
  cmp["density_l1_gap"] = rep.comparison.density_l1_gap;
  cmp["atom_distance_gap"] = rep.comparison.atom_distance_gap;
  cmp["atom_mass_gap"] = rep.comparison.atom_mass_gap;
  cmp["unmatched_mass"] = rep.comparison.unmatched_mass;
  cmp["pass"] = rep.comparison.pass;
  r["comparison"] = cmp;
  r["pass"] = rep.pass;
  log << "validate: " << (rep.pass ? "PASS" : "FAIL") << " gap=" << fixed(rep.objective_gap)
      << " quantization tolerance=" << fixed(rep.quantization_tolerance) << '\n';
  return r;
}

// The output directory is a destination, not a parameter: it stays out of
// the canonical form so reports from two directories compare equal.
json config_to_json(const RunConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["f"] = family_json(c.f, "a", "q");
  j["g"] = family_json(c.g, "b", "r");
  j["p"] = c.p;
  j["n"] = c.n;
  if (c.domain_lo) j["domain"] = {{"lo", *c.domain_lo}, {"hi", *c.domain_hi}};
  j["grid"] = c.grid;
  j["k_max"] = c.k_max;
  j["seed"] = c.seed;
  json atoms = json::array();
  for (const Atom& a : c.atoms) atoms.push_back({{"position", a.position}, {"mass", a.mass}});
  j["atoms"] = atoms;
  j["sites"] = c.sites;
  j["mass_denominator"] = c.mass_denominator;
  j["rounds"] = c.rounds;
  j["energy_samples"] = c.energy_samples;
  j["layout"] = c.layout;
  j["write_plan"] = c.write_plan;
  j["tolerances"] = {{"weights", c.tolerances.weights},
                     {"bounded_relative", c.tolerances.bounded_relative},
                     {"compare_objective", c.tolerances.compare_objective},
                     {"compare_density_l1", c.tolerances.compare_density_l1},
                     {"solver_precision", c.tolerances.solver_precision},
                     {"transport_denominator", c.tolerances.transport_denominator}};
  return j;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::PlanRn: return "plan-rn";
    case Mode::PlanBounded: return "plan-bounded";
    case Mode::MuSubproblem: return "mu-subproblem";
    case Mode::EnergyCurve: return "energy-curve";
    case Mode::Validate: return "validate";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::PlanRn, Mode::PlanBounded, Mode::MuSubproblem, Mode::EnergyCurve, Mode::Validate})
    if (to_string(m) == name) return m;
  config_error("unknown mode '" + name + "'");
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("configuration must be a JSON object");
  static const std::set<std::string> known{"mode",  "f",     "g",     "p",     "n",     "domain",
                                           "grid",  "k_max", "seed",  "out",   "atoms", "sites",
                                           "mass_denominator", "rounds", "energy_samples", "layout",
                                           "write_plan", "tolerances"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) config_error("unknown key '" + key + "'");
  }

  RunConfig c;
  if (j.contains("mode")) c.mode = parse_mode(read<std::string>(j, "mode", ""));
  c.f = read_family(j, "f", c.f, "a", "q");
  c.g = read_family(j, "g", c.g, "b", "r");
  c.p = read<double>(j, "p", c.p);
  c.n = read<int>(j, "n", c.n);
  if (j.contains("domain")) {
    const json& d = j.at("domain");
    if (!d.is_object() || !d.contains("lo") || !d.contains("hi")) config_error("domain needs 'lo' and 'hi'");
    c.domain_lo = read_vector(d.at("lo"));
    c.domain_hi = read_vector(d.at("hi"));
  }
  c.grid = read<int>(j, "grid", c.grid);
  c.k_max = read<int>(j, "k_max", c.k_max);
  c.seed = read<std::uint64_t>(j, "seed", c.seed);
  c.out = read<std::string>(j, "out", c.out);
  if (j.contains("atoms")) {
    if (!j.at("atoms").is_array()) config_error("'atoms' must be an array");
    for (const json& a : j.at("atoms")) {
      if (!a.is_object() || !a.contains("position") || !a.contains("mass"))
        config_error("each atom needs 'position' and 'mass'");
      c.atoms.push_back({read_vector(a.at("position")), read<double>(a, "mass", 0.0)});
    }
  }
  if (j.contains("sites")) {
    if (!j.at("sites").is_array()) config_error("'sites' must be an array");
    for (const json& s : j.at("sites")) c.sites.push_back(read_vector(s));
  }
  c.mass_denominator = read<int>(j, "mass_denominator", c.mass_denominator);
  c.rounds = read<int>(j, "rounds", c.rounds);
  c.energy_samples = read<int>(j, "energy_samples", c.energy_samples);
  c.layout = read<std::string>(j, "layout", c.layout);
  c.write_plan = read<bool>(j, "write_plan", c.write_plan);
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object()) config_error("'tolerances' must be an object");
    c.tolerances.weights = read<double>(t, "weights", c.tolerances.weights);
    c.tolerances.bounded_relative = read<double>(t, "bounded_relative", c.tolerances.bounded_relative);
    c.tolerances.compare_objective = read<double>(t, "compare_objective", c.tolerances.compare_objective);
    c.tolerances.compare_density_l1 = read<double>(t, "compare_density_l1", c.tolerances.compare_density_l1);
    c.tolerances.solver_precision = read<double>(t, "solver_precision", c.tolerances.solver_precision);
    c.tolerances.transport_denominator =
        read<std::int64_t>(t, "transport_denominator", c.tolerances.transport_denominator);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.p) c.p = *o.p;
  if (o.grid) c.grid = *o.grid;
  if (o.k_max) c.k_max = *o.k_max;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
}

void validate_config(const RunConfig& c) {
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) config_error("p must be >= 1");
  if (c.n != 1 && c.n != 2) config_error("n must be 1 or 2");
  if (c.f.kind == "power") {
    if (!(c.f.coefficient > 0.0) || !(c.f.exponent > 1.0)) config_error("f power needs a > 0 and q > 1");
  } else if (c.f.kind != "quadratic") {
    config_error("f kind must be 'quadratic' or 'power'");
  }
  if (c.g.kind != "power") config_error("g kind must be 'power'");
  if (!(c.g.coefficient > 0.0) || !(c.g.exponent > 0.0 && c.g.exponent < 1.0))
    config_error("g power needs b > 0 and 0 < r < 1");
  const int max_cells = c.n == 1 ? kMaxCells1d : kMaxCells2d;
  if (c.grid < 1 || c.grid > max_cells) config_error("grid must be in [1, " + std::to_string(max_cells) + "]");
  if (c.k_max < 1 || c.k_max > kMaxKMax) config_error("k_max must be in [1, 64]");
  if (c.mass_denominator < 1 || c.mass_denominator > 1000) config_error("mass_denominator must be in [1, 1000]");
  if (c.rounds < 0 || c.rounds > 10000) config_error("rounds must be in [0, 10000]");
  if (c.energy_samples < 2 || c.energy_samples > 100000) config_error("energy_samples must be in [2, 100000]");
  if (c.layout != "line" && c.layout != "grid") config_error("layout must be 'line' or 'grid'");
  if (!(c.tolerances.weights > 0.0) || !(c.tolerances.bounded_relative >= 0.0) ||
      !(c.tolerances.solver_precision >= 0.0) || c.tolerances.transport_denominator < 1)
    config_error("tolerances must be positive");
  if (c.out.empty()) config_error("output directory must not be empty");

  if (c.domain_lo) {
    const auto& lo = *c.domain_lo;
    const auto& hi = *c.domain_hi;
    if (lo.size() != static_cast<std::size_t>(c.n) || hi.size() != lo.size())
      config_error("domain bounds must have n entries");
    for (std::size_t a = 0; a < lo.size(); ++a)
      if (!(lo[a] < hi[a])) config_error("domain needs lo < hi on every axis");
  }
  const bool needs_domain = c.mode == Mode::PlanBounded || c.mode == Mode::MuSubproblem || c.mode == Mode::Validate;
  if (needs_domain && !c.domain_lo) config_error(to_string(c.mode) + " needs a domain");

  for (const Atom& a : c.atoms) {
    if (a.position.size() != static_cast<std::size_t>(c.n)) config_error("atom positions must have n entries");
    if (!(a.mass > 0.0)) config_error("atom masses must be positive");
  }
  if (!c.atoms.empty()) {
    double total = 0.0;
    for (const Atom& a : c.atoms) total += a.mass;
    if (std::abs(total - 1.0) > kInputProbabilityTol) config_error("atom masses must sum to 1");
  }
  if (c.mode == Mode::MuSubproblem && c.atoms.empty()) config_error("mu-subproblem needs atoms");
  if (c.mode == Mode::Validate) {
    if (c.sites.empty()) config_error("validate needs candidate sites");
    if (c.sites.size() > kMaxOracleSites) config_error("validate accepts at most 8 sites");
    for (const Point& s : c.sites)
      if (s.size() != static_cast<std::size_t>(c.n)) config_error("site positions must have n entries");
    const double cells = std::pow(static_cast<double>(c.grid), c.n);
    if (cells > static_cast<double>(kMaxOracleCells)) config_error("validate grids are limited to 64 cells");
  }
}

std::string canonical_config(const RunConfig& c) { return config_to_json(c).dump(); }

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run(const RunConfig& config, std::ostream& log) {
  try {
    validate_config(config);
    Artifacts art(config.out);
    bool heuristic = false;
    ojson results;
    switch (config.mode) {
      case Mode::EnergyCurve: results = run_energy_curve(config, art, log); break;
      case Mode::PlanRn: results = run_plan_rn(config, art, log); break;
      case Mode::PlanBounded:
        results = run_plan_bounded(config, art, log);
        heuristic = true;
        break;
      case Mode::MuSubproblem: results = run_mu_subproblem(config, art, log); break;
      case Mode::Validate: results = run_validate(config, art, log, heuristic); break;
    }
    ojson report;
    report["tool"] = "planner";
    report["version"] = URBANOT_VERSION;
    report["module_versions"] = module_versions();
    report["mode"] = to_string(config.mode);
    report["config_hash"] = config_hash(config);
    report["config"] = ojson::parse(canonical_config(config));
    report["tolerances"] = tolerance_json(config);
    report["heuristic"] = heuristic;
    report["results"] = results;
    std::vector<std::string> files = art.names();
    files.push_back("report.json");
    report["artifacts"] = files;
    art.write("report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });
    return 0;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::NoConvergence:
      case ErrorCode::DegeneratePlan: return 2;
      default: return 1;
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace urbanot
