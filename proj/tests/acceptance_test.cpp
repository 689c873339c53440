// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reference.hpp"
#include "urbanot/oracle.hpp"
#include "urbanot/planner.hpp"
#include "urbanot/semidiscrete.hpp"
#include "urbanot/subcity.hpp"
#include "urbanot/transport.hpp"

using namespace urbanot;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

WeightedPointCloud random_cloud(std::mt19937_64& rng, int dim, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> coords(n * static_cast<std::size_t>(dim));
  for (double& c : coords) c = u(rng);
  return WeightedPointCloud(dim, std::move(coords), ref::random_weights(rng, n));
}

// 1. Exact discrete transport.
Outcome transport_exactness() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  const double ps[] = {1.0, 1.5, 2.0};
  double worst_gap = 0.0, worst_marginal = 0.0, worst_feasibility = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 50; ++i) {
    const int dim = 1 + i % 2;
    const auto a = random_cloud(rng, dim, size(rng));
    const auto b = random_cloud(rng, dim, size(rng));
    const TransportPlan plan = solve_discrete_transport(a, b, ps[i % 3]);
    const PotentialPair pot = recover_potentials(plan);
    worst_gap = std::max(worst_gap, std::abs(plan.total_cost - dual_value(plan, pot)));
    worst_marginal = std::max(worst_marginal, plan.marginal_residual());
    worst_feasibility = std::max(worst_feasibility, max_dual_violation(plan, pot));
  }
  const double elapsed = seconds_since(t0);
  return {worst_gap <= 1e-8 && worst_marginal <= 1e-9 && worst_feasibility <= 1e-9 && elapsed <= 10.0,
          fmt("max duality gap %.3g, max marginal residual %.3g, max dual violation %.3g, %.2f s", worst_gap,
              worst_marginal, worst_feasibility, elapsed)};
}

// 2. W1 <= Wp <= D^{1-1/p} W1^{1/p}.
Outcome metric_inequality() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  const double diameter = std::sqrt(2.0);
  double worst = INFINITY;
  for (int i = 0; i < 100; ++i) {
    const auto a = random_cloud(rng, 2, size(rng));
    const auto b = random_cloud(rng, 2, size(rng));
    const double w1 = wasserstein(a, b, 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
      const double wp = wasserstein(a, b, p);
      worst = std::min({worst, wp - w1, std::pow(diameter, 1.0 - 1.0 / p) * std::pow(w1, 1.0 / p) - wp});
    }
  }
  return {worst >= -1e-9, fmt("smallest slack %.3g over 100 instances x p in {1.5, 2, 3}", worst)};
}

// 3. Mass-radius inversion and the quadratic closed form.
Outcome mass_radius_round_trip() {
  double worst_trip = 0.0, worst_closed = 0.0;
  for (const auto& f : {FunctionFamily::quadratic(), FunctionFamily::power(1.0, 3.0)})
    for (int n : {1, 2})
      for (double p : {1.0, 1.5, 2.0})
        for (int e = 0; e <= 12; ++e) {
          const double m = std::pow(10.0, -3.0 + 0.25 * e);
          const double R = radius_of_mass(f, p, n, m);
          worst_trip = std::max(worst_trip, std::abs(mass_of_radius(f, p, n, R) - m));
          if (f.kind() == FunctionFamily::Kind::Quadratic) {
            const double closed = std::pow(m * (n + p) / (ref::ball_volume(n) * p), 1.0 / (n + p));
            worst_closed = std::max(worst_closed, std::abs(R - closed) / closed);
          }
        }
  return {worst_trip <= 1e-9 && worst_closed <= 1e-8,
          fmt("max |M(R(m)) - m| %.3g, max relative closed-form error %.3g", worst_trip, worst_closed)};
}

// 4. f'(u) + psi is constant on the support, up to discretization.
Outcome optimality_relation() {
  const auto f = FunctionFamily::quadratic();
  const AtomicMeasure nu({{{0.3}, 0.45}, {{0.75}, 0.55}});
  std::vector<double> devs;
  for (int cells : {100, 200, 400}) {
    const Grid grid(Domain::interval(0.0, 1.0), cells);
    const MuSubproblemResult r = min_Fp_nu(nu, f, 2.0, grid);
    const PotentialPair pot = recover_potentials(r.plan);
    std::vector<double> level;
    std::size_t i = 0;
    for (double u : r.density.values()) {
      if (u <= 0.0) continue;
      level.push_back(f.df(u) + pot.psi[i++]);
    }
    std::vector<double> sorted = level;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
    const double l = sorted[sorted.size() / 2];
    double dev = 0.0;
    for (double v : level) dev = std::max(dev, std::abs(v - l));
    devs.push_back(dev);
  }
  // Below the weight-solve mass tolerance the deviation is solver noise and a
  // refinement trend is not observable.
  constexpr double kFloor = 1e-7;
  const bool at_floor = devs[0] <= kFloor && devs[1] <= kFloor && devs[2] <= kFloor;
  const bool decreasing = devs[1] < devs[0] && devs[2] < devs[1];
  return {(decreasing || at_floor) && devs[2] <= 5e-2,
          fmt("support-max deviation %.3g / %.3g / %.3g at 100 / 200 / 400 cells (%s)", devs[0], devs[1], devs[2],
              decreasing ? "decreasing" : at_floor ? "all below solver floor 1e-7" : "not decreasing")};
}

// 5. Positive density only inside the balls of radius c_i^{1/p} (+ one cell).
Outcome ball_support() {
  int violations = 0, cases = 0;
  std::size_t positive_cells = 0;
  auto check = [&](const GridDensity& mu, const AtomicMeasure& nu, const std::vector<double>& c, double p) {
    const Grid& grid = mu.grid();
    const double h = 2.0 * grid.half_diagonal();
    ++cases;
    for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
      if (mu.values()[cell] <= 0.0) continue;
      ++positive_cells;
      const Point x = grid.cell_center(cell);
      bool inside = false;
      for (std::size_t j = 0; j < nu.size() && !inside; ++j)
        inside = c[j] > 0.0 && distance(x, nu.atoms()[j].position) <= std::pow(c[j], 1.0 / p) + h;
      if (!inside) ++violations;
    }
  };
  const std::vector<AtomicMeasure> measures1{
      AtomicMeasure({{{0.5}, 1.0}}), AtomicMeasure({{{0.2}, 0.3}, {{0.8}, 0.7}}),
      AtomicMeasure({{{0.1}, 0.2}, {{0.45}, 0.5}, {{0.9}, 0.3}})};
  const std::vector<AtomicMeasure> measures2{
      AtomicMeasure({{{1.0, 1.0}, 1.0}}), AtomicMeasure({{{0.6, 0.7}, 0.4}, {{1.4, 1.2}, 0.6}})};
  for (const auto& f : {FunctionFamily::quadratic(), FunctionFamily::power(1.0, 3.0)})
    for (double p : {1.0, 1.5, 2.0}) {
      for (const auto& nu : measures1) {
        const Grid grid(Domain::interval(0.0, 1.0), 200);
        const auto r = min_Fp_nu(nu, f, p, grid);
        check(r.density, nu, r.weights.c, p);
      }
      for (const auto& nu : measures2) {
        const Grid grid(Domain::box({0.0, 0.0}, {2.0, 2.0}), 40);
        const auto r = min_Fp_nu(nu, f, p, grid);
        check(r.density, nu, r.weights.c, p);
      }
    }
  // Bounded heuristic output.
  const Grid grid(Domain::interval(0.0, 3.0), 90);
  BoundedOptions opt;
  opt.rounds = 5;
  const auto s = solve_bounded(grid, FunctionFamily::quadratic(), ConcentrationFamily::power(0.05, 0.5), 2.0,
                               AtomicMeasure({{{0.8}, 0.5}, {{2.2}, 0.5}}), opt);
  std::vector<double> c;
  for (const auto& prof : s.profiles) c.push_back(prof.weight);
  check(s.mu, s.nu, c, 2.0);
  return {violations == 0 && positive_cells > 0,
          fmt("%d violations over %zu positive cells in %d solutions", violations, positive_cells, cases)};
}

// 6. One atom on a 200x200 grid reproduces E(1).
Outcome single_atom_energy() {
  const auto f = FunctionFamily::quadratic();
  const auto g = ConcentrationFamily::power(1.0, 0.5);
  const auto t0 = Clock::now();
  AssemblyOptions opt;
  opt.grid_cells = 200;
  const PlanSolution s = assemble_rn_solution({1.0}, f, g, 2.0, 2, opt);
  const double elapsed = seconds_since(t0);
  const double E1 = subcity_energy(f, g, 2.0, 2, 1.0);
  const double rel = std::abs(s.grid_objective.total - E1) / E1;
  const auto res = s.mu.grid().resolution();
  const bool grid_ok = res.size() == 2 && res[0] == 200 && res[1] == 200;
  return {rel <= 1e-2 && elapsed <= 30.0 && grid_ok,
          fmt("grid total %.8g vs E(1) %.8g (relative %.3g), %dx%d cells, %.2f s", s.grid_objective.total, E1, rel,
              res[0], res.size() > 1 ? res[1] : 1, elapsed)};
}

// 7. Condition sweep for random power families.
Outcome atomization_condition() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> ua(0.2, 5.0), uq(1.2, 4.0), ub(0.05, 5.0), ur(0.1, 0.9), up(1.0, 3.0);
  int ok = 0;
  double worst_tail = -INFINITY;
  for (int i = 0; i < 10; ++i) {
    const auto f = FunctionFamily::power(ua(rng), uq(rng));
    const auto g = ConcentrationFamily::power(ub(rng), ur(rng));
    const double p = up(rng);
    const int n = 1 + i % 2;
    const AtomizationReport rep = check_atomization_condition(f, g, p, n);
    bool decreasing = true;
    for (std::size_t k = 1; k < rep.products.size(); ++k) decreasing = decreasing && rep.products[k] < rep.products[k - 1];
    const std::size_t tail = rep.products.size() / 2;
    bool below = true;
    for (std::size_t k = tail; k < rep.products.size(); ++k) below = below && rep.products[k] < -1.0;
    worst_tail = std::max(worst_tail, rep.products[tail]);
    if (rep.satisfied && decreasing && below) ++ok;
  }
  return {ok == 10, fmt("%d / 10 parameter sets satisfied; largest tail product %.3g", ok, worst_tail)};
}

// 8. E subadditive below m0; merging light atoms never raises the objective.
Outcome subadditivity_and_merge() {
  std::mt19937_64 rng(808);
  double worst = INFINITY;
  int merges = 0, merge_failures = 0, light_failures = 0;
  struct Case {
    FunctionFamily f;
    ConcentrationFamily g;
    double p;
    int n;
  };
  const std::vector<Case> cases{{FunctionFamily::quadratic(), ConcentrationFamily::power(1.0, 0.5), 2.0, 1},
                                {FunctionFamily::quadratic(), ConcentrationFamily::power(0.05, 0.3), 2.0, 2},
                                {FunctionFamily::power(1.0, 3.0), ConcentrationFamily::power(0.2, 0.5), 1.5, 1},
                                {FunctionFamily::power(0.5, 1.5), ConcentrationFamily::power(0.1, 0.7), 1.0, 2}};
  for (const Case& c : cases) {
    const EnergyCurve curve(c.f, c.g, c.p, c.n);
    const double m0 = subadditivity_threshold(curve);
    if (!(m0 > 0.0)) return {false, "m0 = 0 for a power family"};
    std::uniform_real_distribution<double> u(1e-6, m0);
    for (int i = 0; i < 200; ++i) {
      const double s = u(rng), t = u(rng);
      if (s + t > 1.0) continue;
      worst = std::min(worst, curve.E(s) + curve.E(t) - curve.E(s + t));
    }
    // Merge two light atoms inside a plan.
    AssemblyOptions opt;
    opt.discrete_transport = false;
    opt.grid_cells = 40;
    std::uniform_real_distribution<double> light(1e-4, 0.5 * m0);
    for (int i = 0; i < 5; ++i) {
      const double s = light(rng), t = light(rng);
      const double rest = 1.0 - s - t;
      const auto split = assemble_rn_solution({rest, s, t}, c.f, c.g, c.p, c.n, opt);
      const auto merged = assemble_rn_solution({rest, s + t}, c.f, c.g, c.p, c.n, opt);
      ++merges;
      if (merged.objective.total > split.objective.total + 1e-10) ++merge_failures;
    }
    // The optimizer never keeps two atoms below m0 / 2.
    const auto sol = solve_atomic_problem(curve, 8);
    const auto n_light = std::count_if(sol.masses.begin(), sol.masses.end(), [&](double m) { return m < 0.5 * m0; });
    if (n_light > 1) ++light_failures;
  }
  return {worst >= -1e-10 && merge_failures == 0 && light_failures == 0,
          fmt("min E(s)+E(t)-E(s+t) %.3g; %d/%d merges increased the objective; %d optima with >1 light atom", worst,
              merge_failures, merges, light_failures)};
}

// 9. Structured heuristic vs exhaustive search.
Outcome planner_vs_brute_force() {
  struct Inst {
    std::vector<double> sites;
    FunctionFamily f;
    ConcentrationFamily g;
    double p;
  };
  const std::vector<Inst> insts{
      {{0.25, 0.5, 0.75}, FunctionFamily::quadratic(), ConcentrationFamily::power(0.05, 0.5), 2.0},
      {{0.2, 0.8}, FunctionFamily::quadratic(), ConcentrationFamily::power(0.5, 0.5), 2.0},
      {{0.1, 0.4, 0.9}, FunctionFamily::power(1.0, 3.0), ConcentrationFamily::power(0.02, 0.4), 1.5},
      {{0.3, 0.6}, FunctionFamily::power(2.0, 2.0), ConcentrationFamily::power(0.1, 0.7), 1.0},
      {{0.15, 0.5, 0.85}, FunctionFamily::quadratic(), ConcentrationFamily::power(0.01, 0.3), 2.0}};
  const auto t0 = Clock::now();
  int passed = 0;
  std::string lines;
  for (const Inst& in : insts) {
    BruteForceInstance inst{Grid(Domain::interval(0.0, 1.0), 32), {}};
    for (double x : in.sites) inst.sites.push_back({x});
    inst.f = in.f;
    inst.g = in.g;
    inst.p = in.p;
    const ValidationReport rep = validate_against_oracle(inst);
    // Re-derive the verdict from the reported numbers.
    const double slack = 1e-6 * (1.0 + std::abs(rep.oracle.solution.objective.total)) + rep.oracle.max_inner_gap;
    const double gap = rep.structured.objective.total - rep.oracle.solution.objective.total;
    const bool ok = rep.snapped_value >= rep.oracle.solution.objective.total - 1e-9 &&
                    std::abs(gap) <= rep.quantization_tolerance + slack &&
                    rep.quantization_tolerance == std::max(rep.snap_effect, rep.unit_move_effect) && rep.pass;
    if (ok) ++passed;
    lines += fmt("\n    gap %+.3e, quantization tolerance %.3e (snap %.3e, unit move %.3e)%s", gap,
                 rep.quantization_tolerance, rep.snap_effect, rep.unit_move_effect, ok ? "" : "  <-- fail");
  }
  const double elapsed = seconds_since(t0);
  return {passed == 5 && elapsed <= 120.0, fmt("%d / 5 instances within tolerance, %.1f s", passed, elapsed) + lines};
}

// 10. CLI determinism.
std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
#ifndef PLANNER_EXE
  return {false, "planner binary not built"};
#else
  const fs::path dir = fs::temp_directory_path() / "urbanot_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"plan-rn", R"({"f":{"kind":"quadratic"},"g":{"kind":"power","b":0.1,"r":0.5},"p":2,"n":2,"grid":80,"k_max":5})"},
      {"energy-curve", R"({"f":{"kind":"power","a":1,"q":3},"g":{"kind":"power","b":0.2,"r":0.5},"p":1.5,"n":1})"},
      {"mu-subproblem",
       R"({"p":2,"n":1,"domain":{"lo":[0],"hi":[1]},"grid":200,"atoms":[{"position":[0.3],"mass":0.4},{"position":[0.7],"mass":0.6}],"write_plan":true})"},
      {"plan-bounded",
       R"({"g":{"kind":"power","b":0.05,"r":0.5},"p":2,"n":1,"domain":{"lo":[0],"hi":[1]},"grid":64,"k_max":3})"},
      {"validate",
       R"({"g":{"kind":"power","b":0.05,"r":0.5},"p":2,"n":1,"domain":{"lo":[0],"hi":[1]},"grid":32,"sites":[[0.25],[0.5],[0.75]]})"}};
  int identical = 0;
  std::string bad;
  for (const auto& [mode, cfg] : runs) {
    const fs::path cfg_path = dir / (mode + ".json");
    std::ofstream(cfg_path) << cfg;
    std::vector<std::string> reports;
    bool ran = true;
    for (const char* tag : {"a", "b"}) {
      const fs::path out = dir / (mode + "_" + tag);
      const std::string cmd = std::string(PLANNER_EXE) + " " + mode + " --config " + cfg_path.string() +
                              " --seed 42 --out " + out.string() + " 2>/dev/null";
      ran = ran && std::system(cmd.c_str()) == 0;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(out)) files.push_back(entry.path().filename());
      std::sort(files.begin(), files.end());
      std::string all;
      for (const auto& name : files) all += name.string() + "\n" + slurp(out / name);
      reports.push_back(all);
    }
    if (ran && reports[0] == reports[1] && !reports[0].empty())
      ++identical;
    else
      bad += " " + mode;
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(runs.size()),
          fmt("%d / %zu modes produced byte-identical output directories", identical, runs.size()) +
              (bad.empty() ? "" : "; differing:" + bad)};
#endif
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"transport oracle exactness", transport_exactness},
      {"Wasserstein metric inequality", metric_inequality},
      {"mass-radius round trip", mass_radius_round_trip},
      {"semi-discrete optimality relation", optimality_relation},
      {"ball-support structure", ball_support},
      {"single-atom energy identity", single_atom_energy},
      {"atomization condition for power families", atomization_condition},
      {"subadditivity and merge property", subadditivity_and_merge},
      {"structured planner vs brute force", planner_vs_brute_force},
      {"CLI determinism", cli_determinism}};
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d / %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
