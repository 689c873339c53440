#include "urbanot/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>

#include "urbanot/error.hpp"

namespace urbanot {

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  if (r > 1e18L) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::llround(r));
}

void check_guards(const BruteForceInstance& instance) {
  if (instance.grid.cell_count() > kMaxOracleCells)
    throw Error(ErrorCode::SearchSpaceTooLarge, "oracle grids are limited to 64 cells");
  if (instance.sites.empty()) throw Error(ErrorCode::EmptyCloud, "no candidate sites");
  if (instance.sites.size() > kMaxOracleSites)
    throw Error(ErrorCode::SearchSpaceTooLarge, "oracle instances are limited to 8 sites");
  if (instance.mass_denominator < 1) throw Error(ErrorCode::ConfigError, "mass denominator must be >= 1");
  if (configuration_count(instance) > kMaxOracleConfigurations)
    throw Error(ErrorCode::SearchSpaceTooLarge, "more than 1e7 mass configurations");
  for (const Point& s : instance.sites) {
    if (static_cast<int>(s.size()) != instance.grid.dim() || !instance.grid.domain().contains(s))
      throw Error(ErrorCode::AtomOutsideDomain, "candidate site outside the grid domain");
  }
}

PlanSolution make_solution(const InnerSolution& inner, const AtomicMeasure& nu, const ConcentrationFamily& g,
                           double p) {
  std::vector<SubcityProfile> profiles;
  const Grid& grid = inner.mu.grid();
  Point center(static_cast<std::size_t>(grid.dim()));
  for (const Atom& a : nu.atoms()) {
    double reach = 0.0;
    double best = std::numeric_limits<double>::infinity();
    // Reach: distance to the farthest positive cell that is closer to this
    // atom than to any other.
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      if (!(inner.mu.values()[c] > 0.0)) continue;
      grid.cell_center(c, center);
      best = std::numeric_limits<double>::infinity();
      for (const Atom& b : nu.atoms()) best = std::min(best, distance(center, b.position));
      const double d = distance(center, a.position);
      if (d <= best) reach = std::max(reach, d);
    }
    profiles.push_back({a.position, a.mass, reach, std::pow(reach, p)});
  }
  ObjectiveBreakdown obj{inner.transport, inner.F, eval_G(g, nu), 0.0};
  obj.total = obj.transport + obj.F + obj.G;
  return PlanSolution{inner.mu, nu, std::move(profiles), obj, obj, false, "brute-force", {}, 0};
}

}  // namespace

std::uint64_t configuration_count(const BruteForceInstance& instance) {
  const auto d = static_cast<std::uint64_t>(instance.mass_denominator);
  const auto s = static_cast<std::uint64_t>(instance.sites.size());
  if (s == 0) return 0;
  return binomial(d + s - 1, s - 1);
}

InnerSolution solve_inner(const Grid& grid, const AtomicMeasure& nu, const FunctionFamily& f, double p,
                          const InnerOptions& options) {
  if (!nu.is_probability()) throw Error(ErrorCode::NotProbability, "nu must be a probability");
  const std::size_t cells = grid.cell_count();
  const std::size_t m = nu.size();
  const double vol = grid.cell_volume();
  std::vector<double> cost(cells * m);
  Point center(static_cast<std::size_t>(grid.dim()));
  for (std::size_t c = 0; c < cells; ++c) {
    grid.cell_center(c, center);
    for (std::size_t j = 0; j < m; ++j) cost[c * m + j] = distance_pow(center, nu.atoms()[j].position, p);
  }
  const std::vector<double> a = nu.masses();

  std::vector<double> gamma(cells * m, 0.0);
  std::vector<double> load(cells, 0.0);
  std::vector<double> lambda(m, 0.0);

  auto shipped = [&](std::size_t j, double lam, std::size_t c) {
    return std::max(0.0, vol * f.k(lam - cost[c * m + j]) - (load[c] - gamma[c * m + j]));
  };
  auto block_mass = [&](std::size_t j, double lam) {
    double s = 0.0;
    for (std::size_t c = 0; c < cells; ++c) s += shipped(j, lam, c);
    return s;
  };

  InnerSolution out{GridDensity(grid, std::vector<double>(cells, 0.0))};
  double primal = 0.0;
  double dual = -std::numeric_limits<double>::infinity();
  int sweep = 0;
  for (; sweep < options.max_sweeps; ++sweep) {
    for (std::size_t j = 0; j < m; ++j) {
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < cells; ++c) lo = std::min(lo, cost[c * m + j]);
      double width = 1.0;
      double hi = lo + width;
      while (block_mass(j, hi) < a[j]) {
        width *= 2.0;
        hi = lo + width;
        if (!std::isfinite(hi)) throw Error(ErrorCode::NoConvergence, "inner multiplier bracket diverged");
      }
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (block_mass(j, mid) < a[j] ? lo : hi) = mid;
      }
      lambda[j] = hi;
      std::vector<double> column(cells);
      double mass = 0.0;
      for (std::size_t c = 0; c < cells; ++c) {
        column[c] = shipped(j, hi, c);
        mass += column[c];
      }
      const double scale = mass > 0.0 ? a[j] / mass : 0.0;
      for (std::size_t c = 0; c < cells; ++c) {
        const double next = column[c] * scale;
        load[c] += next - gamma[c * m + j];
        gamma[c * m + j] = next;
      }
    }

    double transport = 0.0;
    double F = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      for (std::size_t j = 0; j < m; ++j) transport += gamma[c * m + j] * cost[c * m + j];
      F += vol * f.f(std::max(load[c], 0.0) / vol);
    }
    primal = transport + F;
    dual = 0.0;
    for (std::size_t j = 0; j < m; ++j) dual += lambda[j] * a[j];
    for (std::size_t c = 0; c < cells; ++c) {
      double best = 0.0;
      for (std::size_t j = 0; j < m; ++j) best = std::max(best, lambda[j] - cost[c * m + j]);
      if (best > 0.0) dual -= vol * f.conjugate(best);
    }
    out.transport = transport;
    out.F = F;
    if (primal - dual <= options.tol * (1.0 + std::abs(primal))) {
      ++sweep;
      break;
    }
  }
  std::vector<double> u(cells);
  for (std::size_t c = 0; c < cells; ++c) u[c] = std::max(load[c], 0.0) / vol;
  out.mu = GridDensity(grid, std::move(u));
  out.value = primal;
  out.lower_bound = std::min(dual, primal);
  out.sweeps = sweep;
  return out;
}

BruteForceResult brute_force_full(const BruteForceInstance& instance, const InnerOptions& options) {
  check_guards(instance);
  const std::size_t s = instance.sites.size();
  const int d = instance.mass_denominator;

  std::vector<int> units(s, 0);
  units[s - 1] = d;
  BruteForceResult best{PlanSolution{GridDensity(instance.grid, std::vector<double>(instance.grid.cell_count(), 0.0)),
                                     AtomicMeasure({{instance.sites[0], 1.0}}),
                                     {},
                                     {},
                                     {},
                                     false,
                                     "brute-force",
                                     {},
                                     0},
                        {},
                        0.0,
                        0,
                        d};
  double best_value = std::numeric_limits<double>::infinity();

  // Lexicographic walk over compositions of d into s nonnegative parts,
  // starting from (0, ..., 0, d).
  while (true) {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < s; ++i)
      if (units[i] > 0) atoms.push_back({instance.sites[i], static_cast<double>(units[i]) / d});
    AtomicMeasure nu(std::move(atoms));
    const InnerSolution inner = solve_inner(instance.grid, nu, instance.f, instance.p, options);
    const double total = inner.value + eval_G(instance.g, nu);
    best.max_inner_gap = std::max(best.max_inner_gap, inner.value - inner.lower_bound);
    ++best.configurations;
    if (total < best_value) {
      best_value = total;
      best.units = units;
      best.solution = make_solution(inner, nu, instance.g, instance.p);
    }

    // Next composition: increment the rightmost position that has a nonzero
    // tail after it and park the rest of that tail on the last site.
    int tail = 0;
    std::size_t pos = s - 1;
    for (; pos > 0; --pos) {
      tail += units[pos];
      if (tail > 0) break;
    }
    if (pos == 0) break;
    units[pos - 1] += 1;
    for (std::size_t t = pos; t < s; ++t) units[t] = 0;
    units[s - 1] = tail - 1;
  }
  return best;
}

ComparisonReport compare_solutions(const PlanSolution& a, const PlanSolution& b, const CompareTolerances& tol) {
  if (!(a.mu.grid() == b.mu.grid())) throw Error(ErrorCode::IncompatibleGrids, "solutions live on different grids");
  ComparisonReport rep;
  rep.objective_gap = std::abs(a.objective.total - b.objective.total);
  const double vol = a.mu.cell_volume();
  for (std::size_t c = 0; c < a.mu.values().size(); ++c)
    rep.density_l1_gap += std::abs(a.mu.values()[c] - b.mu.values()[c]) * vol;

  struct Pair {
    double dist;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < a.nu.size(); ++i)
    for (std::size_t j = 0; j < b.nu.size(); ++j)
      pairs.push_back({distance(a.nu.atoms()[i].position, b.nu.atoms()[j].position), i, j});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.dist < y.dist; });
  std::vector<bool> used_a(a.nu.size(), false);
  std::vector<bool> used_b(b.nu.size(), false);
  for (const Pair& pr : pairs) {
    if (used_a[pr.i] || used_b[pr.j]) continue;
    used_a[pr.i] = used_b[pr.j] = true;
    rep.atom_distance_gap = std::max(rep.atom_distance_gap, pr.dist);
    rep.atom_mass_gap =
        std::max(rep.atom_mass_gap, std::abs(a.nu.atoms()[pr.i].mass - b.nu.atoms()[pr.j].mass));
  }
  for (std::size_t i = 0; i < a.nu.size(); ++i)
    if (!used_a[i]) rep.unmatched_mass += a.nu.atoms()[i].mass;
  for (std::size_t j = 0; j < b.nu.size(); ++j)
    if (!used_b[j]) rep.unmatched_mass += b.nu.atoms()[j].mass;

  rep.pass = rep.objective_gap <= tol.objective && rep.density_l1_gap <= tol.density_l1 &&
             rep.atom_distance_gap <= tol.atom_distance && rep.atom_mass_gap <= tol.atom_mass &&
             rep.unmatched_mass <= tol.atom_mass;
  return rep;
}

namespace {

double evaluate_units(const BruteForceInstance& instance, const std::vector<int>& units, const InnerOptions& options) {
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < units.size(); ++i)
    if (units[i] > 0)
      atoms.push_back({instance.sites[i], static_cast<double>(units[i]) / instance.mass_denominator});
  AtomicMeasure nu(std::move(atoms));
  return solve_inner(instance.grid, nu, instance.f, instance.p, options).value + eval_G(instance.g, nu);
}

/// Nearest-site assignment followed by largest-remainder rounding.
std::vector<int> snap_to_sites(const BruteForceInstance& instance, const AtomicMeasure& nu) {
  const std::size_t s = instance.sites.size();
  std::vector<double> mass(s, 0.0);
  for (const Atom& a : nu.atoms()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s; ++i)
      if (distance(a.position, instance.sites[i]) < distance(a.position, instance.sites[best])) best = i;
    mass[best] += a.mass;
  }
  const int d = instance.mass_denominator;
  std::vector<int> units(s);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < s; ++i) {
    const double scaled = mass[i] * d;
    units[i] = static_cast<int>(std::floor(scaled));
    assigned += units[i];
    remainders.emplace_back(scaled - units[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t r = 0; assigned < d; ++r, ++assigned) ++units[remainders[r % s].second];
  return units;
}

}  // namespace

ValidationReport validate_against_oracle(const BruteForceInstance& instance, const ValidationOptions& options) {
  BruteForceResult oracle = brute_force_full(instance, options.inner);
  const std::size_t s = instance.sites.size();

  std::optional<PlanSolution> best;
  std::optional<Error> last_error;
  for (std::uint32_t mask = 1; mask < (1U << s); ++mask) {
    std::vector<Atom> atoms;
    const int count = std::popcount(mask);
    for (std::size_t i = 0; i < s; ++i)
      if (mask & (1U << i)) atoms.push_back({instance.sites[i], 1.0 / count});
    try {
      PlanSolution sol = solve_bounded(instance.grid, instance.f, instance.g, instance.p,
                                       AtomicMeasure(std::move(atoms)), options.bounded);
      if (!best || sol.objective.total < best->objective.total) best = std::move(sol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConvergence) throw;
      last_error = e;
    }
  }
  if (!best) throw *last_error;

  ValidationReport rep{std::move(oracle), std::move(*best), {}};
  const double oracle_value = rep.oracle.solution.objective.total;
  const double structured_value = rep.structured.objective.total;

  rep.snapped_value = evaluate_units(instance, snap_to_sites(instance, rep.structured.nu), options.inner);
  rep.snap_effect = std::abs(rep.snapped_value - structured_value);
  const std::vector<int>& units = rep.oracle.units;
  for (std::size_t i = 0; i < s; ++i) {
    if (units[i] == 0) continue;
    for (std::size_t j = 0; j < s; ++j) {
      if (i == j) continue;
      std::vector<int> moved = units;
      --moved[i];
      ++moved[j];
      rep.unit_move_effect =
          std::max(rep.unit_move_effect, std::abs(evaluate_units(instance, moved, options.inner) - oracle_value));
    }
  }
  rep.quantization_tolerance = std::max(rep.snap_effect, rep.unit_move_effect);
  rep.objective_gap = structured_value - oracle_value;
  rep.lower_bound_ok = rep.snapped_value >= oracle_value - 1e-9;
  const double slack = options.solver_precision * (1.0 + std::abs(oracle_value)) + rep.oracle.max_inner_gap;
  rep.within_tolerance = std::abs(rep.objective_gap) <= rep.quantization_tolerance + slack;
  rep.comparison = compare_solutions(rep.structured, rep.oracle.solution, options.compare);
  rep.pass = rep.lower_bound_ok && rep.within_tolerance;
  return rep;
}

}  // namespace urbanot
