#include "urbanot/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "urbanot/error.hpp"

namespace urbanot {

namespace {

struct EnergyPoint {
  double E;
  double dE;
};

EnergyPoint energy_with_slope(const EnergyCurve& curve, double m) {
  if (m <= 0.0) return {0.0, std::numeric_limits<double>::infinity()};
  m = std::min(m, 1.0);
  return {curve.E(m), curve.dE(m)};
}

double total_energy(const EnergyCurve& curve, const std::vector<double>& masses) {
  double v = 0.0;
  for (double m : masses) v += curve.E(std::min(m, 1.0));
  return v;
}

/// Euclidean projection onto { x : x_i >= floor, sum x_i = 1 }.
std::vector<double> project_to_simplex(const std::vector<double>& y, double floor) {
  const std::size_t k = y.size();
  const double budget = 1.0 - floor * static_cast<double>(k);
  std::vector<double> shifted(k);
  for (std::size_t i = 0; i < k; ++i) shifted[i] = y[i] - floor;
  std::vector<double> sorted = shifted;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    cumulative += sorted[i];
    const double t = (cumulative - budget) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) theta = t;
  }
  std::vector<double> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = std::max(shifted[i] - theta, 0.0) + floor;
  return x;
}

struct DescentResult {
  std::vector<double> masses;
  double value;
};

DescentResult projected_descent(const EnergyCurve& curve, std::vector<double> m, const MassOptimizerOptions& opt) {
  const std::size_t k = m.size();
  std::vector<double> grad(k);
  double value = 0.0;
  auto evaluate = [&](const std::vector<double>& x, std::vector<double>* g) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const EnergyPoint e = energy_with_slope(curve, x[i]);
      v += e.E;
      if (g) (*g)[i] = e.dE;
    }
    return v;
  };
  value = evaluate(m, &grad);
  double step = 1e-2 / std::max(1.0, *std::max_element(grad.begin(), grad.end()));
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    bool accepted = false;
    std::vector<double> next;
    double next_value = value;
    for (int ls = 0; ls < 60; ++ls) {
      std::vector<double> y(k);
      for (std::size_t i = 0; i < k; ++i) y[i] = m[i] - step * grad[i];
      next = project_to_simplex(y, opt.mass_floor);
      double decrease = 0.0;
      for (std::size_t i = 0; i < k; ++i) decrease += grad[i] * (m[i] - next[i]);
      next_value = evaluate(next, nullptr);
      if (next_value <= value - 1e-4 * decrease && next_value < value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double move = 0.0;
    for (std::size_t i = 0; i < k; ++i) move = std::max(move, std::abs(next[i] - m[i]));
    m = std::move(next);
    value = evaluate(m, &grad);
    step *= 2.0;
    if (move < 1e-13) break;
  }
  return {std::move(m), value};
}

/// Uniform double in [0, 1) from the raw engine output, independent of the
/// standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t k) {
  std::vector<double> x(k);
  double sum = 0.0;
  for (double& v : x) {
    v = -std::log(1.0 - uniform01(rng));
    sum += v;
  }
  for (double& v : x) v /= sum;
  return x;
}

bool better(double candidate, double incumbent) { return candidate < incumbent - 1e-14 * (1.0 + std::abs(incumbent)); }

std::vector<int> grid_resolution_for(const Domain& domain, int cells_longest) {
  double longest = 0.0;
  for (int a = 0; a < domain.dim(); ++a)
    longest = std::max(longest, domain.hi()[static_cast<std::size_t>(a)] - domain.lo()[static_cast<std::size_t>(a)]);
  std::vector<int> res;
  for (int a = 0; a < domain.dim(); ++a) {
    const double extent = domain.hi()[static_cast<std::size_t>(a)] - domain.lo()[static_cast<std::size_t>(a)];
    res.push_back(std::max(1, static_cast<int>(std::lround(cells_longest * extent / longest))));
  }
  return res;
}

struct BoundedState {
  AtomicMeasure nu;
  MuSubproblemResult mu;
  double G;
  double total;
};

BoundedState evaluate_state(const Grid& grid, const FunctionFamily& f, const ConcentrationFamily& g, double p,
                            AtomicMeasure nu, const BoundedOptions& options) {
  MuSubproblemResult mu = min_Fp_nu(nu, f, p, grid, options.weights, options.transport);
  const double G = eval_G(g, nu);
  const double total = mu.total() + G;
  return BoundedState{std::move(nu), std::move(mu), G, total};
}

PlanSolution to_plan_solution(const BoundedState& s, double p) {
  std::vector<SubcityProfile> profiles;
  for (std::size_t i = 0; i < s.nu.size(); ++i) {
    const Atom& a = s.nu.atoms()[i];
    const double c = s.mu.weights.c[i];
    profiles.push_back({a.position, a.mass, c > 0.0 ? std::pow(c, 1.0 / p) : 0.0, c});
  }
  const ObjectiveBreakdown obj{s.mu.transport, s.mu.F, s.G, s.total};
  return PlanSolution{s.mu.density, s.nu, std::move(profiles), obj, obj, true, "alternating-bounded", {}, 0};
}

}  // namespace

// ------------------------------------------------------------ masses

MassSolution optimize_masses(const EnergyCurve& curve, int k, const MassOptimizerOptions& options) {
  if (k < 1) throw Error(ErrorCode::InvalidK, "k must be >= 1");
  const auto ks = static_cast<std::size_t>(k);
  MassSolution best;
  const std::vector<double> equal(ks, 1.0 / k);
  best.equal_split_value = total_energy(curve, equal);
  best.masses = equal;
  best.value = best.equal_split_value;
  if (k == 1) {
    best.regime = "equal";
    return best;
  }
  const double floor = std::min(options.mass_floor, 0.5 / k);
  MassOptimizerOptions opt = options;
  opt.mass_floor = floor;

  auto consider = [&](std::vector<double> masses, double value) {
    if (better(value, best.value)) {
      best.value = value;
      best.masses = std::move(masses);
    }
  };

  {
    auto d = projected_descent(curve, equal, opt);
    consider(std::move(d.masses), d.value);
  }
  std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k));
  for (int s = 0; s < options.random_starts; ++s) {
    auto start = project_to_simplex(random_simplex_point(rng, ks), floor);
    auto d = projected_descent(curve, std::move(start), opt);
    consider(std::move(d.masses), d.value);
  }

  if (k <= 3 && options.grid_resolution >= k) {
    const int res = options.grid_resolution;
    std::vector<double> table(static_cast<std::size_t>(res) + 1, 0.0);
    for (int j = 1; j <= res; ++j) table[static_cast<std::size_t>(j)] = curve.E(static_cast<double>(j) / res);
    auto e = [&](int j) { return table[static_cast<std::size_t>(j)]; };
    if (k == 2) {
      for (int j = 1; j < res; ++j)
        consider({static_cast<double>(j) / res, static_cast<double>(res - j) / res}, e(j) + e(res - j));
    } else {
      for (int j1 = 1; j1 < res; ++j1)
        for (int j2 = 1; j1 + j2 < res; ++j2) {
          const int j3 = res - j1 - j2;
          consider({static_cast<double>(j1) / res, static_cast<double>(j2) / res, static_cast<double>(j3) / res},
                   e(j1) + e(j2) + e(j3));
        }
    }
  }

  std::sort(best.masses.begin(), best.masses.end(), std::greater<>());
  const double spread = best.masses.front() - best.masses.back();
  best.regime = (!better(best.value, best.equal_split_value) || spread < 1e-6) ? "equal" : "unequal";
  return best;
}

AtomicProblemSolution solve_atomic_problem(const EnergyCurve& curve, int k_max, const MassOptimizerOptions& options) {
  if (k_max < 1) throw Error(ErrorCode::InvalidK, "k_max must be >= 1");
  AtomicProblemSolution sol;
  sol.m0 = subadditivity_threshold(curve);
  sol.condition = check_atomization_condition(curve.f(), curve.g(), curve.p(), curve.n());
  int limit = k_max;
  if (sol.m0 > 0.0) {
    sol.k_bound = 1 + static_cast<int>(std::floor(2.0 / sol.m0));
    if (sol.condition.satisfied) limit = std::min(k_max, *sol.k_bound);
  }
  sol.condition_warning = !sol.condition.satisfied;
  sol.k_searched = limit;
  sol.value = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= limit; ++k) {
    MassSolution ms = optimize_masses(curve, k, options);
    sol.value_by_k.push_back(ms.value);
    sol.regime_by_k.push_back(ms.regime);
    if (k == 1 || better(ms.value, sol.value)) {
      sol.value = ms.value;
      sol.k = k;
      sol.masses = ms.masses;
    }
  }
  return sol;
}

AtomicProblemSolution solve_atomic_problem(const FunctionFamily& f, const ConcentrationFamily& g, double p, int n,
                                           int k_max, const MassOptimizerOptions& options) {
  return solve_atomic_problem(EnergyCurve(f, g, p, n), k_max, options);
}

// ---------------------------------------------------------- assembly

double radius_bound(const FunctionFamily& f, double p, int n) { return radius_of_mass(f, p, n, 1.0); }

PlanSolution assemble_rn_solution(const std::vector<double>& masses, const FunctionFamily& f,
                                  const ConcentrationFamily& g, double p, int n, const AssemblyOptions& options) {
  if (masses.empty()) throw Error(ErrorCode::InvalidK, "no masses to assemble");
  if (n < 1) throw Error(ErrorCode::ConfigError, "dimension must be >= 1");
  const double total_mass = std::accumulate(masses.begin(), masses.end(), 0.0);
  if (std::abs(total_mass - 1.0) > kInputProbabilityTol)
    throw Error(ErrorCode::NotProbability, "masses must sum to 1");
  const auto dim = static_cast<std::size_t>(n);
  const std::vector<double> offset = options.offset.empty() ? std::vector<double>(dim, 0.0) : options.offset;
  if (offset.size() != dim) throw Error(ErrorCode::ConfigError, "offset must have one entry per axis");

  const double rbar = radius_bound(f, p, n);
  const double spacing = 2.0 * rbar * (1.0 + 1e-6);
  const std::size_t k = masses.size();
  const std::size_t columns = (options.layout == Layout::Grid && n >= 2)
                                  ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k))))
                                  : k;

  std::vector<Atom> atoms;
  std::vector<SubcityProfile> profiles;
  ObjectiveBreakdown closed;
  for (std::size_t i = 0; i < k; ++i) {
    Point x(dim, 0.0);
    x[0] = static_cast<double>(i % columns) * spacing;
    if (dim >= 2) x[1] = static_cast<double>(i / columns) * spacing;
    for (std::size_t a = 0; a < dim; ++a) x[a] += offset[a];
    const double radius = radius_of_mass(f, p, n, masses[i]);
    const BallTerms t = ball_terms(f, p, n, radius);
    closed.transport += t.transport;
    closed.F += t.F;
    closed.G += g.g(masses[i]);
    atoms.push_back({x, masses[i]});
    profiles.push_back({x, masses[i], radius, std::pow(radius, p)});
  }
  closed.total = closed.transport + closed.F + closed.G;

  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  const double pad = 0.02 * rbar;
  for (const SubcityProfile& prof : profiles)
    for (std::size_t a = 0; a < dim; ++a) {
      lo[a] = std::min(lo[a], prof.center[a] - prof.radius - pad);
      hi[a] = std::max(hi[a], prof.center[a] + prof.radius + pad);
    }
  const Domain box = Domain::box(lo, hi);
  const Grid grid(box, grid_resolution_for(box, options.grid_cells));

  std::vector<double> values(grid.cell_count(), 0.0);
  Point center(dim);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    grid.cell_center(c, center);
    double best = 0.0;
    for (const SubcityProfile& prof : profiles)
      best = std::max(best, prof.weight - distance_pow(center, prof.center, p));
    values[c] = f.k(best);
  }
  AtomicMeasure nu(std::move(atoms));
  GridDensity mu = normalize(GridDensity(grid, std::move(values)));

  ObjectiveBreakdown on_grid;
  on_grid.G = closed.G;
  on_grid.F = eval_F(f, mu);
  on_grid.transport = std::numeric_limits<double>::quiet_NaN();
  if (options.discrete_transport)
    on_grid.transport = solve_discrete_transport(to_point_cloud(mu), to_point_cloud(nu), p, options.transport).total_cost;
  on_grid.total = on_grid.transport + on_grid.F + on_grid.G;

  return PlanSolution{std::move(mu), std::move(nu), std::move(profiles), closed, on_grid, false, "rn-assembly", {}, 0};
}

// ----------------------------------------------------------- bounded

std::vector<Point> plan_centers(const TransportPlan& plan) {
  const std::size_t m = plan.target.size();
  const auto dim = static_cast<std::size_t>(plan.source.dim());
  std::vector<std::vector<const Flow*>> by_target(m);
  for (const Flow& fl : plan.flows)
    if (fl.mass > 0.0) by_target[fl.target].push_back(&fl);
  std::vector<Point> centers(m);
  const double p = plan.cost_exponent;
  for (std::size_t j = 0; j < m; ++j) {
    const auto t = plan.target.point(j);
    Point y(t.begin(), t.end());
    const auto& flows = by_target[j];
    if (flows.empty()) {
      centers[j] = y;
      continue;
    }
    if (p == 1.0) {
      for (std::size_t a = 0; a < dim; ++a) {
        std::vector<std::pair<double, double>> coord;
        double total = 0.0;
        for (const Flow* fl : flows) {
          coord.emplace_back(plan.source.point(fl->source)[a], fl->mass);
          total += fl->mass;
        }
        std::sort(coord.begin(), coord.end());
        double acc = 0.0;
        for (const auto& [x, w] : coord) {
          acc += w;
          if (acc >= 0.5 * total) {
            y[a] = x;
            break;
          }
        }
      }
      centers[j] = y;
      continue;
    }
    auto weighted_mean = [&](auto weight_of) {
      Point out(dim, 0.0);
      double total = 0.0;
      for (const Flow* fl : flows) {
        const auto x = plan.source.point(fl->source);
        const double w = fl->mass * weight_of(x);
        total += w;
        for (std::size_t a = 0; a < dim; ++a) out[a] += w * x[a];
      }
      for (double& v : out) v /= total;
      return out;
    };
    y = weighted_mean([](std::span<const double>) { return 1.0; });
    if (p != 2.0) {
      for (int iter = 0; iter < 100; ++iter) {
        const Point prev = y;
        y = weighted_mean([&](std::span<const double> x) {
          return std::pow(std::max(distance(x, prev), 1e-12), p - 2.0);
        });
        if (distance(y, prev) < 1e-14) break;
      }
    }
    centers[j] = y;
  }
  return centers;
}

PlanSolution evaluate_bounded(const Grid& grid, const FunctionFamily& f, const ConcentrationFamily& g, double p,
                              const AtomicMeasure& nu, const BoundedOptions& options) {
  return to_plan_solution(evaluate_state(grid, f, g, p, nu, options), p);
}

PlanSolution solve_bounded(const Domain& omega, const FunctionFamily& f, const ConcentrationFamily& g, double p,
                           const AtomicMeasure& init, const BoundedOptions& options) {
  if (!omega.bounded()) throw Error(ErrorCode::UnboundedDomain, "bounded solve needs a bounded domain");
  return solve_bounded(Grid(omega, grid_resolution_for(omega, options.grid_cells)), f, g, p, init, options);
}

PlanSolution solve_bounded(const Grid& grid, const FunctionFamily& f, const ConcentrationFamily& g, double p,
                           const AtomicMeasure& init, const BoundedOptions& options) {
  if (!init.is_probability()) throw Error(ErrorCode::NotProbability, "initial nu must be a probability");
  const Domain& omega = grid.domain();
  BoundedState state = evaluate_state(grid, f, g, p, init, options);
  std::vector<double> history{state.total};

  auto try_accept = [&](std::vector<Atom> atoms) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (atoms[i].position == atoms[j].position) return false;
    BoundedState candidate = evaluate_state(grid, f, g, p, AtomicMeasure(std::move(atoms)), options);
    if (!better(candidate.total, state.total)) return false;
    state = std::move(candidate);
    history.push_back(state.total);
    return true;
  };

  int rounds = 0;
  for (int round = 0; round < options.rounds; ++round) {
    ++rounds;
    const double start = state.total;

    // Atom moves towards the p-centre of their cells.
    {
      const auto centers = plan_centers(state.mu.plan);
      std::vector<Atom> moved = state.nu.atoms();
      bool changed = false;
      for (std::size_t j = 0; j < moved.size(); ++j) {
        Point y = centers[j];
        for (std::size_t a = 0; a < y.size(); ++a) y[a] = std::clamp(y[a], omega.lo()[a], omega.hi()[a]);
        if (distance(y, moved[j].position) > 1e-14) {
          moved[j].position = y;
          changed = true;
        }
      }
      if (changed) try_accept(std::move(moved));
    }

    // Pairwise mass exchanges.
    const std::size_t k = state.nu.size();
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        for (double fraction : {0.2, 0.05, 0.01, 0.002}) {
          std::vector<Atom> atoms = state.nu.atoms();
          const double delta = fraction * atoms[i].mass;
          atoms[i].mass -= delta;
          atoms[j].mass += delta;
          if (try_accept(std::move(atoms))) break;
        }
      }

    if (!(start - state.total > options.relative_tol * std::abs(start))) break;
  }

  PlanSolution sol = to_plan_solution(state, p);
  sol.history = std::move(history);
  sol.rounds = rounds;
  return sol;
}

}  // namespace urbanot
