#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urbanot/functionals.hpp"
#include "urbanot/measures.hpp"
#include "urbanot/planner.hpp"

namespace urbanot {

/// Exhaustive search instance: atoms may only sit at `sites` and carry masses
/// that are multiples of 1 / mass_denominator.
struct BruteForceInstance {
  Grid grid;
  std::vector<Point> sites;
  int mass_denominator = 20;
  FunctionFamily f = FunctionFamily::quadratic();
  ConcentrationFamily g = ConcentrationFamily::power(1.0, 0.5);
  double p = 2.0;
};

inline constexpr std::size_t kMaxOracleCells = 64;
inline constexpr std::size_t kMaxOracleSites = 8;
inline constexpr std::uint64_t kMaxOracleConfigurations = 10'000'000;

/// Number of mass configurations (compositions of the denominator over the
/// sites, zero parts allowed).
std::uint64_t configuration_count(const BruteForceInstance& instance);

struct InnerOptions {
  /// Stop when primal - dual <= tol * (1 + |primal|).
  double tol = 1e-12;
  int max_sweeps = 20000;
};

/// Fully discrete inner problem at fixed nu: the cell-to-atom shipments and
/// the cell densities are optimized jointly.
struct InnerSolution {
  GridDensity mu;
  double transport = 0.0;
  double F = 0.0;
  /// Primal value transport + F.
  double value = 0.0;
  /// Dual value, a certified lower bound on the inner optimum.
  double lower_bound = 0.0;
  int sweeps = 0;
};

InnerSolution solve_inner(const Grid& grid, const AtomicMeasure& nu, const FunctionFamily& f, double p,
                          const InnerOptions& options = {});

struct BruteForceResult {
  PlanSolution solution;
  /// Mass units (out of mass_denominator) per site for the argmin.
  std::vector<int> units;
  /// Largest primal - dual gap over all inner solves; `solution.objective.total`
  /// minus this is a certified lower bound on the discrete optimum.
  double max_inner_gap = 0.0;
  std::uint64_t configurations = 0;
  int mass_denominator = 20;
};

/// Global discrete argmin. Throws SearchSpaceTooLarge, GridTooCoarse,
/// AtomOutsideDomain.
BruteForceResult brute_force_full(const BruteForceInstance& instance, const InnerOptions& options = {});

struct CompareTolerances {
  double objective = 1e-6;
  double density_l1 = 1e-2;
  double atom_distance = 1e-6;
  double atom_mass = 1e-6;
};

struct ComparisonReport {
  double objective_gap = 0.0;
  double density_l1_gap = 0.0;
  /// Largest position/mass mismatch over greedily matched atom pairs.
  double atom_distance_gap = 0.0;
  double atom_mass_gap = 0.0;
  /// Mass of atoms left without a partner.
  double unmatched_mass = 0.0;
  bool pass = false;
};

/// Throws IncompatibleGrids when the densities live on different grids.
ComparisonReport compare_solutions(const PlanSolution& a, const PlanSolution& b,
                                   const CompareTolerances& tolerances = {});

struct ValidationOptions {
  BoundedOptions bounded;
  InnerOptions inner;
  /// Relative slack added to the quantization tolerance for solver precision.
  double solver_precision = 1e-6;
  CompareTolerances compare;
};

/// Structured heuristic against exhaustive search on one instance.
struct ValidationReport {
  BruteForceResult oracle;
  PlanSolution structured;
  ComparisonReport comparison;
  /// Structured atoms moved to their nearest site, masses rounded to the
  /// oracle's mass grid, re-evaluated with the exact inner solve.
  double snapped_value = 0.0;
  /// |snapped - structured|: effect of forcing the structured answer onto the
  /// oracle's resolution.
  double snap_effect = 0.0;
  /// Largest |value change| when one mass unit moves between two sites of the
  /// oracle argmin.
  double unit_move_effect = 0.0;
  double quantization_tolerance = 0.0;
  /// structured - oracle.
  double objective_gap = 0.0;
  /// snapped >= oracle - 1e-9.
  bool lower_bound_ok = false;
  /// |objective_gap| <= quantization_tolerance + precision slack.
  bool within_tolerance = false;
  bool pass = false;
};

/// Runs the bounded heuristic from every nonempty subset of sites (equal
/// masses), keeps the best and checks it against brute force.
ValidationReport validate_against_oracle(const BruteForceInstance& instance, const ValidationOptions& options = {});

}  // namespace urbanot
