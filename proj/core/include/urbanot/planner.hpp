#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urbanot/functionals.hpp"
#include "urbanot/measures.hpp"
#include "urbanot/semidiscrete.hpp"
#include "urbanot/subcity.hpp"

namespace urbanot {

struct ObjectiveBreakdown {
  double transport = 0.0;
  double F = 0.0;
  double G = 0.0;
  double total = 0.0;
};

/// An optimal (or heuristic) resident/service pair with its diagnostics.
struct PlanSolution {
  GridDensity mu;
  AtomicMeasure nu;
  std::vector<SubcityProfile> profiles;
  ObjectiveBreakdown objective;
  /// Grid-side evaluation: discrete-oracle transport and midpoint F, next to
  /// the closed-form `objective` for R^n assemblies. Equal to `objective` for
  /// bounded solves.
  ObjectiveBreakdown grid_objective;
  /// Set when the result comes from the alternating bounded-domain heuristic.
  bool heuristic = false;
  std::string method;
  /// Objective after every accepted step (bounded solves).
  std::vector<double> history;
  int rounds = 0;
};

struct MassOptimizerOptions {
  std::uint64_t seed = 1;
  int random_starts = 20;
  int max_iterations = 500;
  /// Simplex grid resolution for the exhaustive search at k <= 3.
  int grid_resolution = 200;
  /// Lower bound kept on every mass during projected descent.
  double mass_floor = 1e-6;
};

struct MassSolution {
  std::vector<double> masses;  // sorted descending
  double value = 0.0;
  double equal_split_value = 0.0;
  /// "equal" when the equal split is (within 1e-12) the best found.
  std::string regime;
};

/// min sum_i E(m_i) over the k-simplex. Throws InvalidK.
MassSolution optimize_masses(const EnergyCurve& curve, int k, const MassOptimizerOptions& options = {});

struct AtomicProblemSolution {
  int k = 0;
  std::vector<double> masses;
  double value = 0.0;
  double m0 = 0.0;
  /// 1 + floor(2 / m0) when m0 > 0.
  std::optional<int> k_bound;
  int k_searched = 0;
  std::vector<double> value_by_k;
  std::vector<std::string> regime_by_k;
  AtomizationReport condition;
  /// Set when the atomization condition failed and k was capped at k_max.
  bool condition_warning = false;
};

AtomicProblemSolution solve_atomic_problem(const FunctionFamily& f, const ConcentrationFamily& g, double p, int n,
                                           int k_max, const MassOptimizerOptions& options = {});
AtomicProblemSolution solve_atomic_problem(const EnergyCurve& curve, int k_max,
                                           const MassOptimizerOptions& options = {});

enum class Layout { Line, Grid };

struct AssemblyOptions {
  Layout layout = Layout::Line;
  /// Cells along the longest axis of the bounding box.
  int grid_cells = 200;
  /// Translation applied to every atom.
  std::vector<double> offset;
  bool discrete_transport = true;
  TransportOptions transport;
};

/// Places the atoms at pairwise distance >= 2 R(1)(1 + 1e-6), fills each ball
/// with its radial density and evaluates the objective both in closed form and
/// on the grid.
PlanSolution assemble_rn_solution(const std::vector<double>& masses, const FunctionFamily& f,
                                  const ConcentrationFamily& g, double p, int n,
                                  const AssemblyOptions& options = {});

/// Uniform bound on subcity radii: the radius of a ball holding all the mass.
double radius_bound(const FunctionFamily& f, double p, int n);

struct BoundedOptions {
  int rounds = 20;
  int grid_cells = 64;
  double relative_tol = 1e-8;
  WeightSolveOptions weights;
  TransportOptions transport;
};

/// Alternating heuristic on a bounded box: exact mu-step, then Lloyd-style atom
/// moves and pairwise mass exchanges, each accepted only if the objective
/// decreases.
PlanSolution solve_bounded(const Domain& omega, const FunctionFamily& f, const ConcentrationFamily& g, double p,
                           const AtomicMeasure& init, const BoundedOptions& options = {});

/// Same on an explicit grid covering the domain.
PlanSolution solve_bounded(const Grid& grid, const FunctionFamily& f, const ConcentrationFamily& g, double p,
                           const AtomicMeasure& init, const BoundedOptions& options = {});

/// Evaluates T_p + F + G for a fixed nu with the exact mu-step.
PlanSolution evaluate_bounded(const Grid& grid, const FunctionFamily& f, const ConcentrationFamily& g, double p,
                              const AtomicMeasure& nu, const BoundedOptions& options = {});

/// Per-atom p-centre of the mass a plan sends to each target: barycentre for
/// p = 2, coordinate-wise weighted median for p = 1, iteratively reweighted
/// least squares otherwise.
std::vector<Point> plan_centers(const TransportPlan& plan);

}  // namespace urbanot
