#pragma once

#include <vector>

#include "urbanot/functionals.hpp"
#include "urbanot/measures.hpp"
#include "urbanot/transport.hpp"

namespace urbanot {

/// Constants c_i of the ball-supported density
///   u(x) = k( max_i (c_i - |x - x_i|^p) v 0 ).
struct DualWeights {
  std::vector<double> c;
  /// Largest |atom mass - cell mass| at the final smoothing temperature.
  double residual = 0.0;
  int iterations = 0;
};

/// One subcity: an atom and the ball carrying its residents.
struct SubcityProfile {
  Point center;
  double mass = 0.0;
  double radius = 0.0;
  /// radius^p, the dual weight of a ball that is not clipped by neighbours.
  double weight = 0.0;
};

struct WeightSolveOptions {
  /// Mass-balance tolerance as a fraction of the total mass.
  double tol = 1e-7;
  int max_iterations = 500;
  /// Smoothing temperatures run from `tau_start` down to `tau_end`, both
  /// relative to the largest initial weight, dividing by 10 each stage.
  double tau_start = 1e-2;
  double tau_end = 1e-8;
};

/// Cell-centre sampling of the ball-supported density.
GridDensity density_from_weights(const AtomicMeasure& atoms, const DualWeights& weights,
                                 const FunctionFamily& f, double p, const Grid& grid);

/// Per-atom integral of u over the cells where that atom attains the positive
/// maximum. Ties go to the lowest atom index.
std::vector<double> cell_masses(const AtomicMeasure& atoms, const DualWeights& weights,
                                const FunctionFamily& f, double p, const Grid& grid);

/// Masses when near-tied cells are shared between atoms with a softmax of
/// temperature `tau` (absolute units). tau = 0 reproduces cell_masses.
std::vector<double> split_cell_masses(const AtomicMeasure& atoms, const DualWeights& weights,
                                      const FunctionFamily& f, double p, const Grid& grid, double tau);

/// Concave dual objective sum_i c_i a_i - int f*(max_i (c_i - |x - x_i|^p) v 0).
double dual_objective(const AtomicMeasure& atoms, const DualWeights& weights, const FunctionFamily& f,
                      double p, const Grid& grid);

/// Finds weights whose cells carry the atom masses. Throws NoConvergence,
/// GridTooCoarse, AtomOutsideDomain.
DualWeights solve_weights(const AtomicMeasure& atoms, const FunctionFamily& f, double p, const Grid& grid,
                          const WeightSolveOptions& options = {});

/// Mass n w_n int_0^R k(R^p - r^p) r^{n-1} dr of a full ball of radius R.
double mass_of_radius(const FunctionFamily& f, double p, int n, double radius);
/// Inverse of mass_of_radius. Throws NonpositiveMass.
double radius_of_mass(const FunctionFamily& f, double p, int n, double mass);

SubcityProfile make_profile(const FunctionFamily& f, double p, const Atom& atom);

struct MuSubproblemResult {
  GridDensity density;
  DualWeights weights;
  TransportPlan plan;
  /// Discrete transport cost between the density and the atoms.
  double transport = 0.0;
  double F = 0.0;
  double dual_value = 0.0;
  double total() const noexcept { return transport + F; }
};

/// Minimizes T_p(mu, nu) + F(mu) over grid densities for a fixed atomic nu.
MuSubproblemResult min_Fp_nu(const AtomicMeasure& nu, const FunctionFamily& f, double p, const Grid& grid,
                             const WeightSolveOptions& options = {},
                             const TransportOptions& transport_options = {});

}  // namespace urbanot
