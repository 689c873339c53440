#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "urbanot/measures.hpp"

namespace urbanot {

struct Flow {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

struct TransportOptions {
  /// Masses are rounded to multiples of 1/denominator before the exact
  /// integer network simplex runs.
  std::int64_t denominator = 1'000'000'000;
  /// Pairwise costs are cached when the product of the cloud sizes is at most
  /// this many entries, otherwise recomputed on demand.
  std::size_t cost_cache_limit = 20'000'000;
};

/// Optimal coupling between two finite clouds for the cost |x - y|^p.
struct TransportPlan {
  WeightedPointCloud source;
  WeightedPointCloud target;
  std::vector<Flow> flows;
  double cost_exponent = 1.0;
  double total_cost = 0.0;
  /// Largest |quantized weight - input weight| over both clouds.
  double quantization_residual = 0.0;
  std::size_t pivots = 0;

  std::vector<double> source_marginal() const;
  std::vector<double> target_marginal() const;
  /// Largest deviation of the plan marginals from the cloud weights.
  double marginal_residual() const;
};

/// Kantorovich potentials: psi on the source points, psi_c on the target
/// points, with psi(x) + psi_c(y) <= |x - y|^p and equality on the flows.
struct PotentialPair {
  std::vector<double> psi;
  std::vector<double> psi_c;
};

/// Exact min-cost flow. Throws EmptyCloud, UnbalancedMasses, NoConvergence.
TransportPlan solve_discrete_transport(const WeightedPointCloud& source,
                                       const WeightedPointCloud& target, double p,
                                       const TransportOptions& options = {});

/// chi^c(y) = min_x |x - y|^p - chi(x) over the points of `from`.
std::vector<double> c_transform(const WeightedPointCloud& from, std::span<const double> values,
                                const WeightedPointCloud& to, double p);

/// Dual certificate for an optimal plan, obtained from shortest paths in the
/// residual graph and made c-concave. The additive constant is fixed so that
/// min psi = 0.
PotentialPair recover_potentials(const TransportPlan& plan);

/// Dual objective evaluated against the plan's own marginals.
double dual_value(const TransportPlan& plan, const PotentialPair& potentials);
/// max over all pairs of psi + psi_c - |x - y|^p (should be <= 0).
double max_dual_violation(const TransportPlan& plan, const PotentialPair& potentials);
/// max over flow-carrying pairs of | psi + psi_c - |x - y|^p |.
double max_slackness_violation(const TransportPlan& plan, const PotentialPair& potentials);

/// W_p = T_p^{1/p}.
double wasserstein(const WeightedPointCloud& source, const WeightedPointCloud& target, double p,
                   const TransportOptions& options = {});

/// CSV triples "i,j,mass" with a header line.
void write_plan_csv(const TransportPlan& plan, std::ostream& out);

}  // namespace urbanot
