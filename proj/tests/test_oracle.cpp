#include <gtest/gtest.h>

#include <cmath>

#include "urbanot/error.hpp"
#include "urbanot/oracle.hpp"

using namespace urbanot;

namespace {

BruteForceInstance line_instance(int cells, std::vector<double> xs) {
  BruteForceInstance inst{Grid(Domain::interval(0.0, 1.0), cells), {}};
  for (double x : xs) inst.sites.push_back({x});
  return inst;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(Oracle, ConfigurationCountIsStarsAndBars) {
  auto inst = line_instance(16, {0.2, 0.5, 0.8});
  EXPECT_EQ(configuration_count(inst), binomial(22, 2));
  inst.mass_denominator = 10;
  inst.sites.push_back({0.9});
  EXPECT_EQ(configuration_count(inst), binomial(13, 3));
}

TEST(Oracle, InnerSolveCertifiesItsGap) {
  const Grid grid(Domain::interval(0.0, 1.0), 32);
  const AtomicMeasure nu({{{0.3}, 0.4}, {{0.75}, 0.6}});
  for (double p : {1.0, 2.0}) {
    const InnerSolution s = solve_inner(grid, nu, FunctionFamily::quadratic(), p);
    EXPECT_NEAR(s.mu.total_mass(), 1.0, 1e-9);
    EXPECT_LE(s.lower_bound, s.value + 1e-12);
    EXPECT_LE(s.value - s.lower_bound, 1e-9 * (1.0 + s.value));
    EXPECT_NEAR(s.value, s.transport + s.F, 1e-12);
  }
}

TEST(Oracle, SingleSiteMatchesStructuredSubproblem) {
  auto inst = line_instance(32, {0.5});
  const BruteForceResult r = brute_force_full(inst);
  ASSERT_EQ(r.units, std::vector<int>{20});
  const auto structured = min_Fp_nu(AtomicMeasure({{{0.5}, 1.0}}), inst.f, 2.0, inst.grid);
  double l1 = 0.0;
  for (std::size_t c = 0; c < inst.grid.cell_count(); ++c)
    l1 += std::abs(structured.density.values()[c] - r.solution.mu.values()[c]) * inst.grid.cell_volume();
  EXPECT_LE(l1, 0.02);
  EXPECT_NEAR(r.solution.objective.total, structured.total() + inst.g.g(1.0), 0.02 * r.solution.objective.total);
}

TEST(Oracle, TwoSymmetricSitesFollowEnergyComparison) {
  // Sites far enough apart that two full balls fit without touching.
  for (double b : {0.02, 2.0}) {
    BruteForceInstance inst{Grid(Domain::interval(-2.0, 2.0), 48), {{-1.0}, {1.0}}};
    inst.mass_denominator = 2;
    inst.g = ConcentrationFamily::power(b, 0.5);
    const BruteForceResult r = brute_force_full(inst);
    const int occupied = (r.units[0] > 0) + (r.units[1] > 0);
    const double split = inst.g.g(0.5) * 2.0 - inst.g.g(1.0);
    // Splitting costs g in concentration but saves transport and crowding.
    if (b > 1.0)
      EXPECT_EQ(occupied, 1) << split;
    else
      EXPECT_EQ(occupied, 2) << split;
  }
}

TEST(Oracle, NegligibleConcentrationCostSpreadsOut) {
  for (double a : {0.5, 2.0}) {
    auto inst = line_instance(24, {1.0 / 6.0, 0.5, 5.0 / 6.0});
    inst.f = FunctionFamily::power(a, 2.0);
    inst.g = ConcentrationFamily::power(1e-6, 0.5);
    inst.mass_denominator = 3;
    const BruteForceResult r = brute_force_full(inst);
    EXPECT_EQ(r.units, (std::vector<int>{1, 1, 1}));
  }
}

TEST(Oracle, CompareIdenticalAndPermuted) {
  auto inst = line_instance(16, {0.25, 0.75});
  inst.mass_denominator = 4;
  const BruteForceResult r = brute_force_full(inst);
  const ComparisonReport same = compare_solutions(r.solution, r.solution);
  EXPECT_TRUE(same.pass);
  EXPECT_EQ(same.objective_gap, 0.0);
  EXPECT_EQ(same.density_l1_gap, 0.0);

  PlanSolution permuted = r.solution;
  std::vector<Atom> atoms(r.solution.nu.atoms().rbegin(), r.solution.nu.atoms().rend());
  permuted.nu = AtomicMeasure(atoms);
  const ComparisonReport perm = compare_solutions(r.solution, permuted);
  EXPECT_TRUE(perm.pass);
  EXPECT_EQ(perm.atom_distance_gap, 0.0);
}

TEST(Oracle, CompareRejectsDifferentGrids) {
  const auto a = brute_force_full(line_instance(8, {0.5}));
  const auto b = brute_force_full(line_instance(16, {0.5}));
  try {
    compare_solutions(a.solution, b.solution);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompatibleGrids);
  }
}

TEST(Oracle, GuardsRefuseLargeSearches) {
  auto too_many_cells = line_instance(65, {0.5});
  auto too_many_sites = line_instance(16, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  for (const auto* inst : {&too_many_cells, &too_many_sites}) {
    try {
      brute_force_full(*inst);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SearchSpaceTooLarge);
    }
  }
  auto outside = line_instance(16, {1.5});
  EXPECT_THROW(brute_force_full(outside), Error);
}

TEST(Oracle, RefinementApproachesFreeEnergy) {
  // One site in the middle of a box wider than its ball: the discrete optimum
  // converges to E(1) as cells shrink.
  const auto f = FunctionFamily::quadratic();
  const auto g = ConcentrationFamily::power(1.0, 0.5);
  const double E1 = subcity_energy(f, g, 2.0, 1, 1.0);
  double prev_err = INFINITY;
  for (int cells : {16, 32, 64}) {
    BruteForceInstance inst{Grid(Domain::interval(-1.5, 1.5), cells), {{0.0}}};
    const double err = std::abs(brute_force_full(inst).solution.objective.total - E1);
    EXPECT_LT(err, prev_err) << cells;
    prev_err = err;
  }
  EXPECT_LT(prev_err, 0.02 * E1);
}

TEST(Oracle, ValidationOnTinyInstance) {
  auto inst = line_instance(32, {0.2, 0.5, 0.8});
  inst.g = ConcentrationFamily::power(0.1, 0.5);
  const ValidationReport rep = validate_against_oracle(inst);
  EXPECT_TRUE(rep.lower_bound_ok);
  EXPECT_TRUE(rep.within_tolerance) << rep.objective_gap << " vs " << rep.quantization_tolerance;
  EXPECT_TRUE(rep.pass);
  EXPECT_GE(rep.quantization_tolerance, rep.snap_effect);
  EXPECT_GE(rep.quantization_tolerance, rep.unit_move_effect);
}
