#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "reference.hpp"
#include "urbanot/error.hpp"
#include "urbanot/transport.hpp"

using namespace urbanot;

namespace {

WeightedPointCloud random_cloud(std::mt19937_64& rng, int dim, std::size_t n, bool uniform = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> coords(n * static_cast<std::size_t>(dim));
  for (double& c : coords) c = u(rng);
  std::vector<double> w = uniform ? std::vector<double>(n, 1.0 / static_cast<double>(n)) : ref::random_weights(rng, n);
  return WeightedPointCloud(dim, std::move(coords), std::move(w));
}

std::vector<std::pair<double, double>> pairs_1d(const WeightedPointCloud& c) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.emplace_back(c.point(i)[0], c.weights()[i]);
  return out;
}

}  // namespace

TEST(Transport, IdenticalCloudsCostNothing) {
  std::mt19937_64 rng(1);
  const auto cloud = random_cloud(rng, 2, 12);
  const TransportPlan plan = solve_discrete_transport(cloud, cloud, 2.0);
  EXPECT_NEAR(plan.total_cost, 0.0, 1e-15);
  for (const Flow& f : plan.flows) EXPECT_EQ(f.source, f.target);
  const PotentialPair pot = recover_potentials(plan);
  for (double v : pot.psi) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : pot.psi_c) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Transport, SinglePoints) {
  const WeightedPointCloud a(2, {0.0, 0.0}, {1.0});
  const WeightedPointCloud b(2, {3.0, 4.0}, {1.0});
  for (double p : {1.0, 1.5, 2.0}) {
    EXPECT_NEAR(solve_discrete_transport(a, b, p).total_cost, std::pow(5.0, p), 1e-12);
    EXPECT_NEAR(wasserstein(a, b, p), 5.0, 1e-12);
  }
}

TEST(Transport, TwoToOneHandSolved) {
  const WeightedPointCloud src(1, {0.0, 1.0}, {0.5, 0.5});
  const WeightedPointCloud dst(1, {0.5}, {1.0});
  const TransportPlan plan = solve_discrete_transport(src, dst, 1.0);
  EXPECT_NEAR(plan.total_cost, 0.5, 1e-12);
  const PotentialPair pot = recover_potentials(plan);
  EXPECT_NEAR(dual_value(plan, pot), 0.5, 1e-12);
  EXPECT_NEAR(*std::min_element(pot.psi.begin(), pot.psi.end()), 0.0, 0.0);
}

TEST(Transport, OneDimensionalMatchesMonotoneCoupling) {
  std::mt19937_64 rng(11);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = random_cloud(rng, 1, 5 + trial * 3);
      const auto b = random_cloud(rng, 1, 4 + trial * 2);
      const double expected = ref::monotone_cost_1d(pairs_1d(a), pairs_1d(b), p);
      EXPECT_NEAR(solve_discrete_transport(a, b, p).total_cost, expected, 1e-8 * (1.0 + expected)) << "p=" << p;
    }
  }
}

TEST(Transport, AssignmentMatchesPermutationEnumeration) {
  std::mt19937_64 rng(12);
  for (double p : {1.0, 1.5, 2.0}) {
    for (std::size_t n = 2; n <= 7; ++n) {
      const auto a = random_cloud(rng, 2, n, true);
      const auto b = random_cloud(rng, 2, n, true);
      std::vector<double> cost(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = distance_pow(a.point(i), b.point(j), p) / n;
      // Masses are quantized to 1e-9 units before the flow solve.
      EXPECT_NEAR(solve_discrete_transport(a, b, p).total_cost, ref::assignment_brute_force(cost, n), 1e-8);
    }
  }
}

TEST(Transport, PotentialsCertifyOptimality) {
  std::mt19937_64 rng(13);
  for (double p : {1.0, 1.5, 2.0}) {
    for (int trial = 0; trial < 8; ++trial) {
      const auto a = random_cloud(rng, 2, 10);
      const auto b = random_cloud(rng, 2, 10);
      const TransportPlan plan = solve_discrete_transport(a, b, p);
      EXPECT_LE(plan.marginal_residual(), 1e-9);
      const PotentialPair pot = recover_potentials(plan);
      EXPECT_LE(std::abs(dual_value(plan, pot) - plan.total_cost), 1e-8);
      EXPECT_LE(max_dual_violation(plan, pot), 1e-9);
      EXPECT_LE(max_slackness_violation(plan, pot), 1e-9);
      EXPECT_NEAR(*std::min_element(pot.psi.begin(), pot.psi.end()), 0.0, 1e-15);
    }
  }
}

TEST(Transport, CTransformProperties) {
  std::mt19937_64 rng(14);
  const auto x = random_cloud(rng, 2, 9);
  const auto y = random_cloud(rng, 2, 7);
  std::vector<double> zero(x.size(), 0.0);
  // chi = 0 on a cloud containing y gives chi^c(y) = 0.
  EXPECT_NEAR(c_transform(x, zero, x, 2.0)[3], 0.0, 0.0);

  const WeightedPointCloud single(2, {0.2, 0.3}, {1.0});
  const std::vector<double> chi0{0.7};
  const auto t = c_transform(single, chi0, y, 1.5);
  for (std::size_t j = 0; j < y.size(); ++j) EXPECT_DOUBLE_EQ(t[j], distance_pow(single.point(0), y.point(j), 1.5) - 0.7);

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> chi(x.size());
  for (double& v : chi) v = u(rng);
  const auto chic = c_transform(x, chi, y, 2.0);
  const auto chicc = c_transform(y, chic, x, 2.0);
  const auto chiccc = c_transform(x, chicc, y, 2.0);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_GE(chicc[i], chi[i] - 1e-15);
  for (std::size_t j = 0; j < y.size(); ++j) EXPECT_EQ(chiccc[j], chic[j]);
}

TEST(Transport, WassersteinMetricInequality) {
  std::mt19937_64 rng(15);
  const double diameter = std::sqrt(2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_cloud(rng, 2, 8);
    const auto b = random_cloud(rng, 2, 6);
    const double w1 = wasserstein(a, b, 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
      const double wp = wasserstein(a, b, p);
      EXPECT_GE(wp - w1, -1e-9);
      EXPECT_GE(std::pow(diameter, 1.0 - 1.0 / p) * std::pow(w1, 1.0 / p) - wp, -1e-9);
    }
  }
}

TEST(Transport, RejectsBadInput) {
  const WeightedPointCloud a(1, {0.0, 1.0}, {0.5, 0.5});
  const WeightedPointCloud heavy(1, {0.0}, {2.0});
  try {
    solve_discrete_transport(a, heavy, 2.0);
    FAIL() << "expected UnbalancedMasses";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnbalancedMasses);
  }
  try {
    solve_discrete_transport(WeightedPointCloud(1, {}, {}), a, 2.0);
    FAIL() << "expected EmptyCloud";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCloud);
  }
}

TEST(Transport, PlanCsvHasHeaderAndOneRowPerFlow) {
  const WeightedPointCloud src(1, {0.0, 1.0}, {0.5, 0.5});
  const WeightedPointCloud dst(1, {0.5}, {1.0});
  const TransportPlan plan = solve_discrete_transport(src, dst, 1.0);
  std::stringstream ss;
  write_plan_csv(plan, ss);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "i,j,mass");
  int rows = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, static_cast<int>(plan.flows.size()));
}

TEST(Transport, LargerInstanceStaysExact) {
  std::mt19937_64 rng(16);
  const auto a = random_cloud(rng, 1, 300);
  const auto b = random_cloud(rng, 1, 200);
  const double expected = ref::monotone_cost_1d(pairs_1d(a), pairs_1d(b), 2.0);
  const TransportPlan plan = solve_discrete_transport(a, b, 2.0);
  EXPECT_NEAR(plan.total_cost, expected, 1e-8);
  const PotentialPair pot = recover_potentials(plan);
  EXPECT_LE(std::abs(dual_value(plan, pot) - plan.total_cost), 1e-8);
}
