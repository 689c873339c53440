#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "reference.hpp"
#include "urbanot/error.hpp"
#include "urbanot/functionals.hpp"

using namespace urbanot;

TEST(Functionals, EvalFOnSimpleDensities) {
  const auto f = FunctionFamily::quadratic();
  const Grid one(Domain::interval(0.0, 1.0), 1);
  const Grid two(Domain::interval(0.0, 1.0), 2);
  EXPECT_DOUBLE_EQ(eval_F(f, GridDensity(two, {0.0, 0.0})), 0.0);
  EXPECT_DOUBLE_EQ(eval_F(f, GridDensity(one, {1.0})), 0.5);
  EXPECT_DOUBLE_EQ(eval_F(f, GridDensity(two, {2.0, 0.0})), 1.0);
}

TEST(Functionals, EvalGSquareRoot) {
  const auto g = ConcentrationFamily::power(1.0, 0.5);
  EXPECT_DOUBLE_EQ(eval_G(g, AtomicMeasure({{{0.0}, 1.0}})), 1.0);
  EXPECT_NEAR(eval_G(g, AtomicMeasure({{{0.0}, 0.5}, {{1.0}, 0.5}})), std::sqrt(2.0), 1e-15);
}

TEST(Functionals, GIsSubadditiveOnRandomPairs) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (double r : {0.2, 0.5, 0.9}) {
    const auto g = ConcentrationFamily::power(1.3, r);
    for (int i = 0; i < 100; ++i) {
      const double s = u(rng), t = u(rng);
      EXPECT_LE(g.g(s + t), g.g(s) + g.g(t) + 1e-15);
    }
  }
}

TEST(Functionals, KInvertsDerivative) {
  EXPECT_DOUBLE_EQ(k_of(FunctionFamily::quadratic(), 0.3), 0.3);
  EXPECT_DOUBLE_EQ(k_of(FunctionFamily::power(1.0, 2.0), 1.0), 0.5);
  for (const auto& f : {FunctionFamily::quadratic(), FunctionFamily::power(0.7, 1.5), FunctionFamily::power(2.0, 3.0)}) {
    EXPECT_EQ(f.k(-1.0), 0.0);
    EXPECT_EQ(f.k(0.0), 0.0);
    for (double t : {1e-4, 0.1, 1.0, 7.5}) EXPECT_NEAR(f.df(f.k(t)), t, 1e-12 * (1.0 + t));
  }
}

TEST(Functionals, DerivativesMatchFiniteDifferences) {
  for (const auto& f : {FunctionFamily::quadratic(), FunctionFamily::power(0.7, 1.5), FunctionFamily::power(2.0, 3.0)}) {
    for (double x : {0.2, 1.0, 3.0}) {
      const double h = 1e-6 * x;
      EXPECT_NEAR(f.df(x), (f.f(x + h) - f.f(x - h)) / (2 * h), 1e-6 * (1.0 + std::abs(f.df(x))));
      EXPECT_NEAR(f.dk(x), (f.k(x + h) - f.k(x - h)) / (2 * h), 1e-6 * (1.0 + std::abs(f.dk(x))));
    }
  }
  const auto g = ConcentrationFamily::power(0.8, 0.4);
  for (double x : {0.05, 0.5, 1.0}) {
    const double h = 1e-6 * x;
    EXPECT_NEAR(g.dg(x), (g.g(x + h) - g.g(x - h)) / (2 * h), 1e-6 * std::abs(g.dg(x)));
    EXPECT_NEAR(g.d2g(x), (g.dg(x + h) - g.dg(x - h)) / (2 * h), 1e-5 * std::abs(g.d2g(x)));
  }
}

TEST(Functionals, ConjugateAgainstNumericSupremum) {
  EXPECT_DOUBLE_EQ(conjugate_f(FunctionFamily::quadratic(), 1.0), 0.5);
  EXPECT_DOUBLE_EQ(conjugate_f(FunctionFamily::quadratic(), 0.0), 0.0);
  EXPECT_NEAR(conjugate_f(FunctionFamily::power(1.0, 2.0), 1.0), 0.25, 1e-15);
  for (const auto& f : {FunctionFamily::power(0.7, 1.5), FunctionFamily::power(2.0, 3.0)}) {
    for (double t : {0.1, 1.0, 4.0}) {
      const double numeric = ref::numeric_conjugate([&](double s) { return f.f(s); }, t, 100.0);
      EXPECT_NEAR(f.conjugate(t), numeric, 1e-9 * (1.0 + numeric));
    }
  }
}

TEST(Functionals, CustomFamilyDelegates) {
  FunctionFamily::Evaluators ev{[](double s) { return s * s; }, [](double s) { return 2 * s; },
                                [](double t) { return t > 0 ? t / 2 : 0.0; }, [](double t) { return t > 0 ? 0.5 : 0.0; },
                                [](double t) { return t > 0 ? t * t / 4 : 0.0; }};
  const auto f = FunctionFamily::custom(ev, "twice-quadratic");
  EXPECT_EQ(f.describe(), "twice-quadratic");
  EXPECT_DOUBLE_EQ(f.k(1.0), 0.5);
  EXPECT_DOUBLE_EQ(f.conjugate(1.0), 0.25);
}

TEST(Functionals, ParameterValidation) {
  EXPECT_THROW(FunctionFamily::power(0.0, 2.0), Error);
  EXPECT_THROW(FunctionFamily::power(1.0, 1.0), Error);
  EXPECT_THROW(ConcentrationFamily::power(1.0, 1.0), Error);
  EXPECT_THROW(ConcentrationFamily::power(-1.0, 0.5), Error);
}
