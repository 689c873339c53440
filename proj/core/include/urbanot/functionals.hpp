#pragma once

#include <functional>
#include <string>

#include "urbanot/measures.hpp"

namespace urbanot {

/// Convex penalty f on resident densities, together with f', k = (f')^{-1}
/// extended by zero on t <= 0, k', and the conjugate f*.
class FunctionFamily {
 public:
  enum class Kind { Quadratic, Power, Custom };

  struct Evaluators {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> k;
    std::function<double(double)> dk;
    std::function<double(double)> conjugate;
  };

  /// f(s) = s^2 / 2.
  static FunctionFamily quadratic();
  /// f(s) = a s^q with a > 0, q > 1.
  static FunctionFamily power(double a, double q);
  /// User-supplied evaluators. Nothing is checked analytically.
  static FunctionFamily custom(Evaluators evaluators, std::string name = "custom");

  Kind kind() const noexcept { return kind_; }
  double a() const noexcept { return a_; }
  double q() const noexcept { return q_; }
  std::string describe() const;

  double f(double s) const;
  double df(double s) const;
  /// Inverse of f' on t > 0, zero for t <= 0.
  double k(double t) const;
  /// Derivative of k; zero for t <= 0.
  double dk(double t) const;
  /// f*(t) = sup_s s t - f(s) for t >= 0.
  double conjugate(double t) const;

 private:
  FunctionFamily(Kind kind, double a, double q) : kind_(kind), a_(a), q_(q) {}
  Kind kind_;
  double a_;
  double q_;
  Evaluators custom_;
  std::string name_;
};

/// Subadditive concentration cost g on atom masses, with g' and g''.
class ConcentrationFamily {
 public:
  enum class Kind { Power, Custom };

  struct Evaluators {
    std::function<double(double)> g;
    std::function<double(double)> dg;
    std::function<double(double)> d2g;
  };

  /// g(t) = b t^r with b > 0, 0 < r < 1.
  static ConcentrationFamily power(double b, double r);
  static ConcentrationFamily custom(Evaluators evaluators, std::string name = "custom");

  Kind kind() const noexcept { return kind_; }
  double b() const noexcept { return b_; }
  double r() const noexcept { return r_; }
  std::string describe() const;

  double g(double t) const;
  double dg(double t) const;
  double d2g(double t) const;

 private:
  ConcentrationFamily(Kind kind, double b, double r) : kind_(kind), b_(b), r_(r) {}
  Kind kind_;
  double b_;
  double r_;
  Evaluators custom_;
  std::string name_;
};

/// Midpoint-rule value of the integral of f(u).
double eval_F(const FunctionFamily& f, const GridDensity& mu);
/// Sum of g over the atom masses.
double eval_G(const ConcentrationFamily& g, const AtomicMeasure& nu);
double k_of(const FunctionFamily& f, double t);
double conjugate_f(const FunctionFamily& f, double t);

}  // namespace urbanot
