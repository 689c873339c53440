#pragma once

#include <functional>
#include <vector>

namespace urbanot {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int order);

/// Cached 64-point rule.
const GaussLegendreRule& gauss_legendre_64();

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Integrates `integrand(r)` over [0, R] with the 64-point rule on two panels,
/// [0, R/2] and [R/2, R], each graded by a fourth-power map toward its outer
/// endpoint. The grading flattens the algebraic behaviour of r^p near r = 0
/// and of k(R^p - r^p) near r = R.
double radial_integral(double radius, const std::function<double(double)>& integrand);

}  // namespace urbanot
