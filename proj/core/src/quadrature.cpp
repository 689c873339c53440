#include "urbanot/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "urbanot/error.hpp"

namespace urbanot {

GaussLegendreRule gauss_legendre(int order) {
  if (order < 1) throw Error(ErrorCode::ConfigError, "quadrature order must be >= 1");
  const auto m = static_cast<std::size_t>(order);
  GaussLegendreRule rule{std::vector<double>(m), std::vector<double>(m)};
  // Newton iteration on P_n from the Chebyshev-like initial guess.
  for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= order; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = order * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[m - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  return rule;
}

const GaussLegendreRule& gauss_legendre_64() {
  static const GaussLegendreRule rule = gauss_legendre(64);
  return rule;
}

double unit_ball_volume(int n) {
  const double half = 0.5 * n;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

double radial_integral(double radius, const std::function<double(double)>& integrand) {
  if (!(radius > 0.0)) return 0.0;
  constexpr int kPower = 4;
  const GaussLegendreRule& rule = gauss_legendre_64();
  const double half = 0.5 * radius;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = 0.5 * (rule.nodes[i] + 1.0);
    const double w = 0.5 * rule.weights[i];
    // Inner panel r = (R/2) t^4, outer panel r = R - (R/2)(1 - t)^4.
    const double inner = std::pow(t, kPower);
    const double outer = std::pow(1.0 - t, kPower);
    sum += w * kPower * std::pow(t, kPower - 1) * integrand(half * inner);
    sum += w * kPower * std::pow(1.0 - t, kPower - 1) * integrand(radius - half * outer);
  }
  return half * sum;
}

}  // namespace urbanot
