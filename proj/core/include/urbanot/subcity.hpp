#pragma once

#include <vector>

#include "urbanot/functionals.hpp"

namespace urbanot {

/// Radial integrals of a full ball of residents around one atom.
struct BallTerms {
  double mass = 0.0;
  double transport = 0.0;
  double F = 0.0;
};

BallTerms ball_terms(const FunctionFamily& f, double p, int n, double radius);

/// E(m): total contribution of one atom of mass m whose residents fill the
/// ball of radius R(m). Throws MassOutOfRange outside [0, 1].
double subcity_energy(const FunctionFamily& f, const ConcentrationFamily& g, double p, int n, double m);
/// E'(m) = g'(m) + R(m)^p on (0, 1].
double subcity_energy_dm(const FunctionFamily& f, const ConcentrationFamily& g, double p, int n, double m);
/// E''(m) = g''(m) + 1 / (n w_n int_0^R k'(R^p - r^p) r^{n-1} dr) on (0, 1].
double subcity_energy_d2m(const FunctionFamily& f, const ConcentrationFamily& g, double p, int n, double m);

struct EnergySample {
  double m = 0.0;
  double E = 0.0;
  double dE = 0.0;
  double d2E = 0.0;
};

/// E sampled on a log-spaced mass grid. Immutable after construction.
class EnergyCurve {
 public:
  EnergyCurve(FunctionFamily f, ConcentrationFamily g, double p, int n, int samples = 400,
              double m_min = 1e-6);

  const FunctionFamily& f() const noexcept { return f_; }
  const ConcentrationFamily& g() const noexcept { return g_; }
  double p() const noexcept { return p_; }
  int n() const noexcept { return n_; }
  const std::vector<EnergySample>& samples() const noexcept { return samples_; }

  double E(double m) const { return subcity_energy(f_, g_, p_, n_, m); }
  double dE(double m) const { return subcity_energy_dm(f_, g_, p_, n_, m); }
  double d2E(double m) const { return subcity_energy_d2m(f_, g_, p_, n_, m); }

 private:
  FunctionFamily f_;
  ConcentrationFamily g_;
  double p_;
  int n_;
  std::vector<EnergySample> samples_;
};

struct AtomizationReport {
  std::vector<double> radii;
  std::vector<double> products;
  /// Largest product over the tail of the sweep.
  double limsup_estimate = 0.0;
  bool satisfied = false;
};

/// Default radius sweep 1e-1 down to 1e-6, three points per decade.
std::vector<double> default_radius_sweep();

/// Evaluates g''(M(R)) * n w_n int_0^R k'(R^p - r^p) r^{n-1} dr along a
/// decreasing sweep. The tail is the second half of the sweep; the condition
/// holds when every tail value is below -1 and the tail strictly decreases.
AtomizationReport check_atomization_condition(const FunctionFamily& f, const ConcentrationFamily& g, double p,
                                              int n, const std::vector<double>& radius_sweep = default_radius_sweep());

/// Largest sampled m0 with E'' < 0 on every sample in (0, m0]; 0 if the
/// first sample is already convex.
double subadditivity_threshold(const EnergyCurve& curve);

/// Number of sign changes of E'' along the samples.
int curvature_sign_changes(const EnergyCurve& curve);

}  // namespace urbanot
