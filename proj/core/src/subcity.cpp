#include "urbanot/subcity.hpp"

#include <cmath>
#include <vector>

#include "urbanot/error.hpp"
#include "urbanot/quadrature.hpp"
#include "urbanot/semidiscrete.hpp"

namespace urbanot {

namespace {

void check_mass(double m, bool allow_zero) {
  const bool ok = allow_zero ? (m >= 0.0 && m <= 1.0) : (m > 0.0 && m <= 1.0);
  if (!ok || !std::isfinite(m)) throw Error(ErrorCode::MassOutOfRange, "mass " + std::to_string(m));
}

double dk_integral(const FunctionFamily& f, double p, int n, double radius) {
  const double rp = std::pow(radius, p);
  return n * unit_ball_volume(n) *
         radial_integral(radius, [&](double r) { return f.dk(rp - std::pow(r, p)) * std::pow(r, n - 1); });
}

/// Unit-radius integrals of a power-law profile. For f(s) = a s^q the profile
/// k(R^p - r^p) is homogeneous in R, so every ball integral is the unit-ball
/// value times a power of R.
struct UnitBall {
  double mass;
  double cost;  // transport + F
  double dk;
  double mass_exponent;
  double dk_exponent;
};

const UnitBall& unit_ball(const FunctionFamily& f, double p, int n) {
  struct Entry {
    double a, q, p;
    int n;
    UnitBall ball;
  };
  thread_local std::vector<Entry> cache;
  for (const Entry& e : cache)
    if (e.a == f.a() && e.q == f.q() && e.p == p && e.n == n) return e.ball;
  const double beta = 1.0 / (f.q() - 1.0);
  const BallTerms t = ball_terms(f, p, n, 1.0);
  const UnitBall ball{t.mass, t.transport + t.F, dk_integral(f, p, n, 1.0), n + p * beta, n + p * (beta - 1.0)};
  if (cache.size() >= 16) cache.erase(cache.begin());
  cache.push_back({f.a(), f.q(), p, n, ball});
  return cache.back().ball;
}

bool homogeneous(const FunctionFamily& f) { return f.kind() != FunctionFamily::Kind::Custom; }

double scaled_radius(const UnitBall& ball, double m) { return std::pow(m / ball.mass, 1.0 / ball.mass_exponent); }

}  // namespace

BallTerms ball_terms(const FunctionFamily& f, double p, int n, double radius) {
  BallTerms t;
  if (!(radius > 0.0)) return t;
  const double rp = std::pow(radius, p);
  const double shell = n * unit_ball_volume(n);
  t.mass = mass_of_radius(f, p, n, radius);
  t.transport = shell * radial_integral(radius, [&](double r) {
                  const double rq = std::pow(r, p);
                  return f.k(rp - rq) * rq * std::pow(r, n - 1);
                });
  t.F = shell * radial_integral(radius, [&](double r) {
          return f.f(f.k(rp - std::pow(r, p))) * std::pow(r, n - 1);
        });
  return t;
}

double subcity_energy(const FunctionFamily& f, const ConcentrationFamily& g, double p, int n, double m) {
  check_mass(m, true);
  if (m == 0.0) return 0.0;
  if (homogeneous(f)) {
    const UnitBall& ball = unit_ball(f, p, n);
    return g.g(m) + ball.cost * std::pow(scaled_radius(ball, m), ball.mass_exponent + p);
  }
  const BallTerms t = ball_terms(f, p, n, radius_of_mass(f, p, n, m));
  return g.g(m) + t.transport + t.F;
}

double subcity_energy_dm(const FunctionFamily& f, const ConcentrationFamily& g, double p, int n, double m) {
  check_mass(m, false);
  if (homogeneous(f)) return g.dg(m) + std::pow(scaled_radius(unit_ball(f, p, n), m), p);
  return g.dg(m) + std::pow(radius_of_mass(f, p, n, m), p);
}

double subcity_energy_d2m(const FunctionFamily& f, const ConcentrationFamily& g, double p, int n, double m) {
  check_mass(m, false);
  if (homogeneous(f)) {
    const UnitBall& ball = unit_ball(f, p, n);
    return g.d2g(m) + 1.0 / (ball.dk * std::pow(scaled_radius(ball, m), ball.dk_exponent));
  }
  return g.d2g(m) + 1.0 / dk_integral(f, p, n, radius_of_mass(f, p, n, m));
}

EnergyCurve::EnergyCurve(FunctionFamily f, ConcentrationFamily g, double p, int n, int samples, double m_min)
    : f_(std::move(f)), g_(std::move(g)), p_(p), n_(n) {
  if (samples < 2 || !(m_min > 0.0) || !(m_min < 1.0))
    throw Error(ErrorCode::ConfigError, "energy curve needs >= 2 samples and 0 < m_min < 1");
  const double log_lo = std::log(m_min);
  for (int s = 0; s < samples; ++s) {
    const double m = s + 1 == samples ? 1.0 : std::exp(log_lo * (1.0 - static_cast<double>(s) / (samples - 1)));
    samples_.push_back({m, E(m), dE(m), d2E(m)});
  }
}

std::vector<double> default_radius_sweep() {
  std::vector<double> radii;
  for (int k = 0; k <= 15; ++k) radii.push_back(std::pow(10.0, -1.0 - k / 3.0));
  return radii;
}

AtomizationReport check_atomization_condition(const FunctionFamily& f, const ConcentrationFamily& g, double p,
                                              int n, const std::vector<double>& radius_sweep) {
  AtomizationReport rep;
  rep.radii = radius_sweep;
  for (double r : radius_sweep) {
    const double mass = mass_of_radius(f, p, n, r);
    rep.products.push_back(g.d2g(mass) * dk_integral(f, p, n, r));
  }
  if (rep.products.empty()) return rep;
  const std::size_t tail = rep.products.size() / 2;
  rep.limsup_estimate = rep.products[tail];
  bool satisfied = true;
  for (std::size_t i = tail; i < rep.products.size(); ++i) {
    rep.limsup_estimate = std::max(rep.limsup_estimate, rep.products[i]);
    if (!(rep.products[i] < -1.0)) satisfied = false;
    if (i > tail && !(rep.products[i] < rep.products[i - 1])) satisfied = false;
  }
  rep.satisfied = satisfied;
  return rep;
}

double subadditivity_threshold(const EnergyCurve& curve) {
  double m0 = 0.0;
  for (const EnergySample& s : curve.samples()) {
    if (!(s.d2E < 0.0)) break;
    m0 = s.m;
  }
  return m0;
}

int curvature_sign_changes(const EnergyCurve& curve) {
  int changes = 0;
  const auto& s = curve.samples();
  for (std::size_t i = 1; i < s.size(); ++i)
    if ((s[i].d2E < 0.0) != (s[i - 1].d2E < 0.0)) ++changes;
  return changes;
}

}  // namespace urbanot
