#include "urbanot/functionals.hpp"

#include <cmath>
#include <cstdio>

#include "urbanot/error.hpp"

namespace urbanot {

namespace {

std::string fmt_params(const char* fmt, double x, double y) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, x, y);
  return buf;
}

}  // namespace

// -------------------------------------------------------- FunctionFamily

FunctionFamily FunctionFamily::quadratic() { return {Kind::Quadratic, 0.5, 2.0}; }

FunctionFamily FunctionFamily::power(double a, double q) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::ConfigError, "power f needs a > 0");
  if (!(q > 1.0) || !std::isfinite(q)) throw Error(ErrorCode::ConfigError, "power f needs q > 1");
  return {Kind::Power, a, q};
}

FunctionFamily FunctionFamily::custom(Evaluators evaluators, std::string name) {
  if (!evaluators.f || !evaluators.df || !evaluators.k || !evaluators.dk || !evaluators.conjugate)
    throw Error(ErrorCode::ConfigError, "custom f requires all five evaluators");
  FunctionFamily fam(Kind::Custom, 0.0, 0.0);
  fam.custom_ = std::move(evaluators);
  fam.name_ = std::move(name);
  return fam;
}

std::string FunctionFamily::describe() const {
  switch (kind_) {
    case Kind::Quadratic: return "quadratic";
    case Kind::Power: return fmt_params("power(a=%.17g, q=%.17g)", a_, q_);
    case Kind::Custom: return name_;
  }
  return {};
}

double FunctionFamily::f(double s) const {
  if (kind_ == Kind::Custom) return custom_.f(s);
  if (s <= 0.0) return 0.0;
  if (kind_ == Kind::Quadratic) return 0.5 * s * s;
  return a_ * std::pow(s, q_);
}

double FunctionFamily::df(double s) const {
  if (kind_ == Kind::Custom) return custom_.df(s);
  if (s <= 0.0) return 0.0;
  if (kind_ == Kind::Quadratic) return s;
  return a_ * q_ * std::pow(s, q_ - 1.0);
}

double FunctionFamily::k(double t) const {
  if (kind_ == Kind::Custom) return custom_.k(t);
  if (t <= 0.0) return 0.0;
  if (kind_ == Kind::Quadratic) return t;
  return std::pow(t / (a_ * q_), 1.0 / (q_ - 1.0));
}

double FunctionFamily::dk(double t) const {
  if (kind_ == Kind::Custom) return custom_.dk(t);
  if (t <= 0.0) return 0.0;
  if (kind_ == Kind::Quadratic) return 1.0;
  return k(t) / ((q_ - 1.0) * t);
}

double FunctionFamily::conjugate(double t) const {
  if (kind_ == Kind::Custom) return custom_.conjugate(t);
  if (t <= 0.0) return 0.0;
  if (kind_ == Kind::Quadratic) return 0.5 * t * t;
  const double s = k(t);
  return t * s - a_ * std::pow(s, q_);
}

// --------------------------------------------------- ConcentrationFamily

ConcentrationFamily ConcentrationFamily::power(double b, double r) {
  if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorCode::ConfigError, "power g needs b > 0");
  if (!(r > 0.0) || !(r < 1.0)) throw Error(ErrorCode::ConfigError, "power g needs 0 < r < 1");
  return {Kind::Power, b, r};
}

ConcentrationFamily ConcentrationFamily::custom(Evaluators evaluators, std::string name) {
  if (!evaluators.g || !evaluators.dg || !evaluators.d2g)
    throw Error(ErrorCode::ConfigError, "custom g requires g, g' and g''");
  ConcentrationFamily fam(Kind::Custom, 0.0, 0.0);
  fam.custom_ = std::move(evaluators);
  fam.name_ = std::move(name);
  return fam;
}

std::string ConcentrationFamily::describe() const {
  if (kind_ == Kind::Power) return fmt_params("power(b=%.17g, r=%.17g)", b_, r_);
  return name_;
}

double ConcentrationFamily::g(double t) const {
  if (kind_ == Kind::Custom) return custom_.g(t);
  if (t <= 0.0) return 0.0;
  return b_ * std::pow(t, r_);
}

double ConcentrationFamily::dg(double t) const {
  if (kind_ == Kind::Custom) return custom_.dg(t);
  if (t <= 0.0) return HUGE_VAL;
  return b_ * r_ * std::pow(t, r_ - 1.0);
}

double ConcentrationFamily::d2g(double t) const {
  if (kind_ == Kind::Custom) return custom_.d2g(t);
  if (t <= 0.0) return -HUGE_VAL;
  return b_ * r_ * (r_ - 1.0) * std::pow(t, r_ - 2.0);
}

// ------------------------------------------------------------- operations

double eval_F(const FunctionFamily& f, const GridDensity& mu) {
  double sum = 0.0;
  for (double u : mu.values()) sum += f.f(u);
  return sum * mu.cell_volume();
}

double eval_G(const ConcentrationFamily& g, const AtomicMeasure& nu) {
  double sum = 0.0;
  for (const Atom& a : nu.atoms()) sum += g.g(a.mass);
  return sum;
}

double k_of(const FunctionFamily& f, double t) { return f.k(t); }

double conjugate_f(const FunctionFamily& f, double t) { return f.conjugate(t); }

}  // namespace urbanot
