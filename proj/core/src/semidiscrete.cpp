#include "urbanot/semidiscrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "urbanot/error.hpp"
#include "urbanot/quadrature.hpp"

namespace urbanot {

namespace {

void check_atoms_inside(const AtomicMeasure& atoms, const Grid& grid) {
  if (atoms.dim() != grid.dim())
    throw Error(ErrorCode::InvalidMeasure, "atoms and grid differ in dimension");
  const double slack = 1e-12 * grid.domain().diameter();
  for (const Atom& a : atoms.atoms())
    if (!grid.domain().contains(a.position, slack))
      throw Error(ErrorCode::AtomOutsideDomain, "atom lies outside the grid domain");
}

/// |x_c - x_i|^p for every cell c and atom i, row-major by cell.
std::vector<double> cell_atom_costs(const AtomicMeasure& atoms, const Grid& grid, double p) {
  const std::size_t m = atoms.size();
  std::vector<double> costs(grid.cell_count() * m);
  Point center(static_cast<std::size_t>(grid.dim()));
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    grid.cell_center(c, center);
    for (std::size_t i = 0; i < m; ++i) costs[c * m + i] = distance_pow(center, atoms.atoms()[i].position, p);
  }
  return costs;
}

/// Hard maximum of c_i - cost_ci with lowest-index ties; returns the index.
std::size_t best_atom(const double* cost_row, const std::vector<double>& c, double& value) {
  std::size_t best = 0;
  value = c[0] - cost_row[0];
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double t = c[i] - cost_row[i];
    if (t > value) {
      value = t;
      best = i;
    }
  }
  return best;
}

/// Log-sum-exp smoothed dual, its gradient and (negative semidefinite)
/// Hessian at temperature tau.
struct SmoothedDual {
  const std::vector<double>& costs;
  const std::vector<double>& masses;
  const FunctionFamily& f;
  double cell_volume;

  double value(const std::vector<double>& c, double tau, std::vector<double>* grad,
               std::vector<double>* hess) const {
    const std::size_t m = c.size();
    const std::size_t cells = costs.size() / m;
    std::vector<double> pi(m);
    double phi = 0.0;
    if (grad) grad->assign(m, 0.0);
    if (hess) hess->assign(m * m, 0.0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const double* row = &costs[cell * m];
      double tmax = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) tmax = std::max(tmax, c[i] - row[i]);
      if (tmax + tau * std::log(static_cast<double>(m)) <= 0.0) continue;
      double sum = 0.0;
      std::size_t active = 0;
      for (std::size_t i = 0; i < m; ++i) {
        pi[i] = std::exp((c[i] - row[i] - tmax) / tau);
        sum += pi[i];
        if (pi[i] > 1e-300) ++active;
      }
      const double s = tmax + tau * std::log(sum);
      if (s <= 0.0) continue;
      for (std::size_t i = 0; i < m; ++i) pi[i] /= sum;
      phi -= cell_volume * f.conjugate(s);
      if (!grad) continue;
      const double ks = f.k(s);
      for (std::size_t i = 0; i < m; ++i) (*grad)[i] -= cell_volume * ks * pi[i];
      if (!hess) continue;
      const double kps = f.dk(s);
      if (active == 1) {
        for (std::size_t i = 0; i < m; ++i)
          if (pi[i] > 1e-300) (*hess)[i * m + i] -= cell_volume * kps * pi[i] * pi[i];
        continue;
      }
      const double curv = ks / tau;
      for (std::size_t i = 0; i < m; ++i) {
        if (pi[i] <= 1e-300) continue;
        (*hess)[i * m + i] -= cell_volume * curv * pi[i];
        for (std::size_t j = 0; j < m; ++j) {
          if (pi[j] <= 1e-300) continue;
          (*hess)[i * m + j] -= cell_volume * (kps - curv) * pi[i] * pi[j];
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      phi += c[i] * masses[i];
      if (grad) (*grad)[i] += masses[i];
    }
    return phi;
  }
};

/// Solves A x = b for a small dense system by partial pivoting. Returns false
/// on a numerically singular matrix.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t m, std::vector<double>& x) {
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
    if (!(std::abs(a[piv * m + col]) > 0.0)) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < m; ++k) std::swap(a[piv * m + k], a[col * m + k]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < m; ++r) {
      const double factor = a[r * m + col] / a[col * m + col];
      if (factor == 0.0) continue;
      for (std::size_t k = col; k < m; ++k) a[r * m + k] -= factor * a[col * m + k];
      b[r] -= factor * b[col];
    }
  }
  x.assign(m, 0.0);
  for (std::size_t r = m; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < m; ++k) s -= a[r * m + k] * x[k];
    x[r] = s / a[r * m + r];
  }
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

}  // namespace

GridDensity density_from_weights(const AtomicMeasure& atoms, const DualWeights& weights, const FunctionFamily& f,
                                 double p, const Grid& grid) {
  check_atoms_inside(atoms, grid);
  if (weights.c.size() != atoms.size()) throw Error(ErrorCode::InvalidMeasure, "one weight per atom required");
  const auto costs = cell_atom_costs(atoms, grid, p);
  const std::size_t m = atoms.size();
  std::vector<double> values(grid.cell_count());
  for (std::size_t cell = 0; cell < values.size(); ++cell) {
    double v = 0.0;
    best_atom(&costs[cell * m], weights.c, v);
    values[cell] = f.k(std::max(v, 0.0));
  }
  return GridDensity(grid, std::move(values));
}

std::vector<double> cell_masses(const AtomicMeasure& atoms, const DualWeights& weights, const FunctionFamily& f,
                                double p, const Grid& grid) {
  return split_cell_masses(atoms, weights, f, p, grid, 0.0);
}

std::vector<double> split_cell_masses(const AtomicMeasure& atoms, const DualWeights& weights,
                                      const FunctionFamily& f, double p, const Grid& grid, double tau) {
  check_atoms_inside(atoms, grid);
  if (weights.c.size() != atoms.size()) throw Error(ErrorCode::InvalidMeasure, "one weight per atom required");
  const auto costs = cell_atom_costs(atoms, grid, p);
  const std::size_t m = atoms.size();
  std::vector<double> masses(m, 0.0);
  if (tau > 0.0) {
    SmoothedDual dual{costs, masses, f, grid.cell_volume()};
    std::vector<double> grad;
    dual.value(weights.c, tau, &grad, nullptr);
    for (std::size_t i = 0; i < m; ++i) masses[i] = -grad[i];
    return masses;
  }
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    double v = 0.0;
    const std::size_t i = best_atom(&costs[cell * m], weights.c, v);
    if (v > 0.0) masses[i] += f.k(v) * grid.cell_volume();
  }
  return masses;
}

double dual_objective(const AtomicMeasure& atoms, const DualWeights& weights, const FunctionFamily& f, double p,
                      const Grid& grid) {
  check_atoms_inside(atoms, grid);
  const auto costs = cell_atom_costs(atoms, grid, p);
  const std::size_t m = atoms.size();
  double phi = 0.0;
  for (std::size_t i = 0; i < m; ++i) phi += weights.c[i] * atoms.atoms()[i].mass;
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    double v = 0.0;
    best_atom(&costs[cell * m], weights.c, v);
    if (v > 0.0) phi -= grid.cell_volume() * f.conjugate(v);
  }
  return phi;
}

DualWeights solve_weights(const AtomicMeasure& atoms, const FunctionFamily& f, double p, const Grid& grid,
                          const WeightSolveOptions& options) {
  check_atoms_inside(atoms, grid);
  if (!atoms.is_probability()) throw Error(ErrorCode::NotProbability, "atomic measure must have unit mass");
  const std::size_t m = atoms.size();
  if (grid.cell_count() < m) throw Error(ErrorCode::GridTooCoarse, "fewer grid cells than atoms");

  const auto costs = cell_atom_costs(atoms, grid, p);
  const std::vector<double> masses = atoms.masses();
  const double total = atoms.total_mass();
  const double tol = options.tol * total;

  DualWeights w;
  w.c.resize(m);
  for (std::size_t i = 0; i < m; ++i) w.c[i] = std::pow(radius_of_mass(f, p, grid.dim(), masses[i]), p);
  // Scale for temperatures and step caps: the weight of a ball carrying all
  // the mass, or the domain extent when balls are clipped.
  const double scale = std::max(*std::max_element(w.c.begin(), w.c.end()),
                                std::pow(grid.max_step(), p));
  const double step_cap = std::max(scale, std::pow(grid.domain().diameter(), p));

  SmoothedDual dual{costs, masses, f, grid.cell_volume()};
  std::vector<double> grad, hess, dir, trial(m), trial_grad;
  int iterations = 0;
  double tau = options.tau_start * scale;
  const double tau_end = options.tau_end * scale;
  while (true) {
    const bool last_stage = tau <= tau_end * (1.0 + 1e-9);
    double phi = dual.value(w.c, tau, &grad, &hess);
    while (max_abs(grad) > 0.5 * tol) {
      if (++iterations > options.max_iterations)
        throw Error(ErrorCode::NoConvergence, "weight solve hit the iteration cap");
      double diag_scale = 0.0;
      for (std::size_t i = 0; i < m; ++i) diag_scale = std::max(diag_scale, -hess[i * m + i]);
      std::vector<double> neg_h(m * m);
      for (std::size_t k = 0; k < m * m; ++k) neg_h[k] = -hess[k];
      const double ridge = 1e-12 * (diag_scale + 1e-300);
      for (std::size_t i = 0; i < m; ++i) neg_h[i * m + i] += ridge;
      if (!solve_dense(neg_h, grad, m, dir) || max_abs(dir) == 0.0) {
        dir = grad;
        for (double& d : dir) d /= diag_scale > 0.0 ? diag_scale : 1.0;
      }
      const double norm = max_abs(dir);
      if (norm > step_cap)
        for (double& d : dir) d *= step_cap / norm;
      double slope = 0.0;
      for (std::size_t i = 0; i < m; ++i) slope += grad[i] * dir[i];
      if (!(slope > 0.0)) {
        // A Newton direction of a concave function is always an ascent
        // direction; fall back to the gradient if round-off says otherwise.
        dir = grad;
        const double gn = max_abs(dir);
        for (double& d : dir) d *= std::min(1.0, step_cap / gn) / std::max(diag_scale, 1.0);
        slope = 0.0;
        for (std::size_t i = 0; i < m; ++i) slope += grad[i] * dir[i];
      }
      // Armijo on the dual value, or, once value changes drown in round-off,
      // a sufficient decrease of the mass residual.
      const double residual = max_abs(grad);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        bool moved = false;
        for (std::size_t i = 0; i < m; ++i) {
          trial[i] = w.c[i] + alpha * dir[i];
          moved = moved || trial[i] != w.c[i];
        }
        if (!moved) break;
        const double trial_phi = dual.value(trial, tau, &trial_grad, nullptr);
        if (trial_phi > phi && trial_phi >= phi + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        if (std::abs(trial_phi - phi) <= 1e-14 * (1.0 + std::abs(phi)) &&
            max_abs(trial_grad) <= (1.0 - 1e-4) * residual) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;  // round-off floor at this temperature
      w.c = trial;
      phi = dual.value(w.c, tau, &grad, &hess);
    }
    if (last_stage) {
      w.residual = max_abs(grad);
      break;
    }
    tau = std::max(tau * 0.1, tau_end);
  }
  w.iterations = iterations;
  if (!(w.residual <= tol))
    throw Error(ErrorCode::NoConvergence, "weight solve stalled with mass residual " + std::to_string(w.residual));
  return w;
}

double mass_of_radius(const FunctionFamily& f, double p, int n, double radius) {
  if (!(radius > 0.0)) return 0.0;
  const double rp = std::pow(radius, p);
  const double shell = n * unit_ball_volume(n);
  return shell * radial_integral(radius, [&](double r) {
           return f.k(rp - std::pow(r, p)) * std::pow(r, n - 1);
         });
}

double radius_of_mass(const FunctionFamily& f, double p, int n, double mass) {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(ErrorCode::NonpositiveMass, "radius of a nonpositive mass");
  if (f.kind() != FunctionFamily::Kind::Custom) {
    // Power laws are homogeneous: M(R) = M(1) R^{n + p beta}.
    const double beta = f.kind() == FunctionFamily::Kind::Quadratic ? 1.0 : 1.0 / (f.q() - 1.0);
    return std::pow(mass / mass_of_radius(f, p, n, 1.0), 1.0 / (n + p * beta));
  }
  double lo = 0.0;
  double hi = 1.0;
  while (mass_of_radius(f, p, n, hi) < mass) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorCode::NoConvergence, "radius bracket diverged");
  }
  // Safeguarded Newton: dM/dR = p R^{p-1} n w_n int_0^R k'(R^p - r^p) r^{n-1} dr.
  const double shell = n * unit_ball_volume(n);
  double r = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200 && hi - lo > 4e-16 * hi; ++iter) {
    const double m_r = mass_of_radius(f, p, n, r);
    if (std::abs(m_r - mass) <= 2e-16 * mass) return r;
    if (m_r < mass) lo = r;
    else hi = r;
    const double rp = std::pow(r, p);
    const double slope = p * std::pow(r, p - 1.0) * shell *
                         radial_integral(r, [&](double s) { return f.dk(rp - std::pow(s, p)) * std::pow(s, n - 1); });
    double next = r - (m_r - mass) / slope;
    if (!(slope > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 1e-16 * r) return next;
    r = next;
  }
  return r;
}

SubcityProfile make_profile(const FunctionFamily& f, double p, const Atom& atom) {
  SubcityProfile prof;
  prof.center = atom.position;
  prof.mass = atom.mass;
  prof.radius = radius_of_mass(f, p, static_cast<int>(atom.position.size()), atom.mass);
  prof.weight = std::pow(prof.radius, p);
  return prof;
}

MuSubproblemResult min_Fp_nu(const AtomicMeasure& nu, const FunctionFamily& f, double p, const Grid& grid,
                             const WeightSolveOptions& options, const TransportOptions& transport_options) {
  DualWeights weights = solve_weights(nu, f, p, grid, options);
  GridDensity raw = density_from_weights(nu, weights, f, p, grid);
  GridDensity density = normalize(raw);
  TransportPlan plan = solve_discrete_transport(to_point_cloud(density), to_point_cloud(nu), p, transport_options);
  const double transport = plan.total_cost;
  const double F = eval_F(f, density);
  const double dual = dual_objective(nu, weights, f, p, grid);
  return MuSubproblemResult{std::move(density), std::move(weights), std::move(plan), transport, F, dual};
}

}  // namespace urbanot
