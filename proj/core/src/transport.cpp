#include "urbanot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <tuple>

#include "urbanot/error.hpp"

namespace urbanot {

namespace {

constexpr std::int64_t kInfFlow = std::numeric_limits<std::int64_t>::max();

/// Largest-remainder rounding of `weights` to integers summing to `denominator`.
std::vector<std::int64_t> quantize(const std::vector<double>& weights, std::int64_t denominator) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const auto d = static_cast<double>(denominator);
  std::vector<std::int64_t> q(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double scaled = weights[i] / total * d;
    const double fl = std::floor(scaled);
    q[i] = static_cast<std::int64_t>(fl);
    assigned += q[i];
    remainders[i] = {scaled - fl, i};
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::int64_t missing = denominator - assigned;
  for (std::size_t t = 0; missing > 0 && t < remainders.size(); ++t, --missing) ++q[remainders[t].second];
  // Only reachable through floating error on huge clouds.
  for (std::size_t t = 0; missing > 0; t = (t + 1) % q.size(), --missing) ++q[t];
  return q;
}

/// Primal network simplex on the complete bipartite graph source -> target
/// with an artificial root. Arcs are uncapacitated, so nonbasic arcs always
/// sit at zero flow and only tree arcs carry flow. The basis is kept strongly
/// feasible, which rules out cycling on the (very common) degenerate pivots.
class BipartiteNetworkSimplex {
 public:
  BipartiteNetworkSimplex(const WeightedPointCloud& source, const WeightedPointCloud& target, double p,
                          std::vector<std::int64_t> supply, std::vector<std::int64_t> demand,
                          const TransportOptions& options)
      : source_(source),
        target_(target),
        p_(p),
        n_src_(source.size()),
        n_tgt_(target.size()),
        root_(n_src_ + n_tgt_) {
    const std::size_t arcs = n_src_ * n_tgt_;
    if (arcs <= options.cost_cache_limit) {
      cost_cache_.resize(arcs);
      for (std::size_t i = 0; i < n_src_; ++i)
        for (std::size_t j = 0; j < n_tgt_; ++j)
          cost_cache_[i * n_tgt_ + j] = distance_pow(source_.point(i), target_.point(j), p_);
    }
    double max_cost = 0.0;
    if (!cost_cache_.empty()) {
      max_cost = *std::max_element(cost_cache_.begin(), cost_cache_.end());
    } else {
      for (std::size_t i = 0; i < n_src_; ++i)
        for (std::size_t j = 0; j < n_tgt_; ++j) max_cost = std::max(max_cost, cost(i, j));
    }
    // Any flow routed through the root can be shortcut by a direct arc, so an
    // artificial cost just above the largest real cost keeps the optimum free
    // of artificial flow.
    artificial_cost_ = max_cost + 1.0;
    eps_ = 1e-13 * (1.0 + max_cost);

    const std::size_t nodes = root_ + 1;
    parent_.assign(nodes, kNone);
    pred_.assign(nodes, 0);
    up_.assign(nodes, false);
    flow_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    depth_.assign(nodes, 0);
    first_child_.assign(nodes, kNone);
    next_sibling_.assign(nodes, kNone);
    prev_sibling_.assign(nodes, kNone);

    for (std::size_t v = 0; v < root_; ++v) {
      parent_[v] = root_;
      pred_[v] = artificial_arc(v);
      depth_[v] = 1;
      if (v < n_src_) {
        flow_[v] = supply[v];
        up_[v] = supply[v] > 0;
        pi_[v] = 0.0;
      } else {
        flow_[v] = demand[v - n_src_];
        up_[v] = false;
        pi_[v] = artificial_cost_;
      }
      attach(v, root_);
    }
    block_size_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs))));
  }

  void run() {
    const std::size_t max_pivots = 200 * (root_ + 10) + 10 * n_src_ * n_tgt_;
    const std::size_t refresh_every = root_ + 1;
    while (true) {
      const std::size_t in_arc = find_entering_arc();
      if (in_arc == kNone) break;
      pivot(in_arc);
      ++pivots_;
      if (pivots_ % refresh_every == 0) refresh_potentials();
      if (pivots_ > max_pivots)
        throw Error(ErrorCode::NoConvergence, "network simplex exceeded its pivot budget");
    }
    for (std::size_t v = 0; v < root_; ++v)
      if (pred_[v] >= n_src_ * n_tgt_ && flow_[v] > 0)
        throw Error(ErrorCode::NoConvergence, "artificial arc still carries flow");
  }

  std::size_t pivots() const noexcept { return pivots_; }

  /// Nonzero basic flows as (source, target, integer flow).
  std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> basic_flows() const {
    std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> out;
    for (std::size_t v = 0; v < root_; ++v) {
      if (pred_[v] >= n_src_ * n_tgt_ || flow_[v] == 0) continue;
      out.emplace_back(pred_[v] / n_tgt_, pred_[v] % n_tgt_, flow_[v]);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  double cost(std::size_t i, std::size_t j) const {
    if (!cost_cache_.empty()) return cost_cache_[i * n_tgt_ + j];
    return distance_pow(source_.point(i), target_.point(j), p_);
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t artificial_arc(std::size_t v) const { return n_src_ * n_tgt_ + v; }

  double arc_cost(std::size_t arc) const {
    const std::size_t real = n_src_ * n_tgt_;
    if (arc < real) return cost(arc / n_tgt_, arc % n_tgt_);
    return arc - real < n_src_ ? 0.0 : artificial_cost_;
  }

  double reduced_cost(std::size_t arc) const {
    const std::size_t i = arc / n_tgt_;
    const std::size_t j = arc % n_tgt_;
    return cost(i, j) + pi_[i] - pi_[n_src_ + j];
  }

  std::size_t find_entering_arc() {
    const std::size_t arcs = n_src_ * n_tgt_;
    std::size_t best = kNone;
    double best_rc = -eps_;
    std::size_t scanned_in_block = 0;
    for (std::size_t count = 0; count < arcs; ++count) {
      const std::size_t e = next_arc_;
      next_arc_ = next_arc_ + 1 == arcs ? 0 : next_arc_ + 1;
      const double rc = reduced_cost(e);
      if (rc < best_rc) {
        best_rc = rc;
        best = e;
      }
      if (++scanned_in_block == block_size_) {
        if (best != kNone) return best;
        scanned_in_block = 0;
      }
    }
    return best;
  }

  void detach(std::size_t v) {
    const std::size_t par = parent_[v];
    if (prev_sibling_[v] != kNone) next_sibling_[prev_sibling_[v]] = next_sibling_[v];
    else first_child_[par] = next_sibling_[v];
    if (next_sibling_[v] != kNone) prev_sibling_[next_sibling_[v]] = prev_sibling_[v];
    next_sibling_[v] = prev_sibling_[v] = kNone;
  }

  void attach(std::size_t v, std::size_t par) {
    parent_[v] = par;
    prev_sibling_[v] = kNone;
    next_sibling_[v] = first_child_[par];
    if (first_child_[par] != kNone) prev_sibling_[first_child_[par]] = v;
    first_child_[par] = v;
  }

  void pivot(std::size_t in_arc) {
    const std::size_t first = in_arc / n_tgt_;
    const std::size_t second = n_src_ + in_arc % n_tgt_;

    std::size_t a = first, b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b]) a = parent_[a];
      else b = parent_[b];
    }
    const std::size_t join = a;

    std::int64_t delta = kInfFlow;
    std::size_t u_out = kNone;
    int side = 0;
    for (std::size_t u = first; u != join; u = parent_[u]) {
      const std::int64_t d = up_[u] ? flow_[u] : kInfFlow;
      if (d < delta) {
        delta = d;
        u_out = u;
        side = 1;
      }
    }
    for (std::size_t u = second; u != join; u = parent_[u]) {
      const std::int64_t d = up_[u] ? kInfFlow : flow_[u];
      if (d <= delta) {
        delta = d;
        u_out = u;
        side = 2;
      }
    }
    if (side == 0 || delta == kInfFlow)
      throw Error(ErrorCode::NoConvergence, "unbounded pivot in transport simplex");

    if (delta > 0) {
      for (std::size_t u = first; u != join; u = parent_[u]) flow_[u] += up_[u] ? -delta : delta;
      for (std::size_t u = second; u != join; u = parent_[u]) flow_[u] += up_[u] ? delta : -delta;
    }

    const std::size_t u_in = side == 1 ? first : second;
    const std::size_t v_in = side == 1 ? second : first;

    // Reverse the tree path u_in -> ... -> u_out and hang it below v_in.
    path_.clear();
    for (std::size_t u = u_in;; u = parent_[u]) {
      path_.push_back(u);
      if (u == u_out) break;
    }
    saved_.clear();
    for (std::size_t u : path_) saved_.push_back({pred_[u], flow_[u], up_[u]});
    for (std::size_t u : path_) detach(u);
    attach(path_[0], v_in);
    pred_[path_[0]] = in_arc;
    up_[path_[0]] = path_[0] == first;
    flow_[path_[0]] = delta;
    for (std::size_t t = 1; t < path_.size(); ++t) {
      attach(path_[t], path_[t - 1]);
      pred_[path_[t]] = saved_[t - 1].pred;
      flow_[path_[t]] = saved_[t - 1].flow;
      up_[path_[t]] = !saved_[t - 1].up;
    }

    const double c = arc_cost(in_arc);
    const double new_pi = up_[u_in] ? pi_[v_in] - c : pi_[v_in] + c;
    const double sigma = new_pi - pi_[u_in];
    update_subtree(u_in, sigma);
  }

  void update_subtree(std::size_t top, double sigma) {
    stack_.clear();
    stack_.push_back(top);
    while (!stack_.empty()) {
      const std::size_t v = stack_.back();
      stack_.pop_back();
      pi_[v] += sigma;
      depth_[v] = depth_[parent_[v]] + 1;
      for (std::size_t c = first_child_[v]; c != kNone; c = next_sibling_[c]) stack_.push_back(c);
    }
  }

  void refresh_potentials() {
    stack_.clear();
    for (std::size_t c = first_child_[root_]; c != kNone; c = next_sibling_[c]) stack_.push_back(c);
    while (!stack_.empty()) {
      const std::size_t v = stack_.back();
      stack_.pop_back();
      const double cst = arc_cost(pred_[v]);
      pi_[v] = up_[v] ? pi_[parent_[v]] - cst : pi_[parent_[v]] + cst;
      depth_[v] = depth_[parent_[v]] + 1;
      for (std::size_t c = first_child_[v]; c != kNone; c = next_sibling_[c]) stack_.push_back(c);
    }
  }

  struct SavedArc {
    std::size_t pred;
    std::int64_t flow;
    bool up;
  };

  const WeightedPointCloud& source_;
  const WeightedPointCloud& target_;
  double p_;
  std::size_t n_src_;
  std::size_t n_tgt_;
  std::size_t root_;
  std::vector<double> cost_cache_;
  double artificial_cost_ = 1.0;
  double eps_ = 0.0;

  std::vector<std::size_t> parent_;
  std::vector<std::size_t> pred_;
  std::vector<bool> up_;
  std::vector<std::int64_t> flow_;
  std::vector<double> pi_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> first_child_;
  std::vector<std::size_t> next_sibling_;
  std::vector<std::size_t> prev_sibling_;

  std::size_t block_size_ = 10;
  std::size_t next_arc_ = 0;
  std::size_t pivots_ = 0;

  std::vector<std::size_t> path_;
  std::vector<SavedArc> saved_;
  std::vector<std::size_t> stack_;
};

void check_cloud(const WeightedPointCloud& cloud, const char* name) {
  if (cloud.size() == 0) throw Error(ErrorCode::EmptyCloud, std::string(name) + " cloud is empty");
  if (std::abs(cloud.total_weight() - 1.0) > kInputProbabilityTol)
    throw Error(ErrorCode::UnbalancedMasses,
                std::string(name) + " weights sum to " + std::to_string(cloud.total_weight()));
}

}  // namespace

// ------------------------------------------------------------ TransportPlan

std::vector<double> TransportPlan::source_marginal() const {
  std::vector<double> m(source.size(), 0.0);
  for (const Flow& f : flows) m[f.source] += f.mass;
  return m;
}

std::vector<double> TransportPlan::target_marginal() const {
  std::vector<double> m(target.size(), 0.0);
  for (const Flow& f : flows) m[f.target] += f.mass;
  return m;
}

double TransportPlan::marginal_residual() const {
  double r = 0.0;
  const auto sm = source_marginal();
  const auto tm = target_marginal();
  for (std::size_t i = 0; i < sm.size(); ++i) r = std::max(r, std::abs(sm[i] - source.weights()[i]));
  for (std::size_t j = 0; j < tm.size(); ++j) r = std::max(r, std::abs(tm[j] - target.weights()[j]));
  return r;
}

// --------------------------------------------------------------- operations

TransportPlan solve_discrete_transport(const WeightedPointCloud& source, const WeightedPointCloud& target,
                                       double p, const TransportOptions& options) {
  check_cloud(source, "source");
  check_cloud(target, "target");
  if (source.dim() != target.dim())
    throw Error(ErrorCode::InvalidMeasure, "source and target clouds differ in dimension");
  if (!(p >= 1.0)) throw Error(ErrorCode::ConfigError, "cost exponent p must be >= 1");
  if (options.denominator < 1) throw Error(ErrorCode::ConfigError, "quantization denominator must be >= 1");

  const auto supply = quantize(source.weights(), options.denominator);
  const auto demand = quantize(target.weights(), options.denominator);
  const auto d = static_cast<double>(options.denominator);

  TransportPlan plan{source, target, {}, p, 0.0, 0.0, 0};
  for (std::size_t i = 0; i < supply.size(); ++i)
    plan.quantization_residual =
        std::max(plan.quantization_residual, std::abs(static_cast<double>(supply[i]) / d - source.weights()[i]));
  for (std::size_t j = 0; j < demand.size(); ++j)
    plan.quantization_residual =
        std::max(plan.quantization_residual, std::abs(static_cast<double>(demand[j]) / d - target.weights()[j]));

  BipartiteNetworkSimplex simplex(source, target, p, supply, demand, options);
  simplex.run();
  plan.pivots = simplex.pivots();
  double total = 0.0;
  for (const auto& [i, j, f] : simplex.basic_flows()) {
    const double mass = static_cast<double>(f) / d;
    plan.flows.push_back({i, j, mass});
    total += mass * simplex.cost(i, j);
  }
  plan.total_cost = total;
  return plan;
}

std::vector<double> c_transform(const WeightedPointCloud& from, std::span<const double> values,
                                const WeightedPointCloud& to, double p) {
  if (from.size() == 0 || to.size() == 0) throw Error(ErrorCode::EmptyCloud, "c-transform over an empty cloud");
  if (values.size() != from.size()) throw Error(ErrorCode::InvalidMeasure, "one value per point required");
  std::vector<double> out(to.size());
  for (std::size_t j = 0; j < to.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < from.size(); ++i)
      best = std::min(best, distance_pow(from.point(i), to.point(j), p) - values[i]);
    out[j] = best;
  }
  return out;
}

PotentialPair recover_potentials(const TransportPlan& plan) {
  const std::size_t n = plan.source.size();
  const std::size_t m = plan.target.size();
  const double p = plan.cost_exponent;
  for (const Flow& f : plan.flows)
    if (f.source >= n || f.target >= m || !(f.mass >= 0.0))
      throw Error(ErrorCode::DegeneratePlan, "plan has an invalid flow entry");

  // Shortest-path labels from a virtual root joined to every node at zero
  // cost. Forward residual arcs are x_i -> y_j at cost c_ij; every flow
  // carrying pair adds y_j -> x_i at cost -c_ij. Optimality of the plan means
  // there is no negative cycle, so label-correcting terminates. Disconnected
  // flow components are handled by the shared root.
  const bool cached = n * m <= TransportOptions{}.cost_cache_limit;
  std::vector<double> table;
  if (cached) {
    table.resize(n * m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) table[i * m + j] = distance_pow(plan.source.point(i), plan.target.point(j), p);
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    return cached ? table[i * m + j] : distance_pow(plan.source.point(i), plan.target.point(j), p);
  };
  double max_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) max_cost = std::max(max_cost, cost(i, j));
  const double tol = 1e-14 * (1.0 + max_cost);
  std::vector<double> ds(n, 0.0);
  std::vector<double> dt(m, 0.0);
  const std::size_t max_rounds = 2 * (n + m) + 4;
  for (std::size_t round = 0;; ++round) {
    bool changed = false;
    for (std::size_t j = 0; j < m; ++j) {
      double best = dt[j];
      for (std::size_t i = 0; i < n; ++i) best = std::min(best, ds[i] + cost(i, j));
      if (best < dt[j] - tol) {
        dt[j] = best;
        changed = true;
      }
    }
    for (const Flow& f : plan.flows) {
      if (f.mass <= 0.0) continue;
      const double cand = dt[f.target] - cost(f.source, f.target);
      if (cand < ds[f.source] - tol) {
        ds[f.source] = cand;
        changed = true;
      }
    }
    if (!changed) break;
    if (round >= max_rounds)
      throw Error(ErrorCode::DegeneratePlan, "residual graph has a negative cycle; plan is not optimal");
  }

  PotentialPair pot;
  pot.psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) pot.psi[i] = -ds[i];
  // Make the pair c-concave: psi_c <- psi^c, then psi <- (psi_c)^c. Both
  // steps keep feasibility and equality on the flows.
  pot.psi_c = c_transform(plan.source, pot.psi, plan.target, p);
  pot.psi = c_transform(plan.target, pot.psi_c, plan.source, p);
  const double shift = *std::min_element(pot.psi.begin(), pot.psi.end());
  for (double& v : pot.psi) v -= shift;
  for (double& v : pot.psi_c) v += shift;
  return pot;
}

double dual_value(const TransportPlan& plan, const PotentialPair& potentials) {
  const auto sm = plan.source_marginal();
  const auto tm = plan.target_marginal();
  double v = 0.0;
  for (std::size_t i = 0; i < sm.size(); ++i) v += potentials.psi[i] * sm[i];
  for (std::size_t j = 0; j < tm.size(); ++j) v += potentials.psi_c[j] * tm[j];
  return v;
}

double max_dual_violation(const TransportPlan& plan, const PotentialPair& potentials) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < plan.source.size(); ++i)
    for (std::size_t j = 0; j < plan.target.size(); ++j)
      worst = std::max(worst, potentials.psi[i] + potentials.psi_c[j] -
                                  distance_pow(plan.source.point(i), plan.target.point(j), plan.cost_exponent));
  return worst;
}

double max_slackness_violation(const TransportPlan& plan, const PotentialPair& potentials) {
  double worst = 0.0;
  for (const Flow& f : plan.flows) {
    if (f.mass <= 0.0) continue;
    const double c = distance_pow(plan.source.point(f.source), plan.target.point(f.target), plan.cost_exponent);
    worst = std::max(worst, std::abs(potentials.psi[f.source] + potentials.psi_c[f.target] - c));
  }
  return worst;
}

double wasserstein(const WeightedPointCloud& source, const WeightedPointCloud& target, double p,
                   const TransportOptions& options) {
  const double cost = solve_discrete_transport(source, target, p, options).total_cost;
  return std::pow(std::max(cost, 0.0), 1.0 / p);
}

void write_plan_csv(const TransportPlan& plan, std::ostream& out) {
  out << "i,j,mass\n";
  char buf[40];
  for (const Flow& f : plan.flows) {
    std::snprintf(buf, sizeof buf, "%.17g", f.mass);
    out << f.source << ',' << f.target << ',' << buf << '\n';
  }
}

}  // namespace urbanot
