#include "edd/csolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

namespace edd {

void SolverConfig::validate() const {
  if (max_iters == 0) throw std::invalid_argument("max_iters must be positive");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw std::invalid_argument("armijo_c must lie in (0,1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw std::invalid_argument("backtrack_factor must lie in (0,1)");
  if (!(init_step > 0.0)) throw std::invalid_argument("init_step must be positive");
  if (!(t_min > 0.0)) throw std::invalid_argument("t_min must be positive");
}

std::array<double, 2> packet_gradient(double bits, double e, double t, double a, double t_min) {
  // D = 2^(B - Bhat); dD/dE = -D t/(t+E); dD/dt = -D (ln(1+E/t) - E/(t+E))
  const double d = std::exp2(bits - shannon_bits(e, t, t_min));
  const double de = -d * t / (t + e);
  const double dt = a - d * (std::log1p(e / t) - e / (t + e));
  return {de, dt};
}

std::vector<double> gradient(const Instance& inst, const ContinuousAllocation& alloc, double t_min) {
  const std::size_t n = inst.size();
  if (alloc.energies.size() != n || alloc.times.size() != n || alloc.order.size() != n)
    throw std::invalid_argument("allocation size does not match instance");
  const auto a = delay_coefficients(alloc.order);
  std::vector<double> g(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [ge, gt] =
        packet_gradient(inst.bits(i), alloc.energies[i], alloc.times[i], a[i], t_min);
    g[2 * i] = ge;
    g[2 * i + 1] = gt;
  }
  return g;
}

Mat2 hessian_block(const Instance& inst, std::size_t packet, double e, double t, double /*a*/,
                   double t_min) {
  if (packet >= inst.size()) throw std::out_of_range("packet index out of range");
  if (!(t >= t_min) || !(e >= 0.0)) throw std::domain_error("hessian_block outside the domain");
  const double bits = inst.bits(packet);
  // The delay term is linear, so a drops out of every second derivative.
  // Differencing without it avoids cancelling against a large constant.
  // Central differences in each coordinate; near the boundary fall back to a
  // one-sided stencil so the probe stays inside the domain.
  const double he = 1e-6 * std::max(1.0, std::abs(e));
  const double ht = 1e-6 * std::max(1.0, std::abs(t));

  Mat2 h{};
  if (e - he >= 0.0) {
    const auto gp = packet_gradient(bits, e + he, t, 0.0, t_min);
    const auto gm = packet_gradient(bits, e - he, t, 0.0, t_min);
    h[0][0] = (gp[0] - gm[0]) / (2 * he);
    h[1][0] = (gp[1] - gm[1]) / (2 * he);
  } else {
    const auto g0 = packet_gradient(bits, e, t, 0.0, t_min);
    const auto gp = packet_gradient(bits, e + he, t, 0.0, t_min);
    h[0][0] = (gp[0] - g0[0]) / he;
    h[1][0] = (gp[1] - g0[1]) / he;
  }
  if (t - ht >= t_min) {
    const auto gp = packet_gradient(bits, e, t + ht, 0.0, t_min);
    const auto gm = packet_gradient(bits, e, t - ht, 0.0, t_min);
    h[0][1] = (gp[0] - gm[0]) / (2 * ht);
    h[1][1] = (gp[1] - gm[1]) / (2 * ht);
  } else {
    const auto g0 = packet_gradient(bits, e, t, 0.0, t_min);
    const auto gp = packet_gradient(bits, e, t + ht, 0.0, t_min);
    h[0][1] = (gp[0] - g0[0]) / ht;
    h[1][1] = (gp[1] - g0[1]) / ht;
  }
  const double off = 0.5 * (h[0][1] + h[1][0]);
  h[0][1] = h[1][0] = off;
  return h;
}

double hessian_determinant_closed_form(double bits, double e, double t) {
  const double l = std::log1p(e / t);
  const double d = std::exp2(bits - t * l / std::numbers::ln2);
  return d * d * t / ((t + e) * (t + e)) * l * l;
}

void project_energies(std::span<double> energies, double budget, double shift) {
  // Threshold theta of the projection onto the face {x >= 0, sum x = budget}.
  // The shift is applied through theta so that a large common offset does
  // not round the result.
  std::vector<double> sorted(energies.begin(), energies.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double theta = sorted.empty() ? 0.0 : sorted[0] - budget;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double candidate = (running - budget) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  if (theta + shift >= 0.0) {
    for (double& x : energies) x = std::max(x - theta, 0.0);
  } else {
    for (double& x : energies) x = std::max(x + shift, 0.0);
  }
}

namespace {

struct Point {
  std::vector<double> e;
  std::vector<double> t;
};

class FixedOrderProblem {
 public:
  FixedOrderProblem(const Instance& inst, const Order& order, const SolverConfig& cfg)
      : inst_(inst), coeffs_(delay_coefficients(order)), cfg_(cfg) {}

  double cost(const Point& p) const { return linear_cost(inst_, p.e, p.t, coeffs_, cfg_.t_min); }

  Point grad(const Point& p) const {
    const std::size_t n = inst_.size();
    Point g{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      const auto [ge, gt] = packet_gradient(inst_.bits(i), p.e[i], p.t[i], coeffs_[i], cfg_.t_min);
      g.e[i] = ge;
      g.t[i] = gt;
    }
    return g;
  }

  void project(Point& p, double shift = 0.0) const {
    project_energies(p.e, inst_.energy(), shift);
    for (double& t : p.t) t = std::max(t, cfg_.t_min);
  }

  // U(y) - U(x), evaluated term by term so that it stays accurate when the
  // difference is far below the rounding error of U itself.
  double change(const Point& x, const Point& y) const {
    double total = 0.0;
    for (std::size_t i = 0; i < x.e.size(); ++i) {
      const double de = y.e[i] - x.e[i];
      const double dt = y.t[i] - x.t[i];
      // h = t ln(1 + E/t); Bhat = h / ln 2; D = exp(B ln 2 - h)
      const double log_ratio =
          std::log1p((de * x.t[i] - dt * x.e[i]) / (y.t[i] * (x.t[i] + x.e[i])));
      const double dh = dt * std::log1p(y.e[i] / y.t[i]) + x.t[i] * log_ratio;
      const double d = std::exp2(inst_.bits(i) - shannon_bits(x.e[i], x.t[i], cfg_.t_min));
      total += d * std::expm1(-dh) + coeffs_[i] * dt;
    }
    return total;
  }

  bool on_budget_face(const Point& p) const {
    return std::accumulate(p.e.begin(), p.e.end(), 0.0) >= inst_.energy() * (1.0 - 1e-12);
  }

  // P(x - alpha g). The mean of g.e moves every energy alike and is handed to
  // the projection as a shift instead of being added in.
  Point step(const Point& x, const Point& g, double alpha) const {
    const double mean = std::accumulate(g.e.begin(), g.e.end(), 0.0) / static_cast<double>(g.e.size());
    Point y = x;
    for (std::size_t i = 0; i < x.e.size(); ++i) {
      y.e[i] -= alpha * (g.e[i] - mean);
      y.t[i] -= alpha * g.t[i];
    }
    project(y, -alpha * mean);
    return y;
  }

 private:
  const Instance& inst_;
  std::vector<double> coeffs_;
  const SolverConfig& cfg_;
};

// g . d. When both endpoints of d lie on the budget face sum(e) = E, the
// energy components of d sum to zero and the mean of g.e is removed first:
// otherwise mean(g.e) * sum(d.e), which is pure rounding, swamps the slope.
double directional(const Point& g, const Point& d, bool on_face) {
  double mean = 0.0;
  if (on_face) {
    for (double v : g.e) mean += v;
    mean /= static_cast<double>(g.e.size());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < d.e.size(); ++i) s += (g.e[i] - mean) * d.e[i] + g.t[i] * d.t[i];
  return s;
}

double dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.e.size(); ++i) {
    s += (a.e[i] - b.e[i]) * (a.e[i] - b.e[i]);
    s += (a.t[i] - b.t[i]) * (a.t[i] - b.t[i]);
  }
  return std::sqrt(s);
}

}  // namespace

SolveReport solve_fixed_order(const Instance& inst, const Order& order, const SolverConfig& cfg) {
  cfg.validate();
  if (order.size() != inst.size()) throw std::invalid_argument("order size does not match instance");

  const std::size_t n = inst.size();
  const FixedOrderProblem problem(inst, order, cfg);

  Point x{std::vector<double>(n), std::vector<double>(n)};
  const double total_bits = inst.total_bits();
  for (std::size_t i = 0; i < n; ++i) {
    x.e[i] = inst.energy() * inst.bits(i) / total_bits;
    x.t[i] = std::max(inst.bits(i) / 2.0, cfg.t_min);
  }
  problem.project(x);

  SolveReport report;
  double fx = problem.cost(x);
  Point gx = problem.grad(x);
  double alpha = cfg.init_step;
  if (cfg.record_costs) report.cost_history.push_back(fx);

  std::size_t iter = 0;
  double pg = dist(x, problem.step(x, gx, 1.0));
  while (pg > cfg.grad_tol && iter < cfg.max_iters) {
    // Spectral step: project x - alpha g, then Armijo backtracking along the
    // feasible direction d = P(x - alpha g) - x. Every trial point is a convex
    // combination of feasible points.
    const Point target = problem.step(x, gx, alpha);
    const bool on_face = problem.on_budget_face(x) && problem.on_budget_face(target);
    Point d = target;
    for (std::size_t i = 0; i < n; ++i) {
      d.e[i] -= x.e[i];
      d.t[i] -= x.t[i];
    }
    const double slope = directional(gx, d, on_face);

    Point y = x;
    double delta = 0.0;
    bool accepted = false;
    double lambda = 1.0;
    for (int tries = 0; tries < 60 && slope < 0.0; ++tries) {
      for (std::size_t i = 0; i < n; ++i) {
        y.e[i] = x.e[i] + lambda * d.e[i];
        y.t[i] = std::max(x.t[i] + lambda * d.t[i], cfg.t_min);
      }
      if (y.e == x.e && y.t == x.t) break;
      delta = problem.change(x, y);
      if (delta <= cfg.armijo_c * lambda * slope) {
        accepted = true;
        break;
      }
      lambda *= cfg.backtrack_factor;
    }
    if (!accepted) break;  // no representable decrease left

    Point gy = problem.grad(y);
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double se = y.e[i] - x.e[i], st = y.t[i] - x.t[i];
      ss += se * se + st * st;
      sy += se * (gy.e[i] - gx.e[i]) + st * (gy.t[i] - gx.t[i]);
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : cfg.init_step;

    x = std::move(y);
    gx = std::move(gy);
    fx += delta;
    ++iter;
    if (cfg.record_costs) report.cost_history.push_back(fx);
    pg = dist(x, problem.step(x, gx, 1.0));
  }

  report.alloc = ContinuousAllocation{x.e, x.t, order};
  report.cost = evaluate_cost(inst, report.alloc, cfg.t_min);
  report.iterations = iter;
  report.final_pg_norm = pg;
  report.converged = pg <= cfg.grad_tol;
  report.energy_slack = inst.energy() - std::accumulate(x.e.begin(), x.e.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (report.cost.bhat[i] > inst.bits(i)) report.bhat_exceeds_bits = true;
  return report;
}

}  // namespace edd
