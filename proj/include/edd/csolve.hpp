#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "edd/model.hpp"

namespace edd {

struct SolverConfig {
  std::size_t max_iters = 200'000;
  double grad_tol = 1e-8;  // on the projected-gradient residual
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double init_step = 1.0;
  double t_min = kMinTime;
  bool record_costs = false;  // keep the per-iteration cost sequence in the report

  void validate() const;
};

struct SolveReport {
  ContinuousAllocation alloc;
  CostBreakdown cost;
  std::size_t iterations = 0;
  double final_pg_norm = 0.0;
  bool converged = false;
  double energy_slack = 0.0;       // E - sum E_i
  bool bhat_exceeds_bits = false;  // some packet is sent with more bits than it has
  std::vector<double> cost_history;
};

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Analytic gradient, interleaved as (dU/dE_1, dU/dt_1, dU/dE_2, ...).
std::vector<double> gradient(const Instance& inst, const ContinuousAllocation& alloc,
                             double t_min = kMinTime);

/// (dU/dE, dU/dt) for one packet with delay coefficient a.
std::array<double, 2> packet_gradient(double bits, double e, double t, double a,
                                      double t_min = kMinTime);

/// Second-derivative block of packet `packet` at (e, t), obtained by central
/// differences of the analytic gradient. Rows/cols are (E, t).
Mat2 hessian_block(const Instance& inst, std::size_t packet, double e, double t, double a,
                   double t_min = kMinTime);

/// Closed-form determinant of the per-packet Hessian block:
/// D^2 * t / (t + e)^2 * ln^2(1 + e / t), with D = 2^(B - Bhat).
double hessian_determinant_closed_form(double bits, double e, double t);

inline double determinant(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

/// Euclidean projection of `energies + shift` onto {x >= 0, sum x <= budget},
/// in place.
void project_energies(std::span<double> energies, double budget, double shift = 0.0);

/// Projected gradient with Armijo backtracking for a fixed transmission order.
/// Non-convergence is reported through SolveReport::converged.
SolveReport solve_fixed_order(const Instance& inst, const Order& order,
                              const SolverConfig& cfg = {});

}  // namespace edd
