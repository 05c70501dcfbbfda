#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "edd/csolve.hpp"
#include "oracles.hpp"

using namespace edd;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::vector<std::size_t> positions_of(const Order& o) {
  return std::vector<std::size_t>(o.positions().begin(), o.positions().end());
}

// Random feasible point drawn independently of the library.
void random_point(std::mt19937_64& rng, const Instance& inst, std::vector<double>& e,
                  std::vector<double>& t) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = inst.size();
  e.resize(n);
  t.resize(n);
  double sum = u(rng);
  for (double& x : e) sum += (x = u(rng));
  for (double& x : e) x *= inst.energy() / sum;
  for (double& x : t) x = std::exp(std::log(1e-3) + u(rng) * (std::log(60.0) - std::log(1e-3)));
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.backtrack_factor = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.armijo_c = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.grad_tol = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ub(1.0, 25.0), ue(0.1, 20.0), ut(0.05, 20.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + k % 4;
    std::vector<double> bits(n), e(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      bits[i] = ub(rng);
      e[i] = ue(rng);
      t[i] = ut(rng);
    }
    std::vector<std::size_t> pos(n);
    std::iota(pos.begin(), pos.end(), 0);
    std::shuffle(pos.begin(), pos.end(), rng);
    const Instance inst(bits, std::accumulate(e.begin(), e.end(), 0.0));
    const auto g = gradient(inst, {e, t, Order::from_positions(pos)});
    const auto fd = oracle::fd_gradient(bits, e, t, pos);
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(g[i] - fd[i]) / std::max(1e-3, std::abs(fd[i])));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("single packet: dU/dE at a known point") {
  const Instance inst({4.0}, 15.0);
  const auto g = gradient(inst, {{15.0}, {1.0}, Order::identity(1)});
  const auto fd = oracle::fd_gradient({4.0}, {15.0}, {1.0}, {0});
  CHECK(g[0] == doctest::Approx(fd[0]).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(fd[1]).epsilon(1e-6));
  // D = 1 at this point, so dU/dE = -t/(t+E)
  CHECK(g[0] == doctest::Approx(-1.0 / 16.0).epsilon(1e-14));
}

TEST_CASE("gradient rejects times below t_min") {
  const Instance inst({4.0}, 15.0);
  CHECK_THROWS_AS(gradient(inst, {{1.0}, {1e-8}, Order::identity(1)}), std::domain_error);
}

TEST_CASE("hessian block is positive definite and matches the exact second derivatives") {
  const Instance inst({4.0, 12.0}, 100.0);
  auto h = hessian_block(inst, 0, 1.0, 1.0, 1.0);
  CHECK(determinant(h) > 0.0);
  CHECK(h[0][0] + h[1][1] > 0.0);

  h = hessian_block(inst, 1, 10.0, 0.5, 2.0);
  const auto exact = oracle::hessian(12.0, 10.0, 0.5);
  CHECK(determinant(h) > 0.0);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) CHECK(rel_err(h[r][c], exact[r][c]) <= 1e-4);
  const double det_exact = exact[0][0] * exact[1][1] - exact[0][1] * exact[1][0];
  CHECK(determinant(h) == doctest::Approx(det_exact).epsilon(1e-4));
}

TEST_CASE("closed-form determinant equals the exact determinant") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ub(1.0, 25.0), ue(0.01, 50.0), ut(0.05, 20.0);
  for (int k = 0; k < 500; ++k) {
    const double b = ub(rng), e = ue(rng), t = ut(rng);
    const auto h = oracle::hessian(b, e, t);
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    CHECK(hessian_determinant_closed_form(b, e, t) == doctest::Approx(det).epsilon(1e-8));
  }
}

TEST_CASE("determinant vanishes as energy goes to zero") {
  // Far from zero D grows as e shrinks, so only the small-e regime is monotone.
  double prev = hessian_determinant_closed_form(4.0, 1e-2, 1.0);
  for (double e = 1e-3; e > 1e-8; e *= 0.1) {
    const double d = hessian_determinant_closed_form(4.0, e, 1.0);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-12);
  CHECK(hessian_determinant_closed_form(4.0, 0.0, 1.0) == 0.0);
  const Instance inst({4.0}, 1.0);
  CHECK(std::abs(determinant(hessian_block(inst, 0, 1e-5, 1.0, 1.0))) < 1e-6);
}

TEST_CASE("hessian block rejects points outside the domain") {
  const Instance inst({4.0}, 1.0);
  CHECK_THROWS_AS(hessian_block(inst, 0, -1.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(hessian_block(inst, 0, 1.0, 1e-9, 1.0), std::domain_error);
  CHECK_THROWS_AS(hessian_block(inst, 1, 1.0, 1.0, 1.0), std::out_of_range);
}

TEST_CASE("energy projection matches a bisection oracle") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 20.0), ub(0.1, 30.0);
  for (int k = 0; k < 500; ++k) {
    std::vector<double> v(1 + k % 7);
    for (double& x : v) x = u(rng);
    const double budget = ub(rng);
    std::vector<double> got = v;
    project_energies(got, budget);
    const auto want = oracle::project(v, budget);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
  }
}

TEST_CASE("shifted energy projection equals projecting the shifted vector") {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(-5.0, 20.0), ub(0.1, 30.0), us(-40.0, 40.0);
  for (int k = 0; k < 500; ++k) {
    std::vector<double> v(1 + k % 7);
    for (double& x : v) x = u(rng);
    const double budget = ub(rng), shift = us(rng);
    std::vector<double> got = v, shifted = v;
    for (double& x : shifted) x += shift;
    project_energies(got, budget, shift);
    const auto want = oracle::project(shifted, budget);
    for (std::size_t i = 0; i < v.size(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9).scale(budget));
  }
}

TEST_CASE("large common shift keeps the projected sum on the budget") {
  // Adding 1.5e5 to every entry before projecting loses about 3e-11 per entry;
  // passing it as a shift must not.
  const std::vector<double> v0{3.4642583581971285, 16.535741641812322};
  const double excess = (v0[0] + v0[1] - 20.0) / 2.0;
  std::vector<double> v = v0;
  project_energies(v, 20.0, 1.5e5);
  CHECK(std::abs(v[0] + v[1] - 20.0) <= 4e-15);
  CHECK(std::abs(v[0] - (v0[0] - excess)) <= 1e-14);
}

TEST_CASE("two-packet reference instance B=(15,20) E=50") {
  const auto r = solve_fixed_order(Instance({15.0, 20.0}, 50.0), Order::identity(2));
  CHECK(r.converged);
  CHECK(r.cost.bhat[0] == doctest::Approx(13.667).epsilon(0.05 / 13.667));
  CHECK(r.cost.bhat[1] == doctest::Approx(19.1396).epsilon(0.05 / 19.1396));
  CHECK(std::abs(r.cost.bhat[0] - 13.667) <= 0.05);
  CHECK(std::abs(r.cost.bhat[1] - 19.1396) <= 0.05);
  CHECK(r.final_pg_norm <= SolverConfig{}.grad_tol);
}

TEST_CASE("two-packet reference instance B=(12,20) E=20") {
  const auto r = solve_fixed_order(Instance({12.0, 20.0}, 20.0), Order::identity(2));
  CHECK(r.converged);
  CHECK(std::abs(r.cost.bhat[0] - 7.663) <= 0.05);
  CHECK(std::abs(r.cost.bhat[1] - 15.8431) <= 0.05);
}

TEST_CASE("single packet with a huge budget beats random feasible points") {
  const Instance inst({1.0}, 1000.0);
  const auto r = solve_fixed_order(inst, Order::identity(1));
  CHECK(r.converged);
  const auto g = gradient(inst, r.alloc);
  CHECK(std::abs(g[1]) <= 1e-6);  // t is interior, so dU/dt vanishes
  std::mt19937_64 rng(1);
  std::vector<double> e, t;
  for (int k = 0; k < 100; ++k) {
    random_point(rng, inst, e, t);
    CHECK(r.cost.total <= oracle::cost({1.0}, e, t, {0}) + 1e-12);
  }
}

TEST_CASE("solver cost sequence is non-increasing") {
  SolverConfig cfg;
  cfg.record_costs = true;
  const auto r = solve_fixed_order(Instance({12.0, 20.0, 7.0}, 30.0), Order::identity(3), cfg);
  REQUIRE(r.cost_history.size() == r.iterations + 1);
  for (std::size_t k = 1; k < r.cost_history.size(); ++k)
    CHECK(r.cost_history[k] <= r.cost_history[k - 1]);
}

TEST_CASE("converged optima spend the whole budget and beat random points") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ub(1.0, 25.0), uf(0.5, 4.0);
  int converged = 0;
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 1 + k % 3;
    std::vector<double> bits(n);
    for (double& b : bits) b = ub(rng);
    const Instance inst(bits, uf(rng) * std::accumulate(bits.begin(), bits.end(), 0.0));
    std::vector<std::size_t> pos(n);
    std::iota(pos.begin(), pos.end(), 0);
    std::shuffle(pos.begin(), pos.end(), rng);
    const auto r = solve_fixed_order(inst, Order::from_positions(pos));
    CHECK(r.energy_slack >= -1e-9 * inst.energy());
    if (!r.converged) continue;
    ++converged;
    CHECK(r.energy_slack <= 1e-6 * inst.energy());
    std::vector<double> e, t;
    for (int s = 0; s < 1000; ++s) {
      random_point(rng, inst, e, t);
      CHECK(r.cost.total <= oracle::cost(bits, e, t, pos) + 1e-6);
    }
  }
  CHECK(converged >= 36);
}

TEST_CASE("symmetric instance gives the same cost in either order") {
  for (double b : {3.0, 10.0, 18.0}) {
    const Instance inst({b, b}, 3.0 * b);
    const auto a = solve_fixed_order(inst, Order::identity(2));
    const auto c = solve_fixed_order(inst, Order::from_positions({1, 0}));
    CHECK(std::abs(a.cost.total - c.cost.total) <= 1e-6);
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  SolverConfig cfg;
  cfg.max_iters = 2;
  const auto r = solve_fixed_order(Instance({15.0, 20.0}, 50.0), Order::identity(2), cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations <= 2);
  CHECK(r.final_pg_norm > cfg.grad_tol);
  CHECK_THROWS_AS(solve_fixed_order(Instance({1.0}, 1.0), Order::identity(2)), std::invalid_argument);
}

TEST_CASE("more bits than the packet holds are flagged") {
  const auto r = solve_fixed_order(Instance({1.0}, 1000.0), Order::identity(1));
  CHECK(r.bhat_exceeds_bits);
  const auto s = solve_fixed_order(Instance({15.0, 20.0}, 50.0), Order::identity(2));
  CHECK_FALSE(s.bhat_exceeds_bits);
}
