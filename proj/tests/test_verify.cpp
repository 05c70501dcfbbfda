#include <bit>
#include <cmath>

#include "doctest.h"
#include "edd/csolve.hpp"
#include "edd/verify.hpp"

using namespace edd;

namespace {

SetFunction by_cardinality(std::size_t n, double (*g)(double)) {
  return SetFunction{n, [g](std::uint32_t m) { return g(std::popcount(m)); }, {}};
}

CheckOptions sampled(std::size_t trials, std::uint64_t seed) {
  return CheckOptions{trials, seed, false, Exec::parallel};
}

}  // namespace

TEST_CASE("modular function is supermodular with zero margin") {
  const std::vector<double> w{0.3, 1.7, -2.0, 5.5, 0.1, 0.9, 3.3};
  const SetFunction f{w.size(), [w](std::uint32_t m) {
                        double s = 0.0;
                        for (std::size_t i = 0; i < w.size(); ++i)
                          if (m >> i & 1) s += w[i];
                        return s;
                      }, {}};
  const auto r = check_supermodular(f);
  CHECK(r.exhaustive);
  CHECK(r.violations == 0);
  CHECK(r.margin == 0.0);
  CHECK_FALSE(r.worst_witness.has_value());
}

TEST_CASE("convex and concave functions of cardinality") {
  const auto sq = check_supermodular(by_cardinality(8, [](double k) { return k * k; }));
  CHECK(sq.violations == 0);
  const auto root = check_supermodular(by_cardinality(8, [](double k) { return std::sqrt(k); }));
  CHECK(root.violations > 0);
  CHECK(root.margin < 0.0);
  REQUIRE(root.worst_witness.has_value());
  CHECK(root.worst_witness->find("S={}") == 0);  // the largest gap is at the empty set
}

TEST_CASE("monotone examples") {
  CHECK(check_monotone(by_cardinality(6, [](double) { return 4.0; })).violations == 0);
  CHECK(check_monotone(by_cardinality(6, [](double k) { return std::exp2(-k); })).violations == 0);
  const auto inc = check_monotone(by_cardinality(6, [](double k) { return k; }));
  CHECK(inc.violations == inc.trials);
  CHECK(inc.trials == 6 * 32);  // n 2^(n-1) pairs (S, x)
}

TEST_CASE("sampling mode above ten elements") {
  const auto f = by_cardinality(16, [](double k) { return std::sqrt(k); });
  const auto r = check_supermodular(f, sampled(2000, 5));
  CHECK_FALSE(r.exhaustive);
  CHECK(r.trials + r.skipped == 2000);
  CHECK(r.violations > 0);
  const auto g = by_cardinality(16, [](double k) { return k * k; });
  CHECK(check_supermodular(g, sampled(2000, 5)).violations == 0);
  CHECK_THROWS_AS(check_supermodular(by_cardinality(21, [](double k) { return k; })), SizeError);
}

TEST_CASE("checkers are deterministic and thread-count independent") {
  const auto f = by_cardinality(14, [](double k) { return std::sin(k); });
  const auto a = check_supermodular(f, sampled(3000, 9));
  const auto b = check_supermodular(f, sampled(3000, 9));
  const auto c = check_supermodular(f, CheckOptions{3000, 9, false, Exec::serial});
  CHECK(a.violations == b.violations);
  CHECK(a.worst_witness == b.worst_witness);
  CHECK(a.violations == c.violations);
  CHECK(a.worst_witness == c.worst_witness);
  CHECK(a.margin == c.margin);
  const auto d = check_supermodular(f, sampled(3000, 10));
  CHECK(d.worst_witness != a.worst_witness);
}

TEST_CASE("exhaustive zero violations carries over to sampling") {
  const auto f = by_cardinality(9, [](double k) { return std::exp2(k); });
  CHECK(check_supermodular(f).violations == 0);
  CHECK(check_supermodular(f, CheckOptions{5000, 1, false, Exec::parallel}).violations == 0);
}

TEST_CASE("D_i as a set function: examples") {
  const std::vector<double> bits{2.0};
  const DiscreteParams p{1.0, 1.0, 0, 6};
  const CellGround g{3, 2, {0, 0, 0}};
  const auto f = di_as_set_function(bits, p, 0, g);
  CHECK(f.ground_size == 6);
  CHECK(f.eval(0) == 4.0);
  CHECK(f.eval(0b1) == doctest::Approx(3.0).epsilon(1e-15));
  // two levels of slot 1 and one of slot 2: sent = log2(3) + 1, last = 2
  CHECK(f.eval(0b0111) == doctest::Approx(std::exp2(1.0 - std::log2(3.0)) + 2.0).epsilon(1e-14));
  const auto d = di_as_set_function(bits, p, 0, g, true);
  CHECK(d.eval(0b1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("cells in slots owned by another packet do not count") {
  const std::vector<double> bits{2.0, 3.0};
  const DiscreteParams p{1.0, 1.0, 0, 6};
  const auto f = di_as_set_function(bits, p, 0, CellGround{2, 1, {1, 0}});
  CHECK(f.eval(0b01) == 4.0);
  CHECK(f.eval(0b10) == doctest::Approx(2.0 + 2.0).epsilon(1e-15));
}

TEST_CASE("distortion-only D_i is supermodular on every small ground set") {
  const DiscreteParams p{1.0, 1.0, 0, 10};
  for (double b : {1.0, 2.0, 5.0})
    for (std::size_t levels = 1; levels <= 5; ++levels)
      for (std::size_t slots = 1; slots * levels <= 10; ++slots) {
        const std::vector<double> bits{b};
        const auto f = di_as_set_function(bits, p, 0, CellGround{slots, levels, std::vector<int>(slots, 0)},
                                          true);
        const auto r = check_supermodular(f);
        CHECK(r.exhaustive);
        CHECK(r.violations == 0);
        CHECK(check_monotone(f).violations == 0);
      }
}

TEST_CASE("full D_i: the delay term breaks supermodularity on the cell ground set") {
  const std::vector<double> bits{2.0};
  const DiscreteParams p{1.0, 1.0, 0, 6};
  const auto f = di_as_set_function(bits, p, 0, CellGround{3, 2, {0, 0, 0}});
  const auto full = check_supermodular(f);
  CHECK(full.violations > 0);
  REQUIRE(full.worst_witness.has_value());
  const auto reach = check_supermodular(di_as_set_function(bits, p, 0, CellGround{3, 2, {0, 0, 0}},
                                                           false, true));
  CHECK(reach.trials < full.trials);
  CHECK(reach.trials > 0);
}

TEST_CASE("greedy-reachable admissibility") {
  const std::vector<double> bits{2.0};
  const DiscreteParams p{1.0, 1.0, 0, 6};
  const auto f = di_as_set_function(bits, p, 0, CellGround{3, 2, {0, 0, 0}}, false, true);
  REQUIRE(f.admissible);
  CHECK(f.admissible(0));
  CHECK(f.admissible(0b000001));
  CHECK(f.admissible(0b000111));
  CHECK_FALSE(f.admissible(0b000010));  // level 2 without level 1
  CHECK_FALSE(f.admissible(0b000100));  // slot 2 before slot 1
  CHECK_FALSE(f.admissible(0b010001));  // gap at slot 2
}

TEST_CASE("convexity of the continuous objective") {
  const Instance inst({15.0, 20.0, 4.0}, 30.0);
  const Order order = Order::from_positions({1, 0, 2});
  const auto r = check_convexity(inst, order, ConvexityOptions{4000, 3, Exec::parallel});
  CHECK(r.violations == 0);
  CHECK(r.trials == 4000 + 3 * 4000);
  const auto s = check_convexity(inst, order, ConvexityOptions{4000, 3, Exec::serial});
  CHECK(s.trials == r.trials);
  CHECK(s.violations == r.violations);
}

TEST_CASE("midpoint of a point with itself is exact") {
  const Instance inst({15.0, 20.0}, 50.0);
  const auto x = sample_feasible(inst, 17);
  const auto a = delay_coefficients(Order::identity(2));
  const double u = linear_cost(inst, x.energies, x.times, a);
  std::vector<double> me(2), mt(2);
  for (std::size_t i = 0; i < 2; ++i) {
    me[i] = 0.5 * (x.energies[i] + x.energies[i]);
    mt[i] = 0.5 * (x.times[i] + x.times[i]);
  }
  CHECK(std::abs(linear_cost(inst, me, mt, a) - u) <= 1e-12 * u);
}

TEST_CASE("sampled feasible points stay feasible") {
  const Instance inst({3.0, 9.0, 1.0}, 7.0);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto x = sample_feasible(inst, s);
    double sum = 0.0;
    for (double e : x.energies) {
      CHECK(e > 0.0);
      sum += e;
    }
    CHECK(sum <= inst.energy() * (1 + 1e-12));
    for (double t : x.times) CHECK(t >= 1e-3 * (1 - 1e-12));
  }
}

TEST_CASE("single-packet hessian blocks are positive definite on a grid") {
  const Instance inst({6.0}, 50.0);
  for (double e = 0.1; e <= 50.0; e += 0.7)
    for (double t = 0.1; t <= 10.0; t += 0.3) {
      const auto h = hessian_block(inst, 0, e, t, 1.0);
      CHECK(determinant(h) > 0.0);
      CHECK(h[0][0] + h[1][1] > 0.0);
    }
}
