#include <numeric>
#include <random>

#include "doctest.h"
#include "edd/order.hpp"

using namespace edd;

TEST_CASE("brute force puts the shorter packet first on the reference instances") {
  for (auto [bits, energy] : {std::pair{std::vector<double>{15.0, 20.0}, 50.0},
                              std::pair{std::vector<double>{12.0, 20.0}, 20.0},
                              std::pair{std::vector<double>{20.0, 15.0}, 50.0}}) {
    const Instance inst(bits, energy);
    const auto r = brute_force_order(inst);
    const std::size_t shorter = bits[0] < bits[1] ? 0 : 1;
    CHECK(r.order.sequence().front() == shorter);
    CHECK(r.orders_tried == 2);
    CHECK(r.report.converged);
  }
}

TEST_CASE("symmetric instance: both orders cost the same and the tie goes to identity") {
  const Instance inst({10.0, 10.0}, 30.0);
  const auto a = solve_fixed_order(inst, Order::identity(2));
  const auto b = solve_fixed_order(inst, Order::from_positions({1, 0}));
  CHECK(std::abs(a.cost.total - b.cost.total) <= 1e-6);
  CHECK(brute_force_order(inst).order == Order::identity(2));
}

TEST_CASE("brute force refuses oversized instances") {
  const Instance inst(std::vector<double>(9, 3.0), 10.0);
  CHECK_THROWS_AS(brute_force_order(inst), SizeError);
  CHECK_THROWS_AS(brute_force_order(Instance({1.0, 2.0, 3.0}, 5.0), {}, 2), SizeError);
}

TEST_CASE("spf sorts by size with ties by index") {
  CHECK(spf_order(Instance({15.0, 20.0}, 1.0)).sequence() == std::vector<std::size_t>{0, 1});
  CHECK(spf_order(Instance({20.0, 12.0, 16.0}, 1.0)).sequence() ==
        std::vector<std::size_t>{1, 2, 0});
  CHECK(spf_order(Instance({5.0, 5.0}, 1.0)) == Order::identity(2));
}

TEST_CASE("empty experiment agrees vacuously") {
  const auto s = spf_agreement_experiment(0, 1, 2);
  CHECK(s.agreement == 1.0);
  CHECK_FALSE(s.worst.has_value());
  CHECK(s.rows.empty());
  CHECK_THROWS_AS(spf_agreement_experiment(1, 1, 9), SizeError);
}

TEST_CASE("brute force dominates spf and the experiment is reproducible") {
  const auto s = spf_agreement_experiment(30, 42, 3);
  REQUIRE(s.rows.size() == 30);
  for (const auto& row : s.rows) {
    CHECK(row.opt_cost <= row.spf_cost + 1e-9);
    const Instance inst = spf_instance(row.seed, 3);
    CHECK(std::vector<double>(inst.bits().begin(), inst.bits().end()) == row.bits);
    CHECK(inst.energy() == row.energy);
    for (double b : row.bits) {
      CHECK(b >= 1.0);
      CHECK(b <= 25.0);
    }
    const double total = std::accumulate(row.bits.begin(), row.bits.end(), 0.0);
    CHECK(row.energy >= 0.5 * total);
    CHECK(row.energy <= 4.0 * total);
  }
  const auto again = spf_agreement_experiment(30, 42, 3, {}, kDefaultMaxOrderSearch, Exec::serial);
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    CHECK(s.rows[k].spf_cost == again.rows[k].spf_cost);
    CHECK(s.rows[k].opt_cost == again.rows[k].opt_cost);
  }
  CHECK(s.agreements == again.agreements);
}

TEST_CASE("two-packet experiment agrees") {
  const auto s = spf_agreement_experiment(40, 7, 2);
  CHECK(s.agreement == doctest::Approx(1.0));
}

TEST_CASE("symmetric instances always agree") {
  for (double b : {4.0, 9.0}) {
    const Instance inst({b, b, b}, 4.0 * b);
    const double spf = solve_fixed_order(inst, spf_order(inst)).cost.total;
    const double opt = brute_force_order(inst).report.cost.total;
    CHECK(std::abs(spf - opt) <= 1e-6);
  }
}

TEST_CASE("brute force is invariant under relabeling") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ub(1.0, 25.0);
  for (int k = 0; k < 6; ++k) {
    std::vector<double> bits(3);
    for (double& b : bits) b = ub(rng);
    std::vector<std::size_t> relabel{0, 1, 2};
    std::shuffle(relabel.begin(), relabel.end(), rng);
    std::vector<double> permuted(3);
    for (std::size_t i = 0; i < 3; ++i) permuted[relabel[i]] = bits[i];
    const double energy = 1.5 * std::accumulate(bits.begin(), bits.end(), 0.0);
    const auto a = brute_force_order(Instance(bits, energy));
    const auto b = brute_force_order(Instance(permuted, energy));
    CHECK(a.report.cost.total == doctest::Approx(b.report.cost.total).epsilon(1e-9));
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(a.order.position(i) == b.order.position(relabel[i]));
  }
}

TEST_CASE("parallel and serial brute force agree exactly") {
  const Instance inst({7.0, 3.0, 11.0, 5.0}, 40.0);
  const auto p = brute_force_order(inst, {}, kDefaultMaxOrderSearch, Exec::parallel);
  const auto s = brute_force_order(inst, {}, kDefaultMaxOrderSearch, Exec::serial);
  CHECK(p.order == s.order);
  CHECK(p.report.cost.total == s.report.cost.total);
  CHECK(p.orders_tried == 24);
}
