#include "edd/order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace edd {

namespace {

bool strictly_better(double candidate, double incumbent) {
  return candidate < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
}

std::vector<std::vector<std::size_t>> all_positions(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

OrderSearchResult brute_force_order(const Instance& inst, const SolverConfig& cfg,
                                    std::size_t n_max, Exec exec) {
  if (inst.size() > n_max)
    throw SizeError("brute-force order search limited to " + std::to_string(n_max) +
                    " packets, got " + std::to_string(inst.size()));
  cfg.validate();

  const auto perms = all_positions(inst.size());
  std::vector<SolveReport> reports(perms.size());
  const auto count = static_cast<std::ptrdiff_t>(perms.size());

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k)
      reports[k] = solve_fixed_order(inst, Order::from_positions(perms[k]), cfg);
  } else {
    for (std::ptrdiff_t k = 0; k < count; ++k)
      reports[k] = solve_fixed_order(inst, Order::from_positions(perms[k]), cfg);
  }

  // Sequential reduction in lexicographic order keeps the tie-break
  // independent of completion order.
  std::size_t best = 0;
  for (std::size_t k = 1; k < reports.size(); ++k)
    if (strictly_better(reports[k].cost.total, reports[best].cost.total)) best = k;

  OrderSearchResult result;
  result.order = reports[best].alloc.order;
  result.report = std::move(reports[best]);
  result.orders_tried = perms.size();
  return result;
}

Order spf_order(const Instance& inst) {
  std::vector<std::size_t> seq(inst.size());
  std::iota(seq.begin(), seq.end(), std::size_t{0});
  std::stable_sort(seq.begin(), seq.end(),
                   [&](std::size_t a, std::size_t b) { return inst.bits(a) < inst.bits(b); });
  return Order::from_sequence(seq);
}

Instance spf_instance(std::uint64_t instance_seed, std::size_t n) {
  std::mt19937_64 rng(instance_seed);
  std::uniform_real_distribution<double> bits_dist(1.0, 25.0);
  std::vector<double> bits(n);
  for (double& b : bits) b = bits_dist(rng);
  const double total = std::accumulate(bits.begin(), bits.end(), 0.0);
  std::uniform_real_distribution<double> energy_dist(0.5 * total, 4.0 * total);
  return Instance(std::move(bits), energy_dist(rng));
}

SpfStats spf_agreement_experiment(std::size_t count, std::uint64_t seed, std::size_t n,
                                  const SolverConfig& cfg, std::size_t n_max, Exec exec) {
  if (n == 0) throw std::invalid_argument("experiment needs n >= 1");
  if (n > n_max)
    throw SizeError("brute-force order search limited to " + std::to_string(n_max) + " packets");

  SpfStats stats;
  stats.count = count;
  stats.n = n;
  stats.seed = seed;
  stats.rows.resize(count);

  // Instances are independent; within each one the permutation search runs
  // serially so that the two levels do not oversubscribe.
  auto run = [&](std::size_t k) {
    SpfRow row;
    row.seed = trial_seed(seed, k);
    row.index = k;
    const Instance inst = spf_instance(row.seed, n);
    row.bits.assign(inst.bits().begin(), inst.bits().end());
    row.energy = inst.energy();
    row.spf_cost = solve_fixed_order(inst, spf_order(inst), cfg).cost.total;
    row.opt_cost = brute_force_order(inst, cfg, n_max, Exec::serial).report.cost.total;
    row.gap = row.spf_cost - row.opt_cost;
    row.agrees = row.gap <= 1e-6;
    stats.rows[k] = std::move(row);
  };

  const auto total = static_cast<std::ptrdiff_t>(count);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < total; ++k) run(static_cast<std::size_t>(k));
  } else {
    for (std::ptrdiff_t k = 0; k < total; ++k) run(static_cast<std::size_t>(k));
  }

  for (const SpfRow& row : stats.rows) {
    if (row.agrees) {
      ++stats.agreements;
    } else if (!stats.worst || row.gap > stats.worst->gap) {
      stats.worst = row;
    }
  }
  stats.agreement = count == 0 ? 1.0 : static_cast<double>(stats.agreements) / count;
  return stats;
}

}  // namespace edd
