#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "edd/csolve.hpp"
#include "edd/model.hpp"
#include "edd/parallel.hpp"

namespace edd {

inline constexpr std::size_t kDefaultMaxOrderSearch = 8;

struct OrderSearchResult {
  Order order;
  SolveReport report;
  std::size_t orders_tried = 0;
};

/// Solves every transmission order and keeps the cheapest. Costs within
/// 1e-9 (relative) of each other count as ties and go to the
/// lexicographically smallest position vector. Throws SizeError for n > n_max.
OrderSearchResult brute_force_order(const Instance& inst, const SolverConfig& cfg = {},
                                    std::size_t n_max = kDefaultMaxOrderSearch,
                                    Exec exec = Exec::parallel);

/// Shortest packet first; ties by packet index.
Order spf_order(const Instance& inst);

struct SpfRow {
  std::uint64_t seed = 0;  // per-instance seed the instance was drawn from
  std::size_t index = 0;
  std::vector<double> bits;
  double energy = 0.0;
  double spf_cost = 0.0;
  double opt_cost = 0.0;
  double gap = 0.0;  // spf_cost - opt_cost
  bool agrees = true;
};

struct SpfStats {
  std::size_t count = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t agreements = 0;
  double agreement = 1.0;  // fraction, 1.0 for an empty experiment
  std::optional<SpfRow> worst;  // largest gap among disagreements
  std::vector<SpfRow> rows;
};

/// Draws `count` instances (B_i ~ U[1,25], E ~ U[0.5, 4] * sum B) and compares
/// the SPF order's solved cost with the brute-force optimum. Reports only.
SpfStats spf_agreement_experiment(std::size_t count, std::uint64_t seed, std::size_t n,
                                  const SolverConfig& cfg = {},
                                  std::size_t n_max = kDefaultMaxOrderSearch,
                                  Exec exec = Exec::parallel);

/// Instance k of a seeded experiment, exposed so that tests and the CLI can
/// regenerate any row.
Instance spf_instance(std::uint64_t instance_seed, std::size_t n);

}  // namespace edd
