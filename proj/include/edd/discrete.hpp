#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edd/model.hpp"
#include "edd/parallel.hpp"

namespace edd {

/// Raised when a discrete allocation breaks one of its structural invariants.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

struct DiscreteParams {
  double slot_len = 1.0;          // l, seconds
  double quantum = 1.0;           // e, Joules per resource block
  std::size_t budget_quanta = 0;  // Q = floor(E / e)
  std::size_t max_slots = 64;     // hard cap on the number of slots J

  void validate() const;

  /// Q = floor(energy / quantum), guarded against representation error so
  /// that e.g. 0.3 / 0.1 yields 3.
  static DiscreteParams from_energy(double slot_len, double quantum, double energy,
                                    std::size_t max_slots = 64);
};

inline constexpr int kUnowned = -1;

/// Slot j (0-based here, slot j+1 in the usual numbering) belongs to packet
/// owner[j] and carries quanta[j] resource blocks. Occupied slots form a
/// prefix; trailing entries may be unowned with zero quanta.
struct DiscreteAllocation {
  std::vector<int> owner;
  std::vector<std::size_t> quanta;

  std::size_t occupied_slots() const;
  std::size_t used_quanta() const;
  bool operator==(const DiscreteAllocation&) const = default;
};

struct DiscreteCost {
  std::vector<double> per_packet;
  double total = 0.0;
};

/// Bits one slot carries with r quanta: l * log2(1 + e r / l).
double slot_bits(const DiscreteParams& params, std::size_t r);

/// Throws InvariantError describing the first broken invariant.
void check_allocation(std::size_t n, const DiscreteParams& params,
                      const DiscreteAllocation& alloc);

/// D_i = 2^(B_i - sum of bits in owned slots) + l * (last owned slot), and
/// D_i = 2^B_i for a packet that owns nothing.
DiscreteCost discrete_cost(std::span<const double> bits, const DiscreteParams& params,
                           const DiscreteAllocation& alloc);
DiscreteCost discrete_cost(const Instance& inst, const DiscreteParams& params,
                           const DiscreteAllocation& alloc);

enum class GreedyAction { increment, open };

struct TraceStep {
  std::size_t iteration = 0;  // 1-based
  GreedyAction action = GreedyAction::increment;
  std::size_t slot = 0;    // 0-based
  std::size_t packet = 0;  // 0-based
  double total_cost = 0.0;  // after the step
};

struct GreedyResult {
  DiscreteAllocation alloc;
  DiscreteCost cost;
  std::vector<TraceStep> trace;
};

/// Resource-block greedy. Each round scores every increment of an occupied
/// slot, then every packet opening the next slot with one quantum, and commits
/// the cheapest (ties: smallest slot, then smallest packet). Stops when the
/// budget is spent or, unless spend_all, when no candidate lowers the cost.
GreedyResult greedy_allocate(std::span<const double> bits, const DiscreteParams& params,
                             bool spend_all = false);
GreedyResult greedy_allocate(const Instance& inst, const DiscreteParams& params,
                             bool spend_all = false);

struct OracleLimits {
  std::size_t max_packets = 3;
  std::size_t max_quanta = 6;
  std::size_t max_slots = 6;
};

struct OracleResult {
  DiscreteAllocation alloc;
  DiscreteCost cost;
  std::size_t allocations_examined = 0;
};

/// Exhaustive minimum over contiguous slot ownerships and quanta compositions.
/// Ties go to fewer slots, then to the lexicographically smallest
/// (owner, quanta) pair. Throws SizeError beyond `limits`.
OracleResult oracle_allocate(std::span<const double> bits, const DiscreteParams& params,
                             const OracleLimits& limits = {}, Exec exec = Exec::parallel);
OracleResult oracle_allocate(const Instance& inst, const DiscreteParams& params,
                             const OracleLimits& limits = {}, Exec exec = Exec::parallel);

using PartCost = std::function<double(std::span<const std::size_t>)>;

/// Item-by-item greedy multi-partitioning: each item, in the given sequence,
/// joins the part j minimizing cost_fns[j](S_j + item); ties to smallest j.
/// Parts list their items in insertion order.
std::vector<std::vector<std::size_t>> greedy_multipartition(std::span<const std::size_t> items,
                                                            std::size_t k,
                                                            std::span<const PartCost> cost_fns);

const char* to_string(GreedyAction action);

}  // namespace edd
