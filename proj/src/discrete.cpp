#include "edd/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edd {

void DiscreteParams::validate() const {
  if (!(slot_len > 0.0) || !std::isfinite(slot_len))
    throw std::invalid_argument("slot length must be positive");
  if (!(quantum > 0.0) || !std::isfinite(quantum))
    throw std::invalid_argument("quantum must be positive");
  if (max_slots == 0) throw std::invalid_argument("max_slots must be positive");
}

DiscreteParams DiscreteParams::from_energy(double slot_len, double quantum, double energy,
                                           std::size_t max_slots) {
  if (!(energy >= 0.0) || !std::isfinite(energy))
    throw std::invalid_argument("energy must be non-negative");
  DiscreteParams p{slot_len, quantum, 0, max_slots};
  p.validate();
  const double ratio = energy / quantum;
  p.budget_quanta = static_cast<std::size_t>(std::floor(ratio * (1.0 + 1e-12)));
  return p;
}

std::size_t DiscreteAllocation::occupied_slots() const {
  return static_cast<std::size_t>(
      std::count_if(owner.begin(), owner.end(), [](int o) { return o != kUnowned; }));
}

std::size_t DiscreteAllocation::used_quanta() const {
  return std::accumulate(quanta.begin(), quanta.end(), std::size_t{0});
}

double slot_bits(const DiscreteParams& params, std::size_t r) {
  return shannon_bits(params.quantum * static_cast<double>(r), params.slot_len, 0.0);
}

void check_allocation(std::size_t n, const DiscreteParams& params,
                      const DiscreteAllocation& alloc) {
  params.validate();
  if (alloc.owner.size() != alloc.quanta.size())
    throw InvariantError("owner and quanta lists differ in length");
  if (alloc.owner.size() > params.max_slots)
    throw InvariantError("allocation uses more than max_slots slots");
  bool tail = false;
  for (std::size_t j = 0; j < alloc.owner.size(); ++j) {
    const int o = alloc.owner[j];
    if (o == kUnowned) {
      if (alloc.quanta[j] != 0) throw InvariantError("unowned slot carries quanta");
      tail = true;
      continue;
    }
    if (o < 0 || static_cast<std::size_t>(o) >= n)
      throw InvariantError("slot owner is not a packet index");
    if (tail) throw InvariantError("occupied slots are not contiguous from the first slot");
    if (alloc.quanta[j] == 0) throw InvariantError("owned slot carries no quanta");
  }
  if (alloc.used_quanta() > params.budget_quanta)
    throw InvariantError("allocation exceeds the quanta budget");
}

namespace {

void check_bits(std::span<const double> bits) {
  if (bits.empty()) throw std::invalid_argument("instance needs at least one packet");
  for (double b : bits)
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("packet sizes must be positive");
}

double packet_cost(double bits, double sent, std::size_t last_slot, double slot_len) {
  // last_slot is 1-based; 0 means the packet owns nothing
  return std::exp2(bits - sent) + slot_len * static_cast<double>(last_slot);
}

DiscreteCost cost_unchecked(std::span<const double> bits, const DiscreteParams& params,
                            const DiscreteAllocation& alloc) {
  const std::size_t n = bits.size();
  std::vector<double> sent(n, 0.0);
  std::vector<std::size_t> last(n, 0);
  for (std::size_t j = 0; j < alloc.owner.size(); ++j) {
    if (alloc.owner[j] == kUnowned) continue;
    const auto p = static_cast<std::size_t>(alloc.owner[j]);
    sent[p] += slot_bits(params, alloc.quanta[j]);
    last[p] = j + 1;
  }
  DiscreteCost c;
  c.per_packet.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.per_packet[i] = packet_cost(bits[i], sent[i], last[i], params.slot_len);
    c.total += c.per_packet[i];
  }
  return c;
}

}  // namespace

DiscreteCost discrete_cost(std::span<const double> bits, const DiscreteParams& params,
                           const DiscreteAllocation& alloc) {
  check_bits(bits);
  check_allocation(bits.size(), params, alloc);
  return cost_unchecked(bits, params, alloc);
}

DiscreteCost discrete_cost(const Instance& inst, const DiscreteParams& params,
                           const DiscreteAllocation& alloc) {
  return discrete_cost(inst.bits(), params, alloc);
}

GreedyResult greedy_allocate(std::span<const double> bits, const DiscreteParams& params,
                             bool spend_all) {
  check_bits(bits);
  params.validate();
  const std::size_t n = bits.size();

  // Per-packet running state; a candidate only changes its own packet's D_i.
  std::vector<double> sent(n, 0.0);
  std::vector<std::size_t> last(n, 0);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = packet_cost(bits[i], 0.0, 0, params.slot_len);
  double total = std::accumulate(d.begin(), d.end(), 0.0);

  GreedyResult result;
  auto& owner = result.alloc.owner;
  auto& quanta = result.alloc.quanta;
  std::size_t used = 0;

  while (used < params.budget_quanta) {
    bool found = false;
    TraceStep best;
    double best_total = 0.0;
    double best_d = 0.0;
    auto consider = [&](GreedyAction action, std::size_t slot, std::size_t packet, double new_d) {
      const double candidate = total - d[packet] + new_d;
      if (!found || candidate < best_total) {
        found = true;
        best = TraceStep{0, action, slot, packet, candidate};
        best_total = candidate;
        best_d = new_d;
      }
    };

    for (std::size_t j = 0; j < owner.size(); ++j) {
      const auto p = static_cast<std::size_t>(owner[j]);
      const double s = sent[p] - slot_bits(params, quanta[j]) + slot_bits(params, quanta[j] + 1);
      consider(GreedyAction::increment, j, p, packet_cost(bits[p], s, last[p], params.slot_len));
    }
    if (owner.size() < params.max_slots) {
      const std::size_t j = owner.size();
      for (std::size_t p = 0; p < n; ++p) {
        const double s = sent[p] + slot_bits(params, 1);
        consider(GreedyAction::open, j, p, packet_cost(bits[p], s, j + 1, params.slot_len));
      }
    }
    if (!found) break;
    if (!spend_all && !(best_total < total)) break;

    const std::size_t p = best.packet;
    if (best.action == GreedyAction::open) {
      owner.push_back(static_cast<int>(p));
      quanta.push_back(1);
      sent[p] += slot_bits(params, 1);
      last[p] = best.slot + 1;
    } else {
      sent[p] += slot_bits(params, quanta[best.slot] + 1) - slot_bits(params, quanta[best.slot]);
      ++quanta[best.slot];
    }
    d[p] = best_d;
    total = best_total;
    ++used;
    best.iteration = result.trace.size() + 1;
    result.trace.push_back(best);
  }

  // Report the cost recomputed from scratch rather than the running sum.
  result.cost = discrete_cost(bits, params, result.alloc);
  return result;
}

GreedyResult greedy_allocate(const Instance& inst, const DiscreteParams& params, bool spend_all) {
  return greedy_allocate(inst.bits(), params, spend_all);
}

namespace {

bool oracle_better(double candidate, double incumbent) {
  return candidate < incumbent - 1e-12 * std::max(1.0, std::abs(incumbent));
}

// Compositions of at most `budget` into `parts` positive parts, in
// lexicographic order.
template <class Fn>
void for_each_composition(std::size_t parts, std::size_t budget, std::vector<std::size_t>& r,
                          std::size_t k, Fn&& fn) {
  if (k == parts) {
    fn();
    return;
  }
  const std::size_t remaining_parts = parts - k - 1;
  const std::size_t spent = std::accumulate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k),
                                            std::size_t{0});
  for (std::size_t v = 1; spent + v + remaining_parts <= budget; ++v) {
    r[k] = v;
    for_each_composition(parts, budget, r, k + 1, fn);
  }
}

struct Candidate {
  DiscreteAllocation alloc;
  double total = 0.0;
  std::size_t examined = 0;
  bool valid = false;
};

// Best allocation for one fixed owner tuple.
Candidate best_for_owners(std::span<const double> bits, const DiscreteParams& params,
                          std::vector<int> owners) {
  Candidate best;
  const std::size_t slots = owners.size();
  DiscreteAllocation a{std::move(owners), std::vector<std::size_t>(slots, 0)};
  for_each_composition(slots, params.budget_quanta, a.quanta, 0, [&] {
    ++best.examined;
    const double total = cost_unchecked(bits, params, a).total;
    if (!best.valid || oracle_better(total, best.total)) {
      best.alloc = a;
      best.total = total;
      best.valid = true;
    }
  });
  return best;
}

}  // namespace

OracleResult oracle_allocate(std::span<const double> bits, const DiscreteParams& params,
                             const OracleLimits& limits, Exec exec) {
  check_bits(bits);
  params.validate();
  const std::size_t n = bits.size();
  if (n > limits.max_packets)
    throw SizeError("oracle supports at most " + std::to_string(limits.max_packets) + " packets");
  if (params.budget_quanta > limits.max_quanta)
    throw SizeError("oracle supports at most " + std::to_string(limits.max_quanta) + " quanta");
  if (params.max_slots > limits.max_slots)
    throw SizeError("oracle supports at most " + std::to_string(limits.max_slots) + " slots");

  // Every occupied slot needs a quantum, so J <= min(max_slots, Q). Owner
  // tuples are listed by J, then lexicographically; their index order is the
  // tie-break order.
  const std::size_t max_j = std::min(params.max_slots, params.budget_quanta);
  std::vector<std::vector<int>> tuples;
  tuples.emplace_back();
  for (std::size_t j = 1; j <= max_j; ++j) {
    std::vector<int> t(j, 0);
    while (true) {
      tuples.push_back(t);
      std::size_t k = j;
      while (k > 0 && static_cast<std::size_t>(t[k - 1]) + 1 == n) t[--k] = 0;
      if (k == 0) break;
      ++t[k - 1];
    }
  }

  std::vector<Candidate> per_tuple(tuples.size());
  const auto count = static_cast<std::ptrdiff_t>(tuples.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) per_tuple[k] = best_for_owners(bits, params, tuples[k]);
  } else {
    for (std::ptrdiff_t k = 0; k < count; ++k) per_tuple[k] = best_for_owners(bits, params, tuples[k]);
  }

  OracleResult result;
  const Candidate* best = nullptr;
  for (const Candidate& c : per_tuple) {
    result.allocations_examined += c.examined;
    if (c.valid && (!best || oracle_better(c.total, best->total))) best = &c;
  }
  result.alloc = best->alloc;  // the empty tuple is always valid
  result.cost = discrete_cost(bits, params, result.alloc);
  return result;
}

OracleResult oracle_allocate(const Instance& inst, const DiscreteParams& params,
                             const OracleLimits& limits, Exec exec) {
  return oracle_allocate(inst.bits(), params, limits, exec);
}

std::vector<std::vector<std::size_t>> greedy_multipartition(std::span<const std::size_t> items,
                                                            std::size_t k,
                                                            std::span<const PartCost> cost_fns) {
  if (cost_fns.size() != k) throw std::invalid_argument("need one cost function per part");
  if (k == 0 && !items.empty()) throw std::invalid_argument("cannot partition items into 0 parts");
  std::vector<std::vector<std::size_t>> parts(k);
  for (std::size_t item : items) {
    std::size_t best = 0;
    double best_cost = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      parts[j].push_back(item);
      const double c = cost_fns[j](parts[j]);
      parts[j].pop_back();
      if (j == 0 || c < best_cost) {
        best = j;
        best_cost = c;
      }
    }
    parts[best].push_back(item);
  }
  return parts;
}

const char* to_string(GreedyAction action) {
  return action == GreedyAction::open ? "open" : "increment";
}

}  // namespace edd
