#include "edd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace edd {

Instance::Instance(std::vector<double> bits, double energy)
    : bits_(std::move(bits)), energy_(energy) {
  if (bits_.empty()) throw std::invalid_argument("instance needs at least one packet");
  for (double b : bits_) {
    if (!(b > 0.0) || !std::isfinite(b))
      throw std::invalid_argument("packet sizes must be positive and finite");
  }
  if (!(energy_ > 0.0) || !std::isfinite(energy_))
    throw std::invalid_argument("energy budget must be positive and finite");
}

double Instance::total_bits() const { return std::accumulate(bits_.begin(), bits_.end(), 0.0); }

Order::Order(std::vector<std::size_t> positions) : positions_(std::move(positions)) {
  std::vector<bool> seen(positions_.size(), false);
  for (std::size_t p : positions_) {
    if (p >= positions_.size() || seen[p]) throw std::invalid_argument("order is not a permutation");
    seen[p] = true;
  }
}

Order Order::identity(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return Order(std::move(p));
}

Order Order::from_positions(std::vector<std::size_t> positions) { return Order(std::move(positions)); }

Order Order::from_sequence(std::span<const std::size_t> sequence) {
  const std::size_t n = sequence.size();
  std::vector<std::size_t> pos(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (sequence[k] >= n || pos[sequence[k]] != n)
      throw std::invalid_argument("order is not a permutation");
    pos[sequence[k]] = k;
  }
  return Order(std::move(pos));
}

std::vector<std::size_t> Order::sequence() const {
  std::vector<std::size_t> seq(positions_.size());
  for (std::size_t i = 0; i < positions_.size(); ++i) seq[positions_[i]] = i;
  return seq;
}

double shannon_bits(double energy, double time, double t_min) {
  if (!(time >= t_min)) throw std::domain_error("transmission time below t_min");
  if (!(energy >= 0.0)) throw std::domain_error("negative energy");
  return time * std::log2(1.0 + energy / time);
}

std::vector<double> delay_coefficients(const Order& order) {
  const std::size_t n = order.size();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<double>(n - order.position(i));
  return a;
}

namespace {

void check_shapes(std::size_t n, std::size_t ne, std::size_t nt, std::size_t no) {
  if (ne != n || nt != n || no != n)
    throw std::invalid_argument("allocation size does not match instance (" + std::to_string(n) +
                                " packets)");
}

}  // namespace

CostBreakdown evaluate_cost(const Instance& inst, const ContinuousAllocation& alloc, double t_min) {
  const std::size_t n = inst.size();
  check_shapes(n, alloc.energies.size(), alloc.times.size(), alloc.order.size());

  const double spent = std::accumulate(alloc.energies.begin(), alloc.energies.end(), 0.0);
  if (spent > inst.energy() * (1.0 + kBudgetTolerance))
    throw InfeasibleError("allocation spends " + std::to_string(spent) + " J of a " +
                          std::to_string(inst.energy()) + " J budget");

  CostBreakdown out;
  out.bhat.resize(n);
  out.distortions.resize(n);
  out.delays.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.bhat[i] = shannon_bits(alloc.energies[i], alloc.times[i], t_min);
    out.distortions[i] = std::exp2(inst.bits(i) - out.bhat[i]);
  }

  // completion times: prefix sums along the send sequence
  double clock = 0.0;
  for (std::size_t packet : alloc.order.sequence()) {
    clock += alloc.times[packet];
    out.delays[packet] = clock;
  }

  out.total = 0.0;
  for (std::size_t i = 0; i < n; ++i) out.total += out.distortions[i] + out.delays[i];
  return out;
}

double linear_cost(const Instance& inst, std::span<const double> energies,
                   std::span<const double> times, std::span<const double> coeffs, double t_min) {
  const std::size_t n = inst.size();
  check_shapes(n, energies.size(), times.size(), coeffs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::exp2(inst.bits(i) - shannon_bits(energies[i], times[i], t_min));
    total += coeffs[i] * times[i];
  }
  return total;
}

}  // namespace edd
