#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace edd {

/// Lower clamp on transmission times. The rate function has a removable
/// singularity at t = 0 where its gradient is unbounded.
inline constexpr double kMinTime = 1e-6;

/// Relative slack tolerated on the energy budget before an allocation is
/// declared infeasible.
inline constexpr double kBudgetTolerance = 1e-9;

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SizeError : std::length_error {
  using std::length_error::length_error;
};

/// n packets of bits[i] bits sharing a total energy budget (Joules).
class Instance {
 public:
  Instance(std::vector<double> bits, double energy);

  std::size_t size() const { return bits_.size(); }
  double bits(std::size_t i) const { return bits_[i]; }
  std::span<const double> bits() const { return bits_; }
  double energy() const { return energy_; }
  double total_bits() const;

 private:
  std::vector<double> bits_;
  double energy_;
};

/// Transmission order. position(i) is the 0-based slot in the send sequence
/// at which packet i is transmitted; sequence()[k] is the packet sent k-th.
class Order {
 public:
  Order() = default;
  static Order identity(std::size_t n);
  static Order from_positions(std::vector<std::size_t> positions);
  static Order from_sequence(std::span<const std::size_t> sequence);

  std::size_t size() const { return positions_.size(); }
  std::size_t position(std::size_t packet) const { return positions_[packet]; }
  std::span<const std::size_t> positions() const { return positions_; }
  std::vector<std::size_t> sequence() const;

  bool operator==(const Order&) const = default;

 private:
  explicit Order(std::vector<std::size_t> positions);
  std::vector<std::size_t> positions_;
};

struct ContinuousAllocation {
  std::vector<double> energies;
  std::vector<double> times;
  Order order;
};

struct CostBreakdown {
  std::vector<double> distortions;
  std::vector<double> delays;  // completion time of each packet
  std::vector<double> bhat;
  double total = 0.0;
};

/// Bits deliverable with `energy` over `time` at unit bandwidth:
/// time * log2(1 + energy / time).
double shannon_bits(double energy, double time, double t_min = kMinTime);

/// Number of completion times each t_i contributes to: n - position(i).
/// (With 1-based positions this is n - pi(i) + 1.)
std::vector<double> delay_coefficients(const Order& order);

/// Full per-packet breakdown. Throws InfeasibleError when the allocation
/// spends more than the budget.
CostBreakdown evaluate_cost(const Instance& inst, const ContinuousAllocation& alloc,
                            double t_min = kMinTime);

/// sum_i 2^(B_i - Bhat_i) + a_i t_i with a from delay_coefficients. Same
/// value as evaluate_cost(...).total computed along the linear route, and
/// without the budget check so that solvers can probe trial points.
double linear_cost(const Instance& inst, std::span<const double> energies,
                   std::span<const double> times, std::span<const double> coeffs,
                   double t_min = kMinTime);

}  // namespace edd
