#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "edd/discrete.hpp"
#include "edd/model.hpp"
#include "edd/parallel.hpp"

namespace edd {

inline constexpr double kPropertyTolerance = 1e-9;
inline constexpr std::size_t kMaxGroundSize = 20;
inline constexpr std::size_t kExhaustiveGroundSize = 10;

/// A set function over {0, ..., ground_size-1}, subsets encoded as bit masks.
/// If `admissible` is set, only triples whose every evaluated set is
/// admissible are tested.
struct SetFunction {
  std::size_t ground_size = 0;
  std::function<double(std::uint32_t)> eval;
  std::function<bool(std::uint32_t)> admissible;
};

struct PropertyReport {
  std::string name;
  std::size_t trials = 0;      // checks actually evaluated
  std::size_t violations = 0;
  std::size_t skipped = 0;     // sampled trials with no admissible triple
  bool exhaustive = false;
  std::optional<std::string> worst_witness;  // present iff violations > 0
  double margin = 0.0;  // most negative slack seen, 0 if none negative

  bool passed() const { return violations == 0; }
};

struct CheckOptions {
  std::size_t trials = 10'000;
  std::uint64_t seed = 0;
  bool force_exhaustive = false;  // exhaustive is automatic up to 10 elements
  Exec exec = Exec::parallel;
};

/// f(S+i) + f(S+j) <= f(S) + f(S+i+j) + tol for i != j outside S.
PropertyReport check_supermodular(const SetFunction& f, const CheckOptions& opt = {});

/// f(S+x) <= f(S) + tol: adding an element never raises the cost.
PropertyReport check_monotone(const SetFunction& f, const CheckOptions& opt = {});

std::string format_mask(std::uint32_t mask, std::size_t ground_size);

struct CellGround {
  std::size_t slots = 0;
  std::size_t levels = 0;  // cells per slot
  std::vector<int> slot_owner;  // owner of each slot, kUnowned allowed
};

/// D_i as a function of a set of cells. Cell j*levels + m adds one quantum to
/// slot j. Only slots owned by `packet` carry its bits; its delay is l times
/// the last owned slot that carries any quanta. `distortion_only` drops the
/// delay term. `greedy_reachable` restricts to sets the greedy allocator can
/// produce: each slot's cells form a prefix of its levels and the slots with
/// cells are contiguous from the first.
SetFunction di_as_set_function(std::span<const double> bits, const DiscreteParams& params,
                               std::size_t packet, const CellGround& ground,
                               bool distortion_only = false, bool greedy_reachable = false);
SetFunction di_as_set_function(const Instance& inst, const DiscreteParams& params,
                               std::size_t packet, const CellGround& ground,
                               bool distortion_only = false, bool greedy_reachable = false);

struct ConvexityOptions {
  std::size_t trials = 10'000;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

/// Midpoint test U((x+y)/2) <= (U(x)+U(y))/2 + tol * max(1, |rhs|) on random
/// feasible pairs.
PropertyReport check_midpoint_convexity(const Instance& inst, const Order& order,
                                        const ConvexityOptions& opt = {});

/// det > 0 and trace > 0 for every per-packet Hessian block at random interior
/// points.
PropertyReport check_hessian_blocks(const Instance& inst, const Order& order,
                                    const ConvexityOptions& opt = {});

/// Both probes merged into one report.
PropertyReport check_convexity(const Instance& inst, const Order& order,
                               const ConvexityOptions& opt = {});

struct FeasiblePoint {
  std::vector<double> energies;
  std::vector<double> times;
};

/// Random feasible point: energies with sum <= E, all strictly positive;
/// times log-uniform in [1e-3, 10 * max(1, max B)].
FeasiblePoint sample_feasible(const Instance& inst, std::uint64_t seed);

}  // namespace edd
