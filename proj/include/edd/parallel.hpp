#pragma once

#include <cstddef>
#include <cstdint>

namespace edd {

/// Selects between the OpenMP kernels and the serial reference loops they are
/// tested against. Both produce identical results.
enum class Exec { serial, parallel };

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

/// Deterministic per-trial seed: trial k of a run seeded with `seed` draws
/// from the same stream regardless of which thread evaluates it.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

}  // namespace edd
