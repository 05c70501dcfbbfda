#pragma once

#include <span>
#include <string>

namespace edd {

/// Shortest decimal that round-trips, independent of the global locale.
std::string format_double(double v);

/// Values joined by `sep`, each through format_double.
std::string join(std::span<const double> values, const char* sep = ",");

}  // namespace edd
