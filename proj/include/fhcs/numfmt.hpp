#pragma once

#include <string>

namespace fhcs {

/// Shortest round-trip decimal form of a double; locale independent.
std::string format_double(double v);

}  // namespace fhcs
