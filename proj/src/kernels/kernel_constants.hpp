#pragma once

namespace fhcs::kernels::detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace fhcs::kernels::detail
