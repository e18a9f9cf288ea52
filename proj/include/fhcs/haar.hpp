#pragma once

// Orthonormal discrete Haar transform on C^n, n = 2^r.
//
// Analysis returns c = Phi^* x in the level layout of levels.hpp:
//   c[0]               = <x, psi>           (scaling function, psi(t) = 2^{-r/2})
//   c[1]               = <x, phi_{0,0}>
//   c[2^j + p], j >= 1 = <x, phi_{j,p}>,    p = 0..2^j-1
// where phi_{j,p} is +2^{(j-r)/2} on the first half of [p 2^{r-j}, (p+1) 2^{r-j})
// and -2^{(j-r)/2} on the second half.

#include <span>

#include "fhcs/types.hpp"

namespace fhcs {

/// c = Phi^* x. Throws SizeError unless x.size() is a power of two >= 2.
CVec haar_forward(std::span<const cplx> x);
/// x = Phi c.
CVec haar_inverse(std::span<const cplx> c);

/// Allocation-free variants; `work` must hold at least n entries.
void haar_forward(std::span<const cplx> x, std::span<cplx> out, std::span<cplx> work);
void haar_inverse(std::span<const cplx> c, std::span<cplx> out, std::span<cplx> work);

/// Atom t-values of psi (level 0, index 0) or phi_{l,p} as an explicit vector.
/// Coefficient index follows the layout above.
RVec haar_atom(std::size_t n, std::size_t coefficient_index);

}  // namespace fhcs
