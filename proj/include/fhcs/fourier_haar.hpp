#pragma once

// Change-of-basis matrix between Haar coefficients and Fourier samples.
//
// U = F Phi has entry (omega, i) = F phi_i(omega), where phi_i is the Haar
// atom of coefficient index i. Rows are stored in centred frequency order
// (see fft.hpp), columns in the coefficient layout of haar.hpp. The block
// U_jl restricts rows to band W_j and columns to level l.

#include <iosfwd>
#include <optional>
#include <vector>

#include "fhcs/levels.hpp"

namespace fhcs {

/// Closed-form F phi_i(omega) for coefficient index i of a length-2^r signal:
///   scaling column (i = 0):  1 at omega = 0, else 0;
///   wavelet phi_{l,p}:       0 at omega = 0, else
///     2^{l/2-r} e^{2 pi i omega p / 2^l} (1 - e^{2 pi i omega / 2^{l+1}})^2 / (1 - e^{2 pi i omega / 2^r}).
/// Throws IndexError for omega outside {-n/2+1, ..., n/2} or i >= n.
cplx fourier_haar_entry(int omega, std::size_t coefficient_index, int r);

/// Same, addressed by (level, translation). Level 0 has translation 0 = psi
/// and translation 1 = phi_{0,0}; level l >= 1 has translations 0..2^l-1.
cplx fourier_haar_entry(int omega, int level, std::size_t translation, int r);

/// Dense complex matrix in column-major order.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  CVec data;

  cplx& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }
};

class ChangeOfBasisMatrix {
 public:
  ChangeOfBasisMatrix(LevelStructure levels, DenseMatrix entries);

  const LevelStructure& levels() const noexcept { return levels_; }
  std::size_t n() const noexcept { return levels_.n(); }
  const DenseMatrix& dense() const noexcept { return entries_; }
  /// Entry at frequency omega and coefficient index i.
  cplx at(int omega, std::size_t i) const;
  std::span<const cplx> column(std::size_t i) const;

  /// Row slots of band W_j, ascending omega.
  const std::vector<std::size_t>& band_rows(int j) const;
  /// U_jl as a |W_j| x (level size) dense matrix.
  DenseMatrix block(int j, int l) const;

 private:
  LevelStructure levels_;
  DenseMatrix entries_;
  std::vector<std::vector<std::size_t>> band_rows_;
};

enum class BuildMode {
  analytic,     // closed-form entries
  brute_force,  // dense F times dense Phi built from the atom definitions
};

inline constexpr std::size_t kDefaultDenseLimit = 4096;

/// Throws CapacityError if n exceeds dense_limit.
ChangeOfBasisMatrix build_U(const LevelStructure& levels, BuildMode mode,
                            std::size_t dense_limit = kDefaultDenseLimit);

/// max |U^* U - I| over all entries.
double unitarity_error(const ChangeOfBasisMatrix& u);

/// max |a - b| over all entries; throws SizeError on shape mismatch.
double max_entry_difference(const ChangeOfBasisMatrix& a, const ChangeOfBasisMatrix& b);

/// CSV with header "omega,column,real,imag", one line per entry, for the
/// whole matrix or only block (j, l).
void write_csv(std::ostream& os, const ChangeOfBasisMatrix& u,
               std::optional<std::pair<int, int>> block = std::nullopt);

}  // namespace fhcs
