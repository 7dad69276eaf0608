#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace tcm {

/// Periodic lattice on the box [0, 2*pi)^d with n modes per axis.
///
/// Coefficients are stored row-major (axis 0 slowest) in FFT order: the
/// storage index i along an axis carries wavenumber i for i < n/2 and
/// i - n otherwise, so the Nyquist wavenumber is -n/2.
class Grid {
 public:
  /// Throws std::invalid_argument unless d is 2 or 3 and n is even and >= 8.
  Grid(int d, int n);

  int dim() const { return d_; }
  int modes() const { return n_; }
  std::size_t size() const { return size_; }

  /// Largest |k_i| kept by the 2/3 rule.
  int dealias_cutoff() const { return (n_ - 1) / 3; }

  int wavenumber(int storage_index) const {
    return storage_index < n_ / 2 ? storage_index : storage_index - n_;
  }
  int storage_index(int wavenumber) const {
    return wavenumber >= 0 ? wavenumber : wavenumber + n_;
  }

  std::array<int, 3> wavevector(std::size_t idx) const;
  std::size_t index_of(const std::array<int, 3>& k) const;
  /// Storage index of -k (Nyquist components map to themselves).
  std::size_t mirror(std::size_t idx) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.d_ == b.d_ && a.n_ == b.n_;
  }

 private:
  int d_;
  int n_;
  std::size_t size_;
};

/// Per-mode tables shared by every field on a grid. Built once per (d, n)
/// and cached; the returned reference stays valid for the program lifetime.
struct GridGeometry {
  std::vector<std::array<int, 3>> k;   // wavevector per storage index
  std::vector<double> k_norm;          // |k|
  std::vector<std::uint8_t> resolved;  // 1 if every |k_i| <= dealias cutoff
  std::vector<std::uint8_t> nyquist;   // 1 if some k_i == -n/2
  std::vector<std::size_t> mirror;     // storage index of -k
};

const GridGeometry& geometry(const Grid& grid);

void ensure_same_grid(const Grid& a, const Grid& b);

}  // namespace tcm
