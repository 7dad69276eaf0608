#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "tcm/grid.hpp"

namespace tcm {

using cplx = std::complex<double>;

/// Fourier coefficients of a real scalar field on a periodic lattice.
///
/// Coefficients are amplitudes: f(x) = sum_k c_k exp(i k.x), so the forward
/// transform divides by n^d and a lone cos(x_1) has c_{+-e_1} = 1/2.
class SpectralField {
 public:
  explicit SpectralField(const Grid& grid);
  SpectralField(const Grid& grid, std::vector<cplx> coeffs);

  const Grid& grid() const { return grid_; }
  std::span<const cplx> coeffs() const { return coeffs_; }
  std::span<cplx> coeffs() { return coeffs_; }

  cplx coeff(const std::array<int, 3>& k) const { return coeffs_[grid_.index_of(k)]; }
  /// Sets c_k = value and c_{-k} = conj(value).
  void set_mode(const std::array<int, 3>& k, cplx value);

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);
  /// this += s * other
  SpectralField& add_scaled(double s, const SpectralField& other);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

 private:
  Grid grid_;
  std::vector<cplx> coeffs_;
};

/// d scalar components sharing one grid.
class VectorField {
 public:
  explicit VectorField(const Grid& grid);
  explicit VectorField(std::vector<SpectralField> components);

  const Grid& grid() const { return components_.front().grid(); }
  int dim() const { return static_cast<int>(components_.size()); }
  SpectralField& operator[](int i) { return components_[i]; }
  const SpectralField& operator[](int i) const { return components_[i]; }
  auto begin() { return components_.begin(); }
  auto end() { return components_.end(); }
  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);
  VectorField& add_scaled(double s, const VectorField& other);

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

 private:
  std::vector<SpectralField> components_;
};

SpectralField forward_transform(const Grid& grid, std::span<const double> samples);
std::vector<double> inverse_transform(const SpectralField& f);

/// Multiplies c_k by i k_axis. Nyquist components along the axis are
/// annihilated so that the result stays real.
SpectralField derivative(const SpectralField& f, int axis);
/// Multiplies c_k by |k|^(2 alpha), with the k = 0 multiplier taken as 0.
SpectralField fractional_laplacian(const SpectralField& f, double alpha);
/// Zeroes every mode with some |k_i| above the 2/3-rule cutoff.
SpectralField truncate(const SpectralField& f);
void truncate_in_place(SpectralField& f);
/// Coefficients of f*g with the 2/3 rule applied to inputs and output.
SpectralField dealiased_product(const SpectralField& f, const SpectralField& g);

SpectralField divergence(const VectorField& w);
VectorField gradient(const SpectralField& f);

/// Lattice-mean L^2 norm, (sum_k |c_k|^2)^(1/2) by Parseval.
double l2_norm(const SpectralField& f);
double l2_norm(const VectorField& w);
/// Lattice mean of f*g.
double inner(const SpectralField& f, const SpectralField& g);
double inner(const VectorField& a, const VectorField& b);

/// max_k |c_{-k} - conj(c_k)| relative to max_k |c_k| (0 for the zero field).
double hermitian_defect(const SpectralField& f);

/// Asserts Hermitian symmetry in debug builds.
void debug_check_real(const SpectralField& f);

}  // namespace tcm
