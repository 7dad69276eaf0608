#pragma once

// Inhomogeneous Littlewood-Paley decomposition on the periodic lattice.
//
// chi is a radial C^infinity cutoff equal to 1 on |xi| <= 3/4 and 0 for
// |xi| >= 4/3; phi(xi) = chi(xi/2) - chi(xi) lives in 3/4 <= |xi| <= 8/3.
// Delta_{-1} multiplies by chi, Delta_j (j >= 0) by phi(k / 2^j), and
// S_j = sum_{m <= j-1} Delta_m. The top block index is the smallest one for
// which the partition covers every lattice wavevector, so the blocks sum to
// the identity on the whole lattice.

#include <cstdint>
#include <span>
#include <vector>

#include "tcm/spectral_field.hpp"

namespace tcm::lp {

inline constexpr double kBallPlateau = 3.0 / 4.0;
inline constexpr double kBallSupport = 4.0 / 3.0;
inline constexpr double kAnnulusInner = 3.0 / 4.0;
inline constexpr double kAnnulusOuter = 8.0 / 3.0;

/// C^infinity step built from exp(-1/t): 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x);
/// Low-frequency profile chi(|xi|).
double chi_profile(double r);
/// Annulus profile phi(|xi|) = chi(|xi|/2) - chi(|xi|).
double phi_profile(double r);

class DyadicPartition {
 public:
  explicit DyadicPartition(const Grid& grid);

  const Grid& grid() const { return grid_; }
  static constexpr int j_min() { return -1; }
  int j_max() const { return j_max_; }
  int block_count() const { return j_max_ + 2; }

  /// Multiplier of Delta_j at storage index idx (j = -1 is chi).
  double weight(int j, std::size_t idx) const {
    const int lo = block_lo_[idx];
    if (j == lo) return w_lo_[idx];
    if (j == lo + 1) return 1.0 - w_lo_[idx];
    return 0.0;
  }
  /// Multiplier of S_j = sum_{m <= j-1} Delta_m.
  double low_weight(int j, std::size_t idx) const {
    const int lo = block_lo_[idx];
    if (j - 1 >= lo + 1) return 1.0;
    if (j - 1 == lo) return w_lo_[idx];
    return 0.0;
  }
  /// Multiplier of Delta_{j-1} + Delta_j + Delta_{j+1}.
  double tilde_weight(int j, std::size_t idx) const {
    return weight(j - 1, idx) + weight(j, idx) + weight(j + 1, idx);
  }

  std::vector<double> multiplier(int j) const;

  /// Each mode lies in blocks block_lo and block_lo + 1 with weights w_lo and
  /// 1 - w_lo.
  std::span<const std::int8_t> block_lo() const { return block_lo_; }
  std::span<const double> w_lo() const { return w_lo_; }

 private:
  Grid grid_;
  int j_max_ = 0;
  std::vector<std::int8_t> block_lo_;
  std::vector<double> w_lo_;
};

SpectralField dyadic_block(const SpectralField& f, int j, const DyadicPartition& part);
VectorField dyadic_block(const VectorField& f, int j, const DyadicPartition& part);
/// S_j f for j >= 0; j past the top block returns f.
SpectralField low_cutoff(const SpectralField& f, int j, const DyadicPartition& part);
VectorField low_cutoff(const VectorField& f, int j, const DyadicPartition& part);

/// Bony decomposition of the dealiased product f*g.
struct BonyParts {
  SpectralField low_high;   // T_f g = sum_k S_{k-1} f Delta_k g
  SpectralField high_low;   // T_g f = sum_k S_{k-1} g Delta_k f
  SpectralField remainder;  // R(f, g) = sum_k Delta_k f Delta~_k g
  SpectralField sum() const { return low_high + high_low + remainder; }
};
BonyParts bony_decompose(const SpectralField& f, const SpectralField& g,
                         const DyadicPartition& part);

/// ||Delta_j f||_{L^2} for j = -1 .. j_max, stored at index j + 1.
std::vector<double> block_norms(const SpectralField& f, const DyadicPartition& part);
std::vector<double> block_norms(const VectorField& f, const DyadicPartition& part);
/// ||Delta~_j f||_{L^2} for j = -1 .. j_max, stored at index j + 1.
std::vector<double> tilde_block_norms(const SpectralField& f, const DyadicPartition& part);
std::vector<double> tilde_block_norms(const VectorField& f, const DyadicPartition& part);

enum class Summability { One, Infinity };

/// B^s_{2,q} with q in {1, infinity}.
struct BesovIndex {
  double s = 0.0;
  Summability q = Summability::One;
};

/// Weighted l^q sum of block norms (index j + 1 holds block j).
double besov_from_blocks(std::span<const double> blocks, const BesovIndex& idx);
double besov_norm(const SpectralField& f, const BesovIndex& idx, const DyadicPartition& part);
double besov_norm(const VectorField& f, const BesovIndex& idx, const DyadicPartition& part);

/// Time samples of block norms of one field.
class NormSeries {
 public:
  /// Throws if t does not exceed the last time or any block norm is negative.
  void push(double t, std::vector<double> blocks);

  bool empty() const { return times_.empty(); }
  std::size_t size() const { return times_.size(); }
  std::span<const double> times() const { return times_; }
  const std::vector<double>& blocks(std::size_t i) const { return blocks_[i]; }
  std::size_t block_count() const { return blocks_.empty() ? 0 : blocks_.front().size(); }
  /// Series restricted to samples with t <= t_end.
  NormSeries prefix(double t_end) const;

 private:
  std::vector<double> times_;
  std::vector<std::vector<double>> blocks_;
};

enum class TimeNorm { L1, L2, Infinity };

/// Trapezoid L^1/L^2 or max over samples.
double time_norm(std::span<const double> times, std::span<const double> values, TimeNorm r);

/// Chemin-Lerner norm: time norm per block inside, l^q over blocks outside.
double chemin_lerner(const NormSeries& series, const BesovIndex& idx, TimeNorm r);
/// Plain L^r(0,T; B^s_{2,q}): Besov norm per time inside, time norm outside.
double lebesgue_besov(const NormSeries& series, const BesovIndex& idx, TimeNorm r);

}  // namespace tcm::lp
