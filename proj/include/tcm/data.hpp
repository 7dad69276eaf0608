#pragma once

// Seeded initial data families.

#include <cstdint>
#include <string>

#include "tcm/model.hpp"

namespace tcm::data {

/// SplitMix64 (Steele, Lea, Flood 2014). 64-bit state; each call adds the
/// golden-ratio increment and returns a mixed copy of the state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Top 53 bits scaled to [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Standard normal by Box-Muller; both values of a pair are used in order.
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class Family { RandomBesov, TaylorGreenLike, SingleShell };

Family parse_family(const std::string& name);
std::string to_string(Family f);

struct DataSpec {
  Family family = Family::RandomBesov;
  double amplitude = 1e-3;
  std::uint64_t seed = 1;
  int shell = 2;  // single-shell only
};

struct InitialData {
  model::TCMState state;
  double u_norm = 0.0;      // B^{s_uv}_{2,1}
  double v_norm = 0.0;      // B^{s_uv}_{2,1}
  double theta_norm = 0.0;  // B^{s_theta}_{2,1}
  double M = 0.0;           // 2 (u_norm + v_norm + theta_norm)
};

/// Real fields on the dealiased band with k = 0 left empty and u projected
/// onto divergence-free fields.
///  random-besov: Gaussian coefficients rescaled so that the dyadic shell
///    2^j <= |k| < 2^{j+1} of each field has L^2 norm amplitude * 2^{-js},
///    with s = s_uv for u, v and s_theta for theta.
///  taylor-green-like: amplitude times fixed trigonometric fields (seed unused).
///  single-shell: random-besov restricted to the shell j = spec.shell.
InitialData generate_data(const DataSpec& spec, const Grid& grid, double alpha);

}  // namespace tcm::data
