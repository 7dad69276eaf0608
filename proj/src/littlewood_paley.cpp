#include "tcm/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tcm/kernels.hpp"

namespace tcm::lp {

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

double chi_profile(double r) {
  return 1.0 - smooth_step((r - kBallPlateau) / (kBallSupport - kBallPlateau));
}

double phi_profile(double r) { return chi_profile(r / 2.0) - chi_profile(r); }

DyadicPartition::DyadicPartition(const Grid& grid) : grid_(grid) {
  const auto& geo = geometry(grid);
  block_lo_.resize(grid.size());
  w_lo_.resize(grid.size());
  int top = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = geo.k_norm[i];
    // Smallest level m with r / 2^m inside the support of chi. At that level
    // chi(r / 2^m) may be fractional; one level up it is 1.
    int m = 0;
    double scaled = r;
    while (scaled >= kBallSupport) {
      scaled *= 0.5;
      ++m;
    }
    const double c = chi_profile(scaled);
    block_lo_[i] = static_cast<std::int8_t>(m - 1);
    w_lo_[i] = c;
    top = std::max(top, c < 1.0 ? m : m - 1);
  }
  j_max_ = top;
  if (j_max_ < 0) throw std::invalid_argument("grid too small to host a dyadic annulus");
}

std::vector<double> DyadicPartition::multiplier(int j) const {
  std::vector<double> m(grid_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = weight(j, i);
  return m;
}

namespace {

void check_block(int j, const DyadicPartition& part) {
  if (j < -1 || j > part.j_max()) {
    throw std::out_of_range("dyadic block " + std::to_string(j) + " outside [-1, " +
                            std::to_string(part.j_max()) + "]");
  }
}

template <class Weight>
SpectralField apply(const SpectralField& f, const DyadicPartition& part, Weight w) {
  ensure_same_grid(f.grid(), part.grid());
  std::vector<double> mult(f.grid().size());
  for (std::size_t i = 0; i < mult.size(); ++i) mult[i] = w(i);
  SpectralField out(f.grid());
  kernels::scale(f.coeffs(), mult, out.coeffs());
  return out;
}

template <class Op>
VectorField apply_components(const VectorField& f, Op op) {
  std::vector<SpectralField> comps;
  for (const auto& c : f) comps.push_back(op(c));
  return VectorField(std::move(comps));
}

}  // namespace

SpectralField dyadic_block(const SpectralField& f, int j, const DyadicPartition& part) {
  check_block(j, part);
  return apply(f, part, [&](std::size_t i) { return part.weight(j, i); });
}

VectorField dyadic_block(const VectorField& f, int j, const DyadicPartition& part) {
  return apply_components(f, [&](const SpectralField& c) { return dyadic_block(c, j, part); });
}

SpectralField low_cutoff(const SpectralField& f, int j, const DyadicPartition& part) {
  if (j < 0) throw std::out_of_range("low-frequency cutoff index must be >= 0");
  if (j > part.j_max() + 1) return f;
  return apply(f, part, [&](std::size_t i) { return part.low_weight(j, i); });
}

VectorField low_cutoff(const VectorField& f, int j, const DyadicPartition& part) {
  return apply_components(f, [&](const SpectralField& c) { return low_cutoff(c, j, part); });
}

BonyParts bony_decompose(const SpectralField& f, const SpectralField& g,
                         const DyadicPartition& part) {
  ensure_same_grid(f.grid(), g.grid());
  ensure_same_grid(f.grid(), part.grid());
  const Grid& grid = f.grid();
  const int nb = part.block_count();
  const auto ft = truncate(f);
  const auto gt = truncate(g);

  // Physical blocks, index j + 1.
  std::vector<std::vector<double>> fb(nb), gb(nb);
  for (int j = -1; j <= part.j_max(); ++j) {
    fb[j + 1] = inverse_transform(dyadic_block(ft, j, part));
    gb[j + 1] = inverse_transform(dyadic_block(gt, j, part));
  }
  const std::size_t np = grid.size();
  std::vector<double> low_f(np, 0.0), low_g(np, 0.0);  // running S_{k-1}
  std::vector<double> t_fg(np, 0.0), t_gf(np, 0.0), rem(np, 0.0);
  for (int k = -1; k <= part.j_max(); ++k) {
    if (k - 2 >= -1) {
      const auto& fm = fb[k - 2 + 1];
      const auto& gm = gb[k - 2 + 1];
      for (std::size_t i = 0; i < np; ++i) {
        low_f[i] += fm[i];
        low_g[i] += gm[i];
      }
    }
    kernels::accumulate_product(low_f, gb[k + 1], t_fg);
    kernels::accumulate_product(low_g, fb[k + 1], t_gf);
    for (int m = k - 1; m <= k + 1; ++m) {
      if (m < -1 || m > part.j_max()) continue;
      kernels::accumulate_product(fb[k + 1], gb[m + 1], rem);
    }
  }
  auto finish = [&](const std::vector<double>& phys) {
    auto out = forward_transform(grid, phys);
    truncate_in_place(out);
    return out;
  };
  return BonyParts{finish(t_fg), finish(t_gf), finish(rem)};
}

std::vector<double> block_norms(const SpectralField& f, const DyadicPartition& part) {
  ensure_same_grid(f.grid(), part.grid());
  std::vector<double> e(part.block_count(), 0.0);
  kernels::block_energies(f.coeffs(), part.block_lo(), part.w_lo(), e);
  for (auto& x : e) x = std::sqrt(x);
  return e;
}

std::vector<double> block_norms(const VectorField& f, const DyadicPartition& part) {
  std::vector<double> e(part.block_count(), 0.0);
  for (const auto& c : f) {
    ensure_same_grid(c.grid(), part.grid());
    kernels::block_energies(c.coeffs(), part.block_lo(), part.w_lo(), e);
  }
  for (auto& x : e) x = std::sqrt(x);
  return e;
}

namespace {

void add_tilde_energies(const SpectralField& f, const DyadicPartition& part,
                        std::vector<double>& e) {
  ensure_same_grid(f.grid(), part.grid());
  auto c = f.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a = std::norm(c[i]);
    if (a == 0.0) continue;
    const int lo = part.block_lo()[i];
    for (int j = std::max(-1, lo - 1); j <= std::min(part.j_max(), lo + 2); ++j) {
      const double w = part.tilde_weight(j, i);
      e[j + 1] += w * w * a;
    }
  }
}

}  // namespace

std::vector<double> tilde_block_norms(const SpectralField& f, const DyadicPartition& part) {
  std::vector<double> e(part.block_count(), 0.0);
  add_tilde_energies(f, part, e);
  for (auto& x : e) x = std::sqrt(x);
  return e;
}

std::vector<double> tilde_block_norms(const VectorField& f, const DyadicPartition& part) {
  std::vector<double> e(part.block_count(), 0.0);
  for (const auto& c : f) add_tilde_energies(c, part, e);
  for (auto& x : e) x = std::sqrt(x);
  return e;
}

double besov_from_blocks(std::span<const double> blocks, const BesovIndex& idx) {
  double acc = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const int j = static_cast<int>(b) - 1;
    const double term = std::exp2(idx.s * j) * blocks[b];
    acc = idx.q == Summability::One ? acc + term : std::max(acc, term);
  }
  return acc;
}

double besov_norm(const SpectralField& f, const BesovIndex& idx, const DyadicPartition& part) {
  return besov_from_blocks(block_norms(f, part), idx);
}

double besov_norm(const VectorField& f, const BesovIndex& idx, const DyadicPartition& part) {
  return besov_from_blocks(block_norms(f, part), idx);
}

void NormSeries::push(double t, std::vector<double> blocks) {
  if (!times_.empty() && !(t > times_.back())) {
    throw std::invalid_argument("norm series times must be strictly increasing");
  }
  if (!blocks_.empty() && blocks.size() != blocks_.front().size()) {
    throw std::invalid_argument("norm series block count changed");
  }
  for (double b : blocks) {
    if (!(b >= 0.0)) throw std::invalid_argument("block norms must be nonnegative");
  }
  times_.push_back(t);
  blocks_.push_back(std::move(blocks));
}

NormSeries NormSeries::prefix(double t_end) const {
  NormSeries out;
  for (std::size_t i = 0; i < times_.size() && times_[i] <= t_end; ++i) {
    out.push(times_[i], blocks_[i]);
  }
  return out;
}

double time_norm(std::span<const double> times, std::span<const double> values, TimeNorm r) {
  if (times.empty()) throw std::invalid_argument("time norm of an empty series");
  if (r == TimeNorm::Infinity) return *std::max_element(values.begin(), values.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double dt = times[i + 1] - times[i];
    if (r == TimeNorm::L1) {
      acc += 0.5 * dt * (values[i] + values[i + 1]);
    } else {
      acc += 0.5 * dt * (values[i] * values[i] + values[i + 1] * values[i + 1]);
    }
  }
  return r == TimeNorm::L1 ? acc : std::sqrt(acc);
}

double chemin_lerner(const NormSeries& series, const BesovIndex& idx, TimeNorm r) {
  if (series.empty()) throw std::invalid_argument("Chemin-Lerner norm of an empty series");
  std::vector<double> per_block(series.block_count());
  std::vector<double> column(series.size());
  for (std::size_t b = 0; b < per_block.size(); ++b) {
    for (std::size_t i = 0; i < series.size(); ++i) column[i] = series.blocks(i)[b];
    per_block[b] = time_norm(series.times(), column, r);
  }
  return besov_from_blocks(per_block, idx);
}

double lebesgue_besov(const NormSeries& series, const BesovIndex& idx, TimeNorm r) {
  if (series.empty()) throw std::invalid_argument("time norm of an empty series");
  std::vector<double> values(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    values[i] = besov_from_blocks(series.blocks(i), idx);
  }
  return time_norm(series.times(), values, r);
}

}  // namespace tcm::lp
