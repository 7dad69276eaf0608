#include "tcm/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcm::kernels {

namespace {

constexpr std::ptrdiff_t kChunks = 64;
constexpr std::size_t kMaxBlocks = 32;

// Fixed chunk boundaries so that reductions are independent of thread count.
inline std::ptrdiff_t chunk_begin(std::ptrdiff_t c, std::ptrdiff_t n) { return c * n / kChunks; }

template <class Body>
double chunked_sum(std::ptrdiff_t n, Body body) {
  std::array<double, kChunks> partial{};
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < kChunks; ++c) {
    double s = 0.0;
    const std::ptrdiff_t end = chunk_begin(c + 1, n);
    for (std::ptrdiff_t i = chunk_begin(c, n); i < end; ++i) s += body(i);
    partial[c] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

void scale(std::span<const cplx> in, std::span<const double> mult, std::span<cplx> out) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = in[i] * mult[i];
}

void accumulate_product(std::span<const double> a, std::span<const double> b,
                        std::span<double> acc, double sign) {
  const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc[i] += sign * a[i] * b[i];
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double weighted_energy(std::span<const cplx> c, std::span<const double> weight) {
  const auto n = static_cast<std::ptrdiff_t>(c.size());
  if (weight.empty()) return chunked_sum(n, [&](std::ptrdiff_t i) { return std::norm(c[i]); });
  return chunked_sum(n, [&](std::ptrdiff_t i) { return weight[i] * std::norm(c[i]); });
}

double weighted_inner(std::span<const cplx> a, std::span<const cplx> b,
                      std::span<const double> weight) {
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  auto re = [&](std::ptrdiff_t i) {
    return a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  };
  if (weight.empty()) return chunked_sum(n, re);
  return chunked_sum(n, [&](std::ptrdiff_t i) { return weight[i] * re(i); });
}

void block_energies(std::span<const cplx> c, std::span<const std::int8_t> block_lo,
                    std::span<const double> w_lo, std::span<double> energies) {
  if (energies.size() > kMaxBlocks) throw std::length_error("too many dyadic blocks");
  const auto n = static_cast<std::ptrdiff_t>(c.size());
  std::vector<std::array<double, kMaxBlocks>> partial(kChunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ch = 0; ch < kChunks; ++ch) {
    auto& acc = partial[ch];
    acc.fill(0.0);
    const std::ptrdiff_t end = chunk_begin(ch + 1, n);
    for (std::ptrdiff_t i = chunk_begin(ch, n); i < end; ++i) {
      const double e = std::norm(c[i]);
      const double w = w_lo[i];
      const int slot = block_lo[i] + 1;
      acc[slot] += w * w * e;
      if (w < 1.0) acc[slot + 1] += (1.0 - w) * (1.0 - w) * e;
    }
  }
  for (const auto& acc : partial) {
    for (std::size_t b = 0; b < energies.size(); ++b) energies[b] += acc[b];
  }
}

double max_abs(std::span<const cplx> c) {
  const auto n = static_cast<std::ptrdiff_t>(c.size());
  double m = 0.0;
  bool finite = true;
#pragma omp parallel for schedule(static) reduction(max : m) reduction(&& : finite)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!std::isfinite(c[i].real()) || !std::isfinite(c[i].imag())) finite = false;
    m = std::max(m, std::abs(c[i]));
  }
  return finite ? m : std::numeric_limits<double>::infinity();
}

namespace serial {

void scale(std::span<const cplx> in, std::span<const double> mult, std::span<cplx> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * mult[i];
}

void accumulate_product(std::span<const double> a, std::span<const double> b,
                        std::span<double> acc, double sign) {
  for (std::size_t i = 0; i < a.size(); ++i) acc[i] += sign * a[i] * b[i];
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double weighted_energy(std::span<const cplx> c, std::span<const double> weight) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    s += (weight.empty() ? 1.0 : weight[i]) * std::norm(c[i]);
  }
  return s;
}

double weighted_inner(std::span<const cplx> a, std::span<const cplx> b,
                      std::span<const double> weight) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += (weight.empty() ? 1.0 : weight[i]) * (a[i] * std::conj(b[i])).real();
  }
  return s;
}

void block_energies(std::span<const cplx> c, std::span<const std::int8_t> block_lo,
                    std::span<const double> w_lo, std::span<double> energies) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double e = std::norm(c[i]);
    const double w = w_lo[i];
    energies[block_lo[i] + 1] += w * w * e;
    if (w < 1.0) energies[block_lo[i] + 2] += (1.0 - w) * (1.0 - w) * e;
  }
}

double max_abs(std::span<const cplx> c) {
  double m = 0.0;
  for (const auto& z : c) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      return std::numeric_limits<double>::infinity();
    }
    m = std::max(m, std::abs(z));
  }
  return m;
}

}  // namespace serial

void configure_threads_from_env() {
  const char* env = std::getenv("TCM_THREADS");
  if (env == nullptr) return;
  char* end = nullptr;
  long threads = std::strtol(env, &end, 10);
  if (end != env && threads > 0) omp_set_num_threads(static_cast<int>(threads));
}

}  // namespace tcm::kernels
