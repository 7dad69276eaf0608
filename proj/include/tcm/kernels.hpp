#pragma once

// Data-parallel inner loops over lattice modes and physical samples.
//
// Every kernel has an OpenMP version in tcm::kernels and a plain loop in
// tcm::kernels::serial that is kept as the reference for tests and the
// benchmark. Reductions in the OpenMP versions split the range into a fixed
// number of chunks and combine them in chunk order, so results do not depend
// on the thread count.

#include <complex>
#include <cstdint>
#include <span>

namespace tcm::kernels {

using cplx = std::complex<double>;

/// out[i] = in[i] * mult[i]
void scale(std::span<const cplx> in, std::span<const double> mult, std::span<cplx> out);
/// acc[i] += sign * a[i] * b[i]
void accumulate_product(std::span<const double> a, std::span<const double> b,
                        std::span<double> acc, double sign = 1.0);
/// y[i] += alpha * x[i]
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
/// sum_i weight[i] * |c[i]|^2 (weight empty means 1)
double weighted_energy(std::span<const cplx> c, std::span<const double> weight = {});
/// Real part of sum_i weight[i] * a[i] * conj(b[i]).
double weighted_inner(std::span<const cplx> a, std::span<const cplx> b,
                      std::span<const double> weight = {});
/// Adds w^2 |c|^2 to energies[block_lo + 1] and (1-w)^2 |c|^2 to
/// energies[block_lo + 2] for every mode. energies.size() must be >= the
/// number of blocks touched.
void block_energies(std::span<const cplx> c, std::span<const std::int8_t> block_lo,
                    std::span<const double> w_lo, std::span<double> energies);
/// Largest |c[i]|, or +inf if any entry is not finite.
double max_abs(std::span<const cplx> c);

namespace serial {

void scale(std::span<const cplx> in, std::span<const double> mult, std::span<cplx> out);
void accumulate_product(std::span<const double> a, std::span<const double> b,
                        std::span<double> acc, double sign = 1.0);
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
double weighted_energy(std::span<const cplx> c, std::span<const double> weight = {});
double weighted_inner(std::span<const cplx> a, std::span<const cplx> b,
                      std::span<const double> weight = {});
void block_energies(std::span<const cplx> c, std::span<const std::int8_t> block_lo,
                    std::span<const double> w_lo, std::span<double> energies);
double max_abs(std::span<const cplx> c);

}  // namespace serial

/// Applies TCM_THREADS (if set and positive) as the OpenMP thread cap.
void configure_threads_from_env();

}  // namespace tcm::kernels
