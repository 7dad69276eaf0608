#include "tcm/spectral_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "tcm/kernels.hpp"

namespace tcm {

namespace {

// FFTW plans are created once per grid under a lock; execution through the
// new-array interface is thread safe.
struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~FftPlans() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

const FftPlans& plans_for(const Grid& grid) {
  static std::map<std::pair<int, int>, std::unique_ptr<FftPlans>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto& slot = cache[{grid.dim(), grid.modes()}];
  if (!slot) {
    slot = std::make_unique<FftPlans>();
    std::vector<int> dims(grid.dim(), grid.modes());
    std::vector<cplx> a(grid.size()), b(grid.size());
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    slot->forward = fftw_plan_dft(grid.dim(), dims.data(), in, out, FFTW_FORWARD, flags);
    slot->backward = fftw_plan_dft(grid.dim(), dims.data(), in, out, FFTW_BACKWARD, flags);
  }
  return *slot;
}

void execute(fftw_plan plan, std::vector<cplx>& in, std::vector<cplx>& out) {
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

const std::vector<double>& resolved_mask(const Grid& grid) {
  static std::mutex m;
  static std::map<std::pair<int, int>, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[{grid.dim(), grid.modes()}];
  if (slot.empty()) {
    const auto& geo = geometry(grid);
    slot.assign(geo.resolved.begin(), geo.resolved.end());
  }
  return slot;
}

}  // namespace

SpectralField::SpectralField(const Grid& grid) : grid_(grid), coeffs_(grid.size()) {}

SpectralField::SpectralField(const Grid& grid, std::vector<cplx> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.size()) {
    throw std::invalid_argument("coefficient count " + std::to_string(coeffs_.size()) +
                                " does not match grid size " + std::to_string(grid_.size()));
  }
}

void SpectralField::set_mode(const std::array<int, 3>& k, cplx value) {
  const std::size_t idx = grid_.index_of(k);
  const std::size_t mirror = geometry(grid_).mirror[idx];
  if (mirror == idx) {
    coeffs_[idx] = value.real();
  } else {
    coeffs_[idx] = value;
    coeffs_[mirror] = std::conj(value);
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  return add_scaled(1.0, other);
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  return add_scaled(-1.0, other);
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpectralField& SpectralField::add_scaled(double s, const SpectralField& other) {
  ensure_same_grid(grid_, other.grid_);
  kernels::axpy(s, other.coeffs_, coeffs_);
  return *this;
}

VectorField::VectorField(const Grid& grid)
    : components_(static_cast<std::size_t>(grid.dim()), SpectralField(grid)) {}

VectorField::VectorField(std::vector<SpectralField> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("vector field needs components");
  const Grid& g = components_.front().grid();
  if (static_cast<int>(components_.size()) != g.dim()) {
    throw std::invalid_argument("vector field must have d components");
  }
  for (const auto& c : components_) ensure_same_grid(g, c.grid());
}

VectorField& VectorField::operator+=(const VectorField& other) { return add_scaled(1.0, other); }
VectorField& VectorField::operator-=(const VectorField& other) { return add_scaled(-1.0, other); }

VectorField& VectorField::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}

VectorField& VectorField::add_scaled(double s, const VectorField& other) {
  if (other.dim() != dim()) throw std::invalid_argument("vector field dimension mismatch");
  for (int i = 0; i < dim(); ++i) components_[i].add_scaled(s, other[i]);
  return *this;
}

SpectralField forward_transform(const Grid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size()) {
    throw std::invalid_argument("expected " + std::to_string(grid.size()) +
                                " physical samples, got " + std::to_string(samples.size()));
  }
  std::vector<cplx> in(samples.begin(), samples.end());
  std::vector<cplx> out(grid.size());
  execute(plans_for(grid).forward, in, out);
  const double inv = 1.0 / static_cast<double>(grid.size());
  for (auto& c : out) c *= inv;
  // Real input: the Nyquist-self-mirrored coefficients are real up to rounding.
  const auto& geo = geometry(grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (geo.mirror[i] == i) out[i] = out[i].real();
  }
  return SpectralField(grid, std::move(out));
}

std::vector<double> inverse_transform(const SpectralField& f) {
  const Grid& grid = f.grid();
  std::vector<cplx> in(f.coeffs().begin(), f.coeffs().end());
  std::vector<cplx> out(grid.size());
  execute(plans_for(grid).backward, in, out);
  std::vector<double> samples(grid.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = out[i].real();
  return samples;
}

SpectralField derivative(const SpectralField& f, int axis) {
  const Grid& grid = f.grid();
  if (axis < 0 || axis >= grid.dim()) {
    throw std::out_of_range("derivative axis " + std::to_string(axis) + " out of range");
  }
  const auto& geo = geometry(grid);
  SpectralField out(grid);
  auto in = f.coeffs();
  auto dst = out.coeffs();
  const int nyq = -grid.modes() / 2;
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const int k = geo.k[i][axis];
    dst[i] = (k == nyq) ? cplx{} : cplx(0.0, k) * in[i];
  }
  debug_check_real(out);
  return out;
}

SpectralField fractional_laplacian(const SpectralField& f, double alpha) {
  if (!(alpha >= 0.0)) {
    throw std::invalid_argument("fractional Laplacian exponent must be >= 0");
  }
  const auto& geo = geometry(f.grid());
  std::vector<double> mult(geo.k_norm.size());
  for (std::size_t i = 0; i < mult.size(); ++i) {
    const double r = geo.k_norm[i];
    mult[i] = r == 0.0 ? 0.0 : std::pow(r, 2.0 * alpha);
  }
  SpectralField out(f.grid());
  kernels::scale(f.coeffs(), mult, out.coeffs());
  debug_check_real(out);
  return out;
}

void truncate_in_place(SpectralField& f) {
  kernels::scale(f.coeffs(), resolved_mask(f.grid()), f.coeffs());
}

SpectralField truncate(const SpectralField& f) {
  SpectralField out(f);
  truncate_in_place(out);
  return out;
}

SpectralField dealiased_product(const SpectralField& f, const SpectralField& g) {
  ensure_same_grid(f.grid(), g.grid());
  auto a = inverse_transform(truncate(f));
  auto b = inverse_transform(truncate(g));
  std::vector<double> prod(a.size(), 0.0);
  kernels::accumulate_product(a, b, prod);
  auto out = forward_transform(f.grid(), prod);
  truncate_in_place(out);
  debug_check_real(out);
  return out;
}

SpectralField divergence(const VectorField& w) {
  SpectralField out(w.grid());
  for (int i = 0; i < w.dim(); ++i) out += derivative(w[i], i);
  return out;
}

VectorField gradient(const SpectralField& f) {
  std::vector<SpectralField> comps;
  for (int i = 0; i < f.grid().dim(); ++i) comps.push_back(derivative(f, i));
  return VectorField(std::move(comps));
}

double l2_norm(const SpectralField& f) { return std::sqrt(kernels::weighted_energy(f.coeffs())); }

double l2_norm(const VectorField& w) {
  double e = 0.0;
  for (const auto& c : w) e += kernels::weighted_energy(c.coeffs());
  return std::sqrt(e);
}

double inner(const SpectralField& f, const SpectralField& g) {
  ensure_same_grid(f.grid(), g.grid());
  return kernels::weighted_inner(f.coeffs(), g.coeffs());
}

double inner(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += inner(a[i], b[i]);
  return s;
}

double hermitian_defect(const SpectralField& f) {
  const auto& geo = geometry(f.grid());
  auto c = f.coeffs();
  double scale = 0.0;
  double defect = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    scale = std::max(scale, std::abs(c[i]));
    defect = std::max(defect, std::abs(c[geo.mirror[i]] - std::conj(c[i])));
  }
  return scale == 0.0 ? 0.0 : defect / scale;
}

void debug_check_real([[maybe_unused]] const SpectralField& f) {
#ifndef NDEBUG
  assert(hermitian_defect(f) <= 1e-12 && "field lost Hermitian symmetry");
#endif
}

}  // namespace tcm
