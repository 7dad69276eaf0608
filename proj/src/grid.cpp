#include "tcm/grid.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace tcm {

Grid::Grid(int d, int n) : d_(d), n_(n), size_(0) {
  if (d != 2 && d != 3) {
    throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(d));
  }
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("grid modes per axis must be even and >= 8, got " +
                                std::to_string(n));
  }
  size_ = 1;
  for (int i = 0; i < d; ++i) size_ *= static_cast<std::size_t>(n);
}

std::array<int, 3> Grid::wavevector(std::size_t idx) const {
  std::array<int, 3> k{0, 0, 0};
  for (int axis = d_ - 1; axis >= 0; --axis) {
    k[axis] = wavenumber(static_cast<int>(idx % n_));
    idx /= n_;
  }
  return k;
}

std::size_t Grid::index_of(const std::array<int, 3>& k) const {
  std::size_t idx = 0;
  for (int axis = 0; axis < d_; ++axis) {
    int w = k[axis];
    if (w < -n_ / 2 || w >= n_ / 2) {
      throw std::out_of_range("wavenumber " + std::to_string(w) + " outside lattice");
    }
    idx = idx * n_ + storage_index(w);
  }
  return idx;
}

std::size_t Grid::mirror(std::size_t idx) const {
  auto k = wavevector(idx);
  for (int axis = 0; axis < d_; ++axis) {
    if (k[axis] != -n_ / 2) k[axis] = -k[axis];
  }
  return index_of(k);
}

namespace {

std::unique_ptr<GridGeometry> build_geometry(const Grid& grid) {
  auto g = std::make_unique<GridGeometry>();
  const std::size_t size = grid.size();
  const int cutoff = grid.dealias_cutoff();
  g->k.resize(size);
  g->k_norm.resize(size);
  g->resolved.resize(size);
  g->nyquist.resize(size);
  g->mirror.resize(size);
  for (std::size_t idx = 0; idx < size; ++idx) {
    auto k = grid.wavevector(idx);
    g->k[idx] = k;
    double k2 = 0.0;
    bool resolved = true;
    bool nyquist = false;
    for (int axis = 0; axis < grid.dim(); ++axis) {
      k2 += static_cast<double>(k[axis]) * k[axis];
      if (std::abs(k[axis]) > cutoff) resolved = false;
      if (k[axis] == -grid.modes() / 2) nyquist = true;
    }
    g->k_norm[idx] = std::sqrt(k2);
    g->resolved[idx] = resolved ? 1 : 0;
    g->nyquist[idx] = nyquist ? 1 : 0;
    g->mirror[idx] = grid.mirror(idx);
  }
  return g;
}

}  // namespace

const GridGeometry& geometry(const Grid& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<GridGeometry>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{grid.dim(), grid.modes()}];
  if (!slot) slot = build_geometry(grid);
  return *slot;
}

void ensure_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) {
    throw std::invalid_argument("grid mismatch: (d=" + std::to_string(a.dim()) +
                                ", n=" + std::to_string(a.modes()) + ") vs (d=" +
                                std::to_string(b.dim()) + ", n=" + std::to_string(b.modes()) +
                                ")");
  }
}

}  // namespace tcm
