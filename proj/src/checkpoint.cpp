#include "tcm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace tcm {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw std::runtime_error("checkpoint record truncated in header");
  }
  return v;
}

// Storage index for the i-th wavevector in -n/2..n/2-1 row-major order.
std::size_t storage_of_ordered(const Grid& grid, std::size_t ordered) {
  const int n = grid.modes();
  std::array<int, 3> k{0, 0, 0};
  for (int axis = grid.dim() - 1; axis >= 0; --axis) {
    k[axis] = static_cast<int>(ordered % n) - n / 2;
    ordered /= n;
  }
  return grid.index_of(k);
}

}  // namespace

void write_record(std::ostream& out, const SpectralField& f) {
  const Grid& grid = f.grid();
  out.write("TCMF", 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(grid.dim()));
  put_u32(out, static_cast<std::uint32_t>(grid.modes()));
  auto c = f.coeffs();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx z = c[storage_of_ordered(grid, i)];
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
  if (!out) throw std::runtime_error("failed writing checkpoint record");
}

SpectralField read_record(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw std::runtime_error("checkpoint record truncated in header");
  if (std::memcmp(magic, "TCMF", 4) != 0) throw std::runtime_error("bad checkpoint magic");
  const auto version = get_u32(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto d = static_cast<int>(get_u32(in));
  const auto n = static_cast<int>(get_u32(in));
  Grid grid(d, n);
  std::vector<cplx> coeffs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double re = 0.0, im = 0.0;
    if (!in.read(reinterpret_cast<char*>(&re), sizeof re) ||
        !in.read(reinterpret_cast<char*>(&im), sizeof im)) {
      throw std::runtime_error("checkpoint record truncated in payload");
    }
    coeffs[storage_of_ordered(grid, i)] = {re, im};
  }
  return SpectralField(grid, std::move(coeffs));
}

void write_checkpoint(const std::filesystem::path& path, const std::vector<SpectralField>& fields) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& f : fields) write_record(out, f);
}

std::vector<SpectralField> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<SpectralField> fields;
  while (in.peek() != std::char_traits<char>::eof()) fields.push_back(read_record(in));
  return fields;
}

}  // namespace tcm
