#pragma once

// Binary checkpoint records for spectral fields.
//
// One record is
//   char[4]  magic "TCMF"
//   u32      version (1)
//   u32      d
//   u32      n
//   f64[2 * n^d] interleaved (re, im)
// all little-endian. Coefficients are written row-major with every axis
// running over wavenumbers -n/2 ... n/2-1 (not FFT storage order).
// A checkpoint file is a sequence of records, one per field component.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tcm/spectral_field.hpp"

namespace tcm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_record(std::ostream& out, const SpectralField& f);
/// Throws std::runtime_error on bad magic, unknown version or truncation.
SpectralField read_record(std::istream& in);

void write_checkpoint(const std::filesystem::path& path, const std::vector<SpectralField>& fields);
std::vector<SpectralField> read_checkpoint(const std::filesystem::path& path);

}  // namespace tcm
