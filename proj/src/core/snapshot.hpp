#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "core/equilibrium.hpp"
#include "core/grid.hpp"

namespace bdb {

// Bit-exact snapshot container:
//   magic "BDBK"
//   u32 version, u32 d, u32 Nx, u32 Np          (little endian)
//   f64 Lx, eta, eps0, U, gamma, t              (little endian)
//   f64 f[...] row-major, x-major p-minor
//   u64 FNV-1a checksum of every payload byte between the magic and here
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct SnapshotData {
  DistributionField f;
  ModelParams params;
  double t = 0.0;
};

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

// Writes atomically (temp file + rename). Throws IoError / Unphysical.
void write_snapshot(const std::string& path, const DistributionField& f,
                    const ModelParams& params, double t);

// Throws CorruptSnapshot on magic/version/size/checksum mismatch.
SnapshotData read_snapshot(const std::string& path);

}  // namespace bdb
