#include "core/snapshot.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "core/errors.hpp"

namespace bdb {
namespace {

constexpr char kMagic[4] = {'B', 'D', 'B', 'K'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<unsigned char>& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_snapshot(const std::string& path, const DistributionField& f,
                    const ModelParams& params, double t) {
  if (!all_finite(f.v)) throw Unphysical("write_snapshot: non-finite field");

  std::vector<unsigned char> payload;
  payload.reserve(4 * 3 + 8 * 6 + 8 * f.v.size() + 16);
  put_u32(payload, kSnapshotVersion);
  put_u32(payload, static_cast<std::uint32_t>(f.grid.d));
  put_u32(payload, static_cast<std::uint32_t>(f.grid.nx));
  put_u32(payload, static_cast<std::uint32_t>(f.grid.np));
  put_f64(payload, f.grid.lx);
  put_f64(payload, params.eta);
  put_f64(payload, params.eps0);
  put_f64(payload, params.U);
  put_f64(payload, params.gamma);
  put_f64(payload, t);
  for (double x : f.v) put_f64(payload, x);
  const std::uint64_t sum = fnv1a64(payload);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("write_snapshot: cannot open " + tmp);
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    for (int i = 0; i < 8; ++i) {
      const char b = static_cast<char>((sum >> (8 * i)) & 0xff);
      out.write(&b, 1);
    }
    if (!out) throw IoError("write_snapshot: write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("write_snapshot: rename to " + path + " failed: " + ec.message());
}

SnapshotData read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_snapshot: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  if (bytes.size() < 4 + 16 + 48 + 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw CorruptSnapshot("read_snapshot: bad magic or truncated header in " + path);

  const unsigned char* p = bytes.data() + 4;
  const std::uint32_t version = get_u32(p);
  if (version > kSnapshotVersion)
    throw CorruptSnapshot("read_snapshot: snapshot version " + std::to_string(version) +
                          " is newer than supported version " +
                          std::to_string(kSnapshotVersion));
  const std::uint32_t d = get_u32(p + 4);
  const std::uint32_t nx = get_u32(p + 8);
  const std::uint32_t np = get_u32(p + 12);
  const double lx = get_f64(p + 16);

  PhaseGrid grid;
  try {
    grid = build_grid(static_cast<int>(d), static_cast<int>(nx), static_cast<int>(np), lx);
  } catch (const InvalidGrid& e) {
    throw CorruptSnapshot(std::string("read_snapshot: invalid grid header: ") + e.what());
  }

  const std::size_t header = 4 + 16 + 48;  // magic + u32s + f64 block
  const std::size_t expected = header + 8 * grid.size() + 8;
  if (bytes.size() != expected)
    throw CorruptSnapshot("read_snapshot: size mismatch, expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()));

  const std::uint64_t stored =
      [&] {
        std::uint64_t v = 0;
        const unsigned char* q = bytes.data() + bytes.size() - 8;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(q[i]) << (8 * i);
        return v;
      }();
  const std::uint64_t computed =
      fnv1a64(std::span<const unsigned char>(bytes.data() + 4, bytes.size() - 12));
  if (stored != computed)
    throw CorruptSnapshot("read_snapshot: checksum mismatch in " + path);

  SnapshotData snap;
  snap.f = DistributionField(grid);
  snap.params.d = static_cast<int>(d);
  snap.params.eta = get_f64(p + 24);
  snap.params.eps0 = get_f64(p + 32);
  snap.params.U = get_f64(p + 40);
  snap.params.gamma = get_f64(p + 48);
  snap.t = get_f64(p + 56);
  const unsigned char* fdata = bytes.data() + header;
  for (std::size_t i = 0; i < grid.size(); ++i) snap.f.v[i] = get_f64(fdata + 8 * i);
  return snap;
}

}  // namespace bdb
