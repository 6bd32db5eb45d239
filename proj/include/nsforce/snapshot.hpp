#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsforce/field.hpp"
#include "nsforce/grid.hpp"
#include "nsforce/operators.hpp"

namespace nsforce {

class SnapshotError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Fixed 44-byte little-endian header preceding the coefficient payload.
struct SnapshotHeader {
    static constexpr char kMagic[8] = {'N', 'S', 'E', '2', 'D', 'S', 'N', 'P'};
    static constexpr std::uint32_t kVersion = 1;

    std::uint32_t version = kVersion;
    std::uint32_t M = 0;      ///< grid resolution
    std::uint32_t N_obs = 0;  ///< observation cutoff; 0 means full field
    double time = 0.0;
    double nu = 0.0;
    std::uint64_t payload_count = 0;  ///< serialized complex scalars

    /// Half-spectrum extent: kx runs 0..H, ky runs -H+1..H.
    static std::uint32_t half_extent(std::uint32_t M, std::uint32_t N_obs) {
        return (N_obs == 0) ? M / 2 : N_obs;
    }
    static std::uint64_t expected_count(std::uint32_t M, std::uint32_t N_obs) {
        const std::uint64_t H = half_extent(M, N_obs);
        return 2 * (H + 1) * (2 * H);
    }
};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "snapshot serialization assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size())
        throw SnapshotError("snapshot: truncated payload");
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

}  // namespace detail

/// Serialize a field: header, then (re, im) f64 pairs for both components,
/// half-spectrum raster order kx = 0..H outer, ky = -H+1..H inner. Hermitian
/// partners (kx < 0) are implied. Round-trip is bitwise identity.
inline std::string write_snapshot(const SpectralField& field, double time, double nu,
                                  std::uint32_t N_obs = 0) {
    const std::uint32_t M = static_cast<std::uint32_t>(field.grid().resolution);
    SnapshotHeader header;
    header.M = M;
    header.N_obs = N_obs;
    header.time = time;
    header.nu = nu;
    header.payload_count = SnapshotHeader::expected_count(M, N_obs);

    std::string out;
    out.reserve(44 + 16 * header.payload_count);
    out.append(SnapshotHeader::kMagic, 8);
    detail::put(out, header.version);
    detail::put(out, header.M);
    detail::put(out, header.N_obs);
    detail::put(out, header.time);
    detail::put(out, header.nu);
    detail::put(out, header.payload_count);

    const int H = static_cast<int>(SnapshotHeader::half_extent(M, N_obs));
    for (int c = 0; c < 2; ++c) {
        for (int kx = 0; kx <= H; ++kx) {
            for (int ky = -H + 1; ky <= H; ++ky) {
                const Complex z = field.at(c, kx, ky);
                detail::put(out, z.real());
                detail::put(out, z.imag());
            }
        }
    }
    return out;
}

struct SnapshotMeta {
    double time = 0.0;
    double nu = 0.0;
    std::uint32_t M = 0;
    std::uint32_t N_obs = 0;
};

/// Parse a snapshot; the Hermitian partners are reconstituted so the result
/// is a full (real) field on an M x M grid.
inline std::pair<SpectralField, SnapshotMeta> read_snapshot(const std::string& bytes) {
    if (bytes.size() < 44 || std::memcmp(bytes.data(), SnapshotHeader::kMagic, 8) != 0)
        throw SnapshotError("snapshot: bad magic");
    std::size_t pos = 8;
    const auto version = detail::take<std::uint32_t>(bytes, pos);
    if (version != SnapshotHeader::kVersion)
        throw SnapshotError("snapshot: unsupported version " + std::to_string(version));
    SnapshotMeta meta;
    meta.M = detail::take<std::uint32_t>(bytes, pos);
    meta.N_obs = detail::take<std::uint32_t>(bytes, pos);
    meta.time = detail::take<double>(bytes, pos);
    meta.nu = detail::take<double>(bytes, pos);
    const auto count = detail::take<std::uint64_t>(bytes, pos);
    if (count != SnapshotHeader::expected_count(meta.M, meta.N_obs))
        throw SnapshotError("snapshot: payload count inconsistent with header");
    if (bytes.size() != 44 + 16 * count)
        throw SnapshotError("snapshot: truncated payload");

    SpectralGrid grid(static_cast<int>(meta.M));
    SpectralField field(grid);
    const int H = static_cast<int>(SnapshotHeader::half_extent(meta.M, meta.N_obs));
    for (int c = 0; c < 2; ++c) {
        for (int kx = 0; kx <= H; ++kx) {
            for (int ky = -H + 1; ky <= H; ++ky) {
                const double re = detail::take<double>(bytes, pos);
                const double im = detail::take<double>(bytes, pos);
                if (!std::isfinite(re) || !std::isfinite(im))
                    throw SnapshotError("snapshot: non-finite coefficient");
                field.at(c, kx, ky) = Complex(re, im);
                // mirror to the Hermitian partner unless it lands in the
                // same bin; partners inside the stored range are overwritten
                // with identical values for any symmetric field
                const bool self = grid.bin(-kx) == grid.bin(kx) && grid.bin(-ky) == grid.bin(ky);
                if (!self) field.at(c, -kx, -ky) = Complex(re, -im);
            }
        }
    }
    return {std::move(field), meta};
}

inline void write_snapshot_file(const std::string& path, const SpectralField& field,
                                double time, double nu, std::uint32_t N_obs = 0) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError("snapshot: cannot open for writing: " + path);
    const std::string bytes = write_snapshot(field, time, nu, N_obs);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SnapshotError("snapshot: write failed: " + path);
}

inline std::pair<SpectralField, SnapshotMeta> read_snapshot_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("snapshot: cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return read_snapshot(bytes);
}

}  // namespace nsforce
