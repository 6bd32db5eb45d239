#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace nsforce {

/// Periodic grid on [0,2pi]^2 with a two-thirds dealiasing band.
///
/// The fundamental wavenumber is 1 (domain length 2pi per axis), so integer
/// wavenumbers coincide with physical ones.
struct SpectralGrid {
    int resolution = 0;      ///< physical points per axis, M (even, >= 4)
    int dealias_cutoff = 0;  ///< K_d = floor(M/3); modes with |k|_inf > K_d are dropped

    SpectralGrid() = default;

    explicit SpectralGrid(int M)
        : resolution(M), dealias_cutoff(M / 3) {
        if (M < 4 || M % 2 != 0)
            throw std::invalid_argument("SpectralGrid: resolution must be even and >= 4");
        // dealiased band strictly inside Nyquist
        if (!(dealias_cutoff < M / 2))
            throw std::invalid_argument("SpectralGrid: dealias cutoff must be < M/2");
    }

    static constexpr double domain_length() { return 2.0 * M_PI; }
    static constexpr double kappa0() { return 1.0; }

    int size() const { return resolution * resolution; }

    /// Signed wavenumber for FFT bin i: 0..M/2, then -M/2+1..-1.
    int wavenumber(int i) const {
        return (i <= resolution / 2) ? i : i - resolution;
    }

    /// FFT bin for signed wavenumber k in (-M/2, M/2].
    int bin(int k) const {
        return (k >= 0) ? k : k + resolution;
    }

    bool operator==(const SpectralGrid& o) const {
        return resolution == o.resolution && dealias_cutoff == o.dealias_cutoff;
    }
    bool operator!=(const SpectralGrid& o) const { return !(*this == o); }
};

/// Euclidean wavenumber ball |n| <= N, the observation operator's support.
struct WavenumberBall {
    int N = 0;

    WavenumberBall() = default;
    explicit WavenumberBall(int cutoff) : N(cutoff) {
        if (cutoff < 1)
            throw std::invalid_argument("WavenumberBall: cutoff must be >= 1");
    }

    bool contains(int kx, int ky) const {
        return static_cast<std::int64_t>(kx) * kx + static_cast<std::int64_t>(ky) * ky
               <= static_cast<std::int64_t>(N) * N;
    }
};

}  // namespace nsforce
