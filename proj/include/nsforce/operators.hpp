#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

#include "nsforce/field.hpp"
#include "nsforce/grid.hpp"

namespace nsforce {

/// Orthogonal projection onto divergence-free fields:
/// (Pu)^(n) = u^(n) - (n.u^(n)/|n|^2) n, with the mean mode zeroed.
inline SpectralField leray_project(const SpectralField& u) {
    SpectralField out = u;
    out.for_each_mode([&](int kx, int ky, std::size_t idx) {
        const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
        if (k2 == 0.0) return;
        const Complex dot = static_cast<double>(kx) * out.component(0)[idx]
                          + static_cast<double>(ky) * out.component(1)[idx];
        const Complex scale = dot / k2;
        out.component(0)[idx] -= scale * static_cast<double>(kx);
        out.component(1)[idx] -= scale * static_cast<double>(ky);
    });
    out.zero_mean();
    return out;
}

/// Low-pass projector P_N onto the Euclidean ball |n| <= N.
inline SpectralField low_pass(const SpectralField& u, WavenumberBall ball) {
    SpectralField out = u;
    out.for_each_mode([&](int kx, int ky, std::size_t idx) {
        if (!ball.contains(kx, ky)) {
            out.component(0)[idx] = Complex(0.0, 0.0);
            out.component(1)[idx] = Complex(0.0, 0.0);
        }
    });
    return out;
}

/// Complementary projector Q_N = I - P_N.
inline SpectralField high_pass(const SpectralField& u, WavenumberBall ball) {
    SpectralField out = u;
    out.for_each_mode([&](int kx, int ky, std::size_t idx) {
        if (ball.contains(kx, ky)) {
            out.component(0)[idx] = Complex(0.0, 0.0);
            out.component(1)[idx] = Complex(0.0, 0.0);
        }
    });
    return out;
}

/// Fractional Stokes power: mode n is scaled by |n|^(2s). The input must be
/// mean-free, which makes negative powers well defined.
inline SpectralField stokes_pow(const SpectralField& u, double half_exponent) {
    SpectralField out = u;
    if (half_exponent == 0.0) return out;
    out.for_each_mode([&](int kx, int ky, std::size_t idx) {
        const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
        if (k2 == 0.0) return;
        const double scale = std::pow(k2, half_exponent);
        out.component(0)[idx] *= scale;
        out.component(1)[idx] *= scale;
    });
    out.zero_mean();
    return out;
}

/// Real L^2 pairing <f,g> = sum over modes of f.conj(g), via Parseval on
/// [0,2pi]^2 (factor (2pi)^2).
inline double inner_product(const SpectralField& f, const SpectralField& g) {
    if (f.grid() != g.grid())
        throw std::invalid_argument("inner_product: grid mismatch");
    double acc = 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto& a = f.component(c);
        const auto& b = g.component(c);
        for (std::size_t i = 0; i < a.size(); ++i)
            acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    }
    return acc * (2.0 * M_PI) * (2.0 * M_PI);
}

/// ||A^(s/2) u||_{L^2}. Order 0 is the L^2 norm, 1 the H^1 seminorm, etc.
inline double sobolev_norm(const SpectralField& u, double order = 0.0) {
    double acc = 0.0;
    u.for_each_mode([&](int kx, int ky, std::size_t idx) {
        const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
        if (k2 == 0.0 && order != 0.0) return;
        const double w = (order == 0.0) ? 1.0 : std::pow(k2, order);
        acc += w * (std::norm(u.component(0)[idx]) + std::norm(u.component(1)[idx]));
    });
    return std::sqrt(acc) * 2.0 * M_PI;
}

inline double l2_norm(const SpectralField& u) { return sobolev_norm(u, 0.0); }
inline double h1_norm(const SpectralField& u) { return sobolev_norm(u, 1.0); }

/// Spectral partial derivative along the given axis (0 = x, 1 = y).
inline SpectralField derivative(const SpectralField& u, int axis) {
    SpectralField out = u;
    out.for_each_mode([&](int kx, int ky, std::size_t idx) {
        const double k = (axis == 0) ? kx : ky;
        const Complex ik(0.0, k);
        out.component(0)[idx] *= ik;
        out.component(1)[idx] *= ik;
    });
    return out;
}

/// Advection term B(u,v) = P (u . grad) v, computed pseudo-spectrally with
/// two-thirds dealiasing, then Leray projection; the mean mode is zeroed.
inline SpectralField bilinear(const SpectralField& u, const SpectralField& v) {
    if (u.grid() != v.grid())
        throw std::invalid_argument("bilinear: grid mismatch");
    const SpectralGrid& grid = u.grid();
    const std::size_t n = static_cast<std::size_t>(grid.size());

    const std::vector<Complex> u1 = u.to_physical(0);
    const std::vector<Complex> u2 = u.to_physical(1);
    const SpectralField vx = derivative(v, 0);
    const SpectralField vy = derivative(v, 1);

    SpectralField out(grid);
    for (int c = 0; c < 2; ++c) {
        const std::vector<Complex> dx = vx.to_physical(c);
        const std::vector<Complex> dy = vy.to_physical(c);
        std::vector<Complex> prod(n);
        for (std::size_t i = 0; i < n; ++i)
            prod[i] = u1[i].real() * dx[i].real() + u2[i].real() * dy[i].real();
        out.from_physical(c, std::move(prod));
    }
    out.dealias();
    out = leray_project(out);
    return out;
}

/// Deterministic random mean-free solenoidal field supported in the
/// dealiased band, with shell energy decaying like 1/(1+|n|^2).
inline SpectralField random_solenoidal(const SpectralGrid& grid, std::uint64_t seed,
                                       double amplitude = 1.0, int max_shell = 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int K = (max_shell > 0) ? max_shell : grid.dealias_cutoff;
    SpectralField out(grid);
    for (int ky = -K; ky <= K; ++ky) {
        for (int kx = -K; kx <= K; ++kx) {
            if (kx == 0 && ky == 0) continue;
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
            if (k2 > static_cast<double>(K) * K) continue;
            // fill each conjugate pair once
            if (ky < 0 || (ky == 0 && kx < 0)) continue;
            const Complex z(gauss(rng), gauss(rng));
            // divergence-free direction (-ky, kx)/|k|
            const double inv = 1.0 / std::sqrt(k2);
            const double mag = amplitude / (1.0 + k2);
            out.set_mode(0, kx, ky, mag * z * (-ky * inv));
            out.set_mode(1, kx, ky, mag * z * (kx * inv));
        }
    }
    out.dealias();
    return out;
}

/// Max pointwise speed on the physical grid (CFL diagnostic).
inline double max_physical_speed(const SpectralField& u) {
    const std::vector<Complex> u1 = u.to_physical(0);
    const std::vector<Complex> u2 = u.to_physical(1);
    double best = 0.0;
    for (std::size_t i = 0; i < u1.size(); ++i) {
        const double s = std::hypot(u1[i].real(), u2[i].real());
        if (s > best) best = s;
    }
    return best;
}

}  // namespace nsforce
