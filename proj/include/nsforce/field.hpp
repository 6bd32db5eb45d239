#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "nsforce/fft.hpp"
#include "nsforce/grid.hpp"

namespace nsforce {

using Complex = std::complex<double>;

/// Mean-free periodic vector field stored as Fourier coefficients.
///
/// Layout: per component, M*M coefficients in FFT bin order, index
/// iy*M + ix with signed wavenumbers k = grid.wavenumber(bin). A real
/// physical field is represented by Hermitian-symmetric coefficients;
/// constructors and operators preserve that symmetry.
///
/// Fields are treated as immutable values once built: every operator in
/// operators.hpp returns a fresh field.
class SpectralField {
  public:
    SpectralField() = default;

    explicit SpectralField(const SpectralGrid& grid)
        : grid_(grid),
          coeffs_{std::vector<Complex>(static_cast<std::size_t>(grid.size())),
                  std::vector<Complex>(static_cast<std::size_t>(grid.size()))} {}

    const SpectralGrid& grid() const { return grid_; }

    Complex& at(int component, int kx, int ky) {
        return coeffs_[static_cast<std::size_t>(component)]
                      [static_cast<std::size_t>(grid_.bin(ky)) * grid_.resolution + grid_.bin(kx)];
    }
    const Complex& at(int component, int kx, int ky) const {
        return coeffs_[static_cast<std::size_t>(component)]
                      [static_cast<std::size_t>(grid_.bin(ky)) * grid_.resolution + grid_.bin(kx)];
    }

    std::vector<Complex>& component(int c) { return coeffs_[static_cast<std::size_t>(c)]; }
    const std::vector<Complex>& component(int c) const { return coeffs_[static_cast<std::size_t>(c)]; }

    /// Set a single mode together with its Hermitian partner.
    void set_mode(int component, int kx, int ky, Complex value) {
        at(component, kx, ky) = value;
        if (!is_self_conjugate(kx, ky)) at(component, -kx, -ky) = std::conj(value);
    }

    /// Visit every retained mode: fn(kx, ky, index into component arrays).
    template <typename Fn>
    void for_each_mode(Fn&& fn) const {
        const int M = grid_.resolution;
        for (int iy = 0; iy < M; ++iy) {
            const int ky = grid_.wavenumber(iy);
            for (int ix = 0; ix < M; ++ix) {
                const int kx = grid_.wavenumber(ix);
                fn(kx, ky, static_cast<std::size_t>(iy) * M + ix);
            }
        }
    }

    void zero_mean() {
        coeffs_[0][0] = Complex(0.0, 0.0);
        coeffs_[1][0] = Complex(0.0, 0.0);
    }

    /// Zero all modes with |k|_inf beyond the dealiased band.
    void dealias() {
        const int Kd = grid_.dealias_cutoff;
        for_each_mode([&](int kx, int ky, std::size_t idx) {
            if (std::abs(kx) > Kd || std::abs(ky) > Kd) {
                coeffs_[0][idx] = Complex(0.0, 0.0);
                coeffs_[1][idx] = Complex(0.0, 0.0);
            }
        });
    }

    bool is_finite() const {
        for (int c = 0; c < 2; ++c)
            for (const Complex& z : coeffs_[static_cast<std::size_t>(c)])
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    bool operator==(const SpectralField& o) const {
        return grid_ == o.grid_ && coeffs_ == o.coeffs_;
    }
    bool operator!=(const SpectralField& o) const { return !(*this == o); }

    SpectralField& operator+=(const SpectralField& o) {
        for (int c = 0; c < 2; ++c)
            for (std::size_t i = 0; i < coeffs_[static_cast<std::size_t>(c)].size(); ++i)
                coeffs_[static_cast<std::size_t>(c)][i] += o.coeffs_[static_cast<std::size_t>(c)][i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        for (int c = 0; c < 2; ++c)
            for (std::size_t i = 0; i < coeffs_[static_cast<std::size_t>(c)].size(); ++i)
                coeffs_[static_cast<std::size_t>(c)][i] -= o.coeffs_[static_cast<std::size_t>(c)][i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (int c = 0; c < 2; ++c)
            for (Complex& z : coeffs_[static_cast<std::size_t>(c)]) z *= s;
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    /// Inverse-transform one component to physical space.
    std::vector<Complex> to_physical(int c) const {
        std::vector<Complex> buf = coeffs_[static_cast<std::size_t>(c)];
        fft::inverse(grid_.resolution, buf.data());
        return buf;
    }

    /// Overwrite one component from physical-space samples.
    void from_physical(int c, std::vector<Complex> buf) {
        fft::forward(grid_.resolution, buf.data());
        coeffs_[static_cast<std::size_t>(c)] = std::move(buf);
    }

  private:
    bool is_self_conjugate(int kx, int ky) const {
        const int half = grid_.resolution / 2;
        auto fixed = [&](int k) { int b = grid_.bin(k); return b == 0 || b == half; };
        return fixed(kx) && fixed(ky);
    }

    SpectralGrid grid_;
    std::array<std::vector<Complex>, 2> coeffs_;
};

}  // namespace nsforce
