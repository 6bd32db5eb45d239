#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nsforce/forcing.hpp"
#include "nsforce/integrate.hpp"
#include "nsforce/operators.hpp"

namespace nsforce {

/// A-priori quantities the convergence statements are phrased in.
struct AprioriReport {
    double grashof = 0.0;       ///< G = sup_t ||f|| / nu^2  (kappa0 = 1)
    double shape_factor = 1.0;  ///< sigma_1 = sup ||A^{1/2} f|| / sup ||f||, >= 1
    double R1 = 0.0;            ///< H^1 absorbing radius, R1 = nu G
    double R2 = 0.0;            ///< H^2 absorbing radius, R2 = c2 nu (G + sigma_1) G

    struct Sample {
        double t = 0.0;
        double energy = 0.0;        ///< 0.5 ||u||^2
        double enstrophy = 0.0;     ///< ||A^{1/2} u||^2
        double palenstrophy = 0.0;  ///< ||A u||^2
        bool envelope_violated = false;
        double balance_residual = 0.0;
    };
    std::vector<Sample> samples;
    double max_balance_residual = 0.0;
    int envelope_violations = 0;
};

/// Uniform sample times over a window.
struct TimeWindow {
    double t_begin = 0.0;
    double t_end = 0.0;
    int samples = 64;

    void validate() const {
        if (!(t_end >= t_begin) || samples < 1)
            throw std::invalid_argument("TimeWindow: empty or invalid window");
    }
};

/// Grashof-type number sup_t ||f(t)|| / (kappa0^2 nu^2), the sup taken over
/// the window's sample times.
inline double grashof(const ForcingSpec& f, double nu, const TimeWindow& window,
                      const SpectralGrid& grid) {
    window.validate();
    double sup = 0.0;
    for (int i = 0; i < window.samples; ++i) {
        const double t = window.t_begin
            + (window.samples > 1 ? (window.t_end - window.t_begin) * i / (window.samples - 1) : 0.0);
        sup = std::max(sup, l2_norm(f.evaluate(t, grid)));
    }
    return sup / (nu * nu);
}

/// Shape factor sup_t ||A^{1/2} f|| / sup_t ||f||; errors on a zero force.
inline double shape_factor(const ForcingSpec& f, const TimeWindow& window,
                           const SpectralGrid& grid) {
    window.validate();
    double sup_l2 = 0.0, sup_h1 = 0.0;
    for (int i = 0; i < window.samples; ++i) {
        const double t = window.t_begin
            + (window.samples > 1 ? (window.t_end - window.t_begin) * i / (window.samples - 1) : 0.0);
        const SpectralField field = f.evaluate(t, grid);
        sup_l2 = std::max(sup_l2, l2_norm(field));
        sup_h1 = std::max(sup_h1, h1_norm(field));
    }
    if (sup_l2 == 0.0)
        throw std::invalid_argument("shape_factor: undefined for a zero force");
    return sup_h1 / sup_l2;
}

/// Absorbing-ball radii. c2 defaults to 12 * c_L with the interpolation
/// constant c_L taken as 1; it is exposed because the paper-level constant
/// is not known numerically.
inline void absorbing_radii(double G, double sigma1, double nu, AprioriReport& report,
                            double c2 = 12.0) {
    report.grashof = G;
    report.shape_factor = sigma1;
    report.R1 = nu * G;
    report.R2 = c2 * nu * (G + sigma1) * G;
}

/// Per-sample energy/enstrophy/palenstrophy plus two monitors: the enstrophy
/// envelope ||A^{1/2}u(t)||^2 <= ||A^{1/2}u(t0)||^2 e^{-nu(t-t0)}
/// + 2 nu^2 G^2 (1 - e^{-nu(t-t0)}) and the discrete energy-balance residual
///   d(0.5||u||^2) + nu ||A^{1/2}u||^2 dt - <f,u> dt = O(dt^2)
/// per sample interval (trapezoidal in the dissipation and injection terms).
inline AprioriReport balance_report(const std::vector<FlowState>& trajectory,
                                    const ForcingSpec& f, double nu,
                                    double envelope_rel_tol = 1e-9) {
    AprioriReport report;
    if (trajectory.empty()) return report;

    const SpectralGrid& grid = trajectory.front().velocity.grid();
    TimeWindow window{trajectory.front().time, trajectory.back().time,
                      static_cast<int>(trajectory.size())};
    const double G = grashof(f, nu, window, grid);
    report.grashof = G;

    const double t0 = trajectory.front().time;
    const double ens0 = std::pow(h1_norm(trajectory.front().velocity), 2);

    double prev_energy = 0.0, prev_ens = 0.0, prev_inject = 0.0, prev_t = t0;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const FlowState& state = trajectory[i];
        AprioriReport::Sample s;
        s.t = state.time;
        const double l2 = l2_norm(state.velocity);
        s.energy = 0.5 * l2 * l2;
        s.enstrophy = std::pow(h1_norm(state.velocity), 2);
        s.palenstrophy = std::pow(sobolev_norm(state.velocity, 2.0), 2);

        const double decay = std::exp(-nu * (state.time - t0));
        const double envelope = ens0 * decay + 2.0 * nu * nu * G * G * (1.0 - decay);
        s.envelope_violated = s.enstrophy > envelope * (1.0 + envelope_rel_tol) + envelope_rel_tol;
        if (s.envelope_violated) ++report.envelope_violations;

        const double inject = inner_product(f.evaluate(state.time, grid), state.velocity);
        if (i > 0) {
            const double dt = state.time - prev_t;
            s.balance_residual = std::abs((s.energy - prev_energy)
                                          + nu * 0.5 * (s.enstrophy + prev_ens) * dt
                                          - 0.5 * (inject + prev_inject) * dt);
            report.max_balance_residual = std::max(report.max_balance_residual, s.balance_residual);
        }
        prev_energy = s.energy;
        prev_ens = s.enstrophy;
        prev_inject = inject;
        prev_t = state.time;
        report.samples.push_back(s);
    }
    return report;
}

}  // namespace nsforce
