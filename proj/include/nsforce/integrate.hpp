#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nsforce/field.hpp"
#include "nsforce/forcing.hpp"
#include "nsforce/operators.hpp"

namespace nsforce {

/// Thrown when a trajectory produces non-finite coefficients.
class BlowupError : public std::runtime_error {
  public:
    BlowupError(double t)
        : std::runtime_error(message(t)), time(t) {}
    double time;

  private:
    static std::string message(double t) {
        std::ostringstream os;
        os << "numerical blow-up: non-finite coefficients at t = " << t;
        return os.str();
    }
};

struct FlowState {
    SpectralField velocity;
    double time = 0.0;
};

struct IntegratorConfig {
    double dt = 1e-3;
    double nu = 0.1;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("IntegratorConfig: dt must be positive");
        if (!(nu > 0.0)) throw std::invalid_argument("IntegratorConfig: nu must be positive");
    }

    /// Advective CFL number; > 0.5 is flagged by callers as a warning.
    double cfl(const SpectralField& u) const {
        const int M = u.grid().resolution;
        return dt * max_physical_speed(u) * M / (2.0 * M_PI);
    }
};

namespace detail {

// One integrating-factor Heun step of
//   dv/dt = -lambda_n v + s + F(v, t),
// where lambda_n = nu |n|^2 + mu 1_{|n|<=N} is handled exactly per mode, the
// step-constant source s (the observation term mu P_N u, held over the step)
// enters through its exact Duhamel integral s (1 - e^{-lambda dt})/lambda,
// and F collects the advection term and the force. The stiff relaxation
// imposes no step-size restriction; only the advective CFL remains.
template <typename Rhs>
SpectralField if_heun_step(const SpectralField& v, double t, double dt, double nu,
                           double mu, const WavenumberBall* ball,
                           const SpectralField* source, Rhs&& rhs) {
    auto lambda_at = [&](int kx, int ky) {
        const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
        double lambda = nu * k2;
        if (ball && ball->contains(kx, ky)) lambda += mu;
        return lambda;
    };
    auto decay = [&](SpectralField f) {
        f.for_each_mode([&](int kx, int ky, std::size_t idx) {
            const double e = std::exp(-lambda_at(kx, ky) * dt);
            f.component(0)[idx] *= e;
            f.component(1)[idx] *= e;
        });
        return f;
    };

    SpectralField duhamel(v.grid());
    if (source) {
        duhamel = *source;
        duhamel.for_each_mode([&](int kx, int ky, std::size_t idx) {
            const double lambda = lambda_at(kx, ky);
            const double w = (lambda == 0.0) ? dt : -std::expm1(-lambda * dt) / lambda;
            duhamel.component(0)[idx] *= w;
            duhamel.component(1)[idx] *= w;
        });
    }

    const SpectralField k1 = rhs(v, t);
    SpectralField predictor = decay(v + dt * k1);
    if (source) predictor += duhamel;
    const SpectralField k2 = rhs(predictor, t + dt);

    SpectralField out = decay(v + (0.5 * dt) * k1);
    out += (0.5 * dt) * k2;
    if (source) out += duhamel;
    out.zero_mean();
    return out;
}

}  // namespace detail

/// Advance the dealiased Galerkin truncation of the 2D NSE,
///   du/dt + nu A u + B(u,u) = P f,
/// by one step. A static force enters through its exact Duhamel integral, so
/// steady solutions are fixed points of the discrete map up to rounding;
/// time-dependent forces stay in the explicit Heun part.
inline FlowState nse_step(const FlowState& state, const ForcingSpec& f,
                          const IntegratorConfig& cfg) {
    cfg.validate();
    const bool static_force = f.kind() == ForcingSpec::Kind::Static;
    auto rhs = [&](const SpectralField& v, double t) {
        SpectralField r(v.grid());
        if (!static_force && !f.is_zero()) r = leray_project(f.evaluate(t, v.grid()));
        r -= bilinear(v, v);
        r.dealias();
        return r;
    };
    FlowState next;
    if (static_force) {
        const SpectralField source = leray_project(f.evaluate(state.time, state.velocity.grid()));
        next.velocity = detail::if_heun_step(state.velocity, state.time, cfg.dt, cfg.nu,
                                             0.0, nullptr, &source, rhs);
    } else {
        next.velocity = detail::if_heun_step(state.velocity, state.time, cfg.dt, cfg.nu,
                                             0.0, nullptr, nullptr, rhs);
    }
    next.time = state.time + cfg.dt;
    if (!next.velocity.is_finite()) throw BlowupError(next.time);
    return next;
}

/// Advance the nudged system
///   dv/dt + nu A v + B(v,v) = h - mu P_N (v - u),
/// with obs = P_N u held fixed over the step. The diagonal linear part
/// nu|n|^2 + mu 1_{|n|<=N} is treated exactly, and the held source mu obs
/// through its exact Duhamel integral, so the relaxation toward the
/// observations carries no mu dt stiffness error.
inline FlowState nudged_step(const FlowState& state, const SpectralField& obs,
                             const ForcingSpec& h, double mu, WavenumberBall ball,
                             const IntegratorConfig& cfg) {
    cfg.validate();
    if (mu < 0.0) throw std::invalid_argument("nudged_step: mu must be nonnegative");
    if (l2_norm(high_pass(obs, ball)) > 0.0)
        throw std::invalid_argument("nudged_step: observation has energy outside the ball |n| <= N");
    if (mu == 0.0) return nse_step(state, h, cfg);

    const bool static_force = h.kind() == ForcingSpec::Kind::Static;
    auto rhs = [&](const SpectralField& v, double t) {
        SpectralField r(v.grid());
        if (!static_force && !h.is_zero()) r = leray_project(h.evaluate(t, v.grid()));
        r -= bilinear(v, v);
        r.dealias();
        return r;
    };
    SpectralField source = mu * obs;
    if (static_force)
        source += leray_project(h.evaluate(state.time, state.velocity.grid()));
    FlowState next;
    next.velocity = detail::if_heun_step(state.velocity, state.time, cfg.dt, cfg.nu,
                                         mu, &ball, &source, rhs);
    next.time = state.time + cfg.dt;
    if (!next.velocity.is_finite()) throw BlowupError(next.time);
    return next;
}

}  // namespace nsforce
