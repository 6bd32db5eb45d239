#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsforce/diagnostics.hpp"
#include "nsforce/integrate.hpp"
#include "nsforce/observations.hpp"
#include "nsforce/operators.hpp"
#include "nsforce/snapshot.hpp"

namespace nsforce {

class RecoveryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Universal constants of the convergence statements. The paper-level values
/// are unknowable; these defaults were fitted once on the reference twin
/// experiment and are exposed through the experiment config.
struct Calibration {
    double c0 = 0.5;        ///< N-threshold constant
    double c1 = 1.0;        ///< upper mu bound, mu <= c1 nu N^2
    double C0 = 0.3;        ///< Reynolds-stress estimate constant
    double C1 = 0.5;        ///< sensitivity estimate constant
    double c_lower0 = 1.0;  ///< sensitivity condition, lower
    double c_upper0 = 1.0;  ///< sensitivity condition, upper
    double guard_c = 1.0;   ///< well-posedness guard, mu <= guard_c nu N^2
    double c2 = 12.0;       ///< H^2 absorbing-radius constant
};

struct ParameterSelection {
    int N_min = 1;
    int N_use = 1;
    double mu_lo = 0.0;  ///< exclusive lower bound
    double mu_hi = 0.0;  ///< inclusive upper bound
    bool feasible = false;
    std::string binding;  ///< which inequality binds the lower end
};

/// Smallest admissible observation cutoff and the admissible mu interval:
/// N must satisfy beta^2 N^2 > (c0/c1) (sigma1 + G) G^2, and mu must lie in
///   ( max of the three lower bounds , c1 nu N^2 ],
/// the lower bounds coming from the N-threshold, the sensitivity condition,
/// and the contraction requirement (which involves gamma0).
inline ParameterSelection select_parameters(double G, double sigma1, double beta, double nu,
                                            const Calibration& calib, double gamma0 = 1.0,
                                            int requested_N = 0, int dealias_cutoff = 0) {
    if (!(beta > 0.0 && beta < 1.0))
        throw RecoveryError("select_parameters: beta must lie in (0,1)");
    if (G < 0.0 || sigma1 < 0.0 || !(nu > 0.0))
        throw RecoveryError("select_parameters: inputs must be nonnegative, nu positive");

    ParameterSelection sel;
    const double threshold = (calib.c0 / calib.c1) * (sigma1 + G) * G * G / (beta * beta);
    sel.N_min = 1;
    while (static_cast<double>(sel.N_min) * sel.N_min <= threshold) ++sel.N_min;
    if (dealias_cutoff > 0 && sel.N_min > dealias_cutoff) {
        std::ostringstream os;
        os << "select_parameters: required cutoff N_min = " << sel.N_min
           << " exceeds the dealiased band K_d = " << dealias_cutoff
           << "; raise the resolution M";
        throw RecoveryError(os.str());
    }
    sel.N_use = std::max(sel.N_min, requested_N);

    const double lo_threshold = calib.c0 * (sigma1 + G) * G * G * nu / (beta * beta);
    const double lo_sensitivity = calib.c_lower0 * (sigma1 + G) * G * G * nu;
    const double lo_contraction = 2.0 * calib.C1 * calib.C0 * calib.C0
        * std::pow(std::sqrt(sigma1 + G) + std::sqrt(2.0 * calib.C1 / calib.c_lower0) * gamma0, 2)
        * G * nu / (beta * beta);
    sel.mu_lo = std::max({lo_threshold, lo_sensitivity, lo_contraction});
    sel.binding = (sel.mu_lo == lo_contraction)   ? "contraction"
                  : (sel.mu_lo == lo_threshold)   ? "N-threshold"
                                                  : "sensitivity";
    sel.mu_hi = calib.c1 * nu * static_cast<double>(sel.N_use) * sel.N_use;
    sel.feasible = sel.mu_lo < sel.mu_hi || G == 0.0;
    return sel;
}

struct RelaxationPeriod {
    double rho = 0.0;
    bool degenerate = false;  ///< previous model error at zero: already converged
};

/// Waiting time before the stage-n force is reconstituted:
///   rho = max(0, (1/mu) ln[ (mu/(C1 nu)) (nu w_init / g_prev)^2 ]).
/// A vanishing previous model error with nonzero initialization error has no
/// finite answer; the configured maximum horizon is returned flagged.
inline RelaxationPeriod relaxation_period(double mu, double nu, double w_init_h1,
                                          double g_prev_sup, double C1,
                                          double max_horizon = 10.0) {
    if (!(mu > 0.0) || !(nu > 0.0) || !(C1 > 0.0))
        throw RecoveryError("relaxation_period: mu, nu, C1 must be positive");
    if (w_init_h1 < 0.0 || g_prev_sup < 0.0)
        throw RecoveryError("relaxation_period: norms must be nonnegative");
    if (g_prev_sup == 0.0) {
        if (w_init_h1 == 0.0) return {0.0, false};
        return {max_horizon, true};
    }
    const double arg = (mu / (C1 * nu)) * std::pow(nu * w_init_h1 / g_prev_sup, 2);
    if (arg <= 1.0) return {0.0, false};
    return {std::log(arg) / mu, false};
}

/// Full truth trajectory plus the true force; available only in twin
/// experiments, and consumed exclusively by diagnostics.
struct TruthOracle {
    std::vector<FlowState> states;  ///< on the observation clock
    ForcingSpec force;

    const FlowState& at_time(double t) const {
        if (states.empty()) throw RecoveryError("TruthOracle: no states");
        const double dt = states.size() > 1 ? states[1].time - states[0].time : 1.0;
        const double raw = (t - states.front().time) / dt;
        const std::size_t k = static_cast<std::size_t>(
            std::clamp(std::llround(raw), 0ll, static_cast<long long>(states.size() - 1)));
        return states[k];
    }

    /// Exact d/dt P_N u from the truth right-hand side, P_N(f - nu A u - B(u,u)).
    SpectralField ddt_low_modes(double t, WavenumberBall ball) const {
        const FlowState& s = at_time(t);
        SpectralField rhs = leray_project(force.evaluate(s.time, s.velocity.grid()));
        rhs -= nu_ * stokes_pow(s.velocity, 1.0);
        rhs -= bilinear(s.velocity, s.velocity);
        return low_pass(rhs, ball);
    }

    double nu_ = 0.0;
};

enum class RecoveryMode { Asymptotic, TimeIndependent, Recycle };

struct StageConfig {
    double mu = 0.0;
    WavenumberBall N{1};
    double beta = 0.5;
    Calibration calib;
    double gamma0 = 1.0;       ///< assumed initial relative error (1 for f0 = 0)
    double grashof = 0.0;      ///< prior knowledge of the force size
    double sigma1 = 1.0;       ///< prior knowledge of the force shape factor
    double eval_window = 0.0;  ///< 0 -> five relaxation times 5/mu
    double max_horizon = 10.0;
    bool oracle_derivative = false;  ///< twin only: exact d/dt P_N u
    IntegratorConfig integrator;

    enum class VInit { Observation, Zero, Custom };
    VInit v_init = VInit::Observation;
    SpectralField v_custom;

    enum class F0 { Zero, LowModeReadout, Custom };
    F0 f0_policy = F0::Zero;
    ForcingSpec f0_custom;

    double eval_window_or_default() const { return eval_window > 0.0 ? eval_window : 5.0 / mu; }

    void validate(double) const {
        if (!(beta > 0.0 && beta < 1.0)) throw RecoveryError("StageConfig: beta must lie in (0,1)");
        if (!(mu > 0.0)) throw RecoveryError("StageConfig: mu must be positive");
        const double guard = calib.guard_c * integrator.nu * static_cast<double>(N.N) * N.N;
        if (mu > guard * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "StageConfig: mu = " << mu << " violates the well-posedness guard mu <= "
               << calib.guard_c << " * nu * N^2 = " << guard;
            throw RecoveryError(os.str());
        }
    }
};

struct StageRecord {
    int n = 0;
    double t_begin = 0.0;
    double rho = 0.0;
    double t_eval = 0.0;
    ForcingSpec force;            ///< f_n, band-limited to N exactly
    double sync_error_h1 = -1.0;  ///< ||A^{1/2} w_n|| at t_eval (twin only)
    double model_error_l2 = -1.0; ///< sup ||f_n - f|| over the eval window (twin only)
    double reynolds_residual = -1.0;  ///< identity defect at t_eval (twin only)
    double fd_noise = -1.0;       ///< measured FD-vs-oracle derivative gap (twin only)
    bool rho_degenerate = false;
};

struct RecoveryTrace {
    std::vector<StageRecord> stages;
    std::vector<double> measured_ratios;   ///< beta_n = err_n / err_{n-1} (twin only)
    std::vector<bool> ratio_at_floor;      ///< ratio dominated by the FD noise floor
    RecoveryMode mode = RecoveryMode::Asymptotic;
    double gamma0 = 1.0;
    double initial_error = -1.0;  ///< sup ||f_0 - f|| (twin only)
    std::string failure;          ///< nonempty if a stage failed; earlier stages kept
};

/// Reynolds-stress identity defect at stage n:
///   R_N = B_N(Q_N w, Q_N w) + P_N[B(u, Q_N w) + B(Q_N w, u)],  w = v_n - u,
/// returned as || R_N - g_n ||_{L^2} for the supplied model error g_n.
inline double reynolds_residual(const FlowState& u_truth, const FlowState& v_n,
                                const SpectralField& f_n_minus_f, WavenumberBall ball) {
    if (u_truth.velocity.grid() != v_n.velocity.grid())
        throw RecoveryError("reynolds_residual: grid mismatch");
    const SpectralField w = v_n.velocity - u_truth.velocity;
    const SpectralField qw = high_pass(w, ball);
    SpectralField stress = bilinear(qw, qw);
    stress += bilinear(u_truth.velocity, qw);
    stress += bilinear(qw, u_truth.velocity);
    stress = low_pass(stress, ball);
    return l2_norm(stress - f_n_minus_f);
}

/// Naive first force guess read off the observations alone:
///   f_0(t_k) = d/dt P_N u + nu A P_N u + P_N B(P_N u, P_N u)
/// at every interior frame.
inline ForcingSpec initial_force_readout(const ObservationSeries& obs, double nu,
                                         WavenumberBall ball) {
    if (obs.size() < 3)
        throw RecoveryError("initial_force_readout: need at least 3 frames");
    std::vector<double> times;
    std::vector<SpectralField> frames;
    for (std::size_t k = 1; k + 1 < obs.size(); ++k) {
        SpectralField f = observed_time_derivative(obs, k);
        f += nu * stokes_pow(obs.frame(k), 1.0);
        f += low_pass(bilinear(obs.frame(k), obs.frame(k)), ball);
        times.push_back(obs.frame_time(k));
        frames.push_back(std::move(f));
    }
    ForcingSpec spec = ForcingSpec::sampled(std::move(times), std::move(frames));
    spec.set_band_limit(ball);
    return spec;
}

/// sup_t ||f_n(t) - f(t)|| over the window, and its ratio to sup ||f||.
inline std::pair<double, double> model_error(const ForcingSpec& f_n, const ForcingSpec& f_true,
                                             const TimeWindow& window, const SpectralGrid& grid) {
    window.validate();
    double sup_err = 0.0, sup_f = 0.0;
    for (int i = 0; i < window.samples; ++i) {
        const double t = window.t_begin
            + (window.samples > 1 ? (window.t_end - window.t_begin) * i / (window.samples - 1) : 0.0);
        const SpectralField truth = f_true.evaluate(t, grid);
        sup_err = std::max(sup_err, l2_norm(f_n.evaluate(t, grid) - truth));
        sup_f = std::max(sup_f, l2_norm(truth));
    }
    if (sup_f == 0.0)
        throw RecoveryError("model_error: relative error undefined for zero true force");
    return {sup_err, sup_err / sup_f};
}

namespace detail {

inline int steps_per_frame(const ObservationSeries& obs, const IntegratorConfig& cfg) {
    const double ratio = obs.sample_interval() / cfg.dt;
    const int n = static_cast<int>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - n) > 1e-6)
        throw RecoveryError("run_stage: observation interval must be an integer multiple of dt");
    return n;
}

}  // namespace detail

/// One stage of the reconstruction: integrate the nudged system from
/// t_begin with the previous force guess, form u_n = P_N u + Q_N v_n, and
/// after the relaxation period reconstitute
///   f_n(t) = d/dt P_N u + nu A P_N u + P_N B(u_n, u_n)
/// at every observation frame in [t_begin + rho, emit_until]. The returned
/// force is band-limited to N exactly by construction.
inline StageRecord run_stage(const ForcingSpec& f_prev, const ObservationSeries& obs,
                             const StageConfig& cfg, double t_begin, double rho,
                             double emit_until, const TruthOracle* truth = nullptr) {
    cfg.validate(cfg.integrator.nu);
    if (obs.ball().N != cfg.N.N)
        throw RecoveryError("run_stage: observation cutoff disagrees with the stage cutoff");
    if (!obs.covers(t_begin, emit_until + obs.sample_interval()))
        throw RecoveryError("run_stage: observation window too short for the requested stage");

    const SpectralGrid grid = obs.frame(0).grid();
    const int spf = detail::steps_per_frame(obs, cfg.integrator);
    const std::size_t k_begin = obs.index_at(t_begin);
    const double t_eval = t_begin + rho;

    StageRecord record;
    record.t_begin = t_begin;
    record.rho = rho;
    record.t_eval = t_eval;

    FlowState v;
    v.time = obs.frame_time(k_begin);
    switch (cfg.v_init) {
        case StageConfig::VInit::Observation: v.velocity = obs.frame(k_begin); break;
        case StageConfig::VInit::Zero: v.velocity = SpectralField(grid); break;
        case StageConfig::VInit::Custom: v.velocity = cfg.v_custom; break;
    }

    std::vector<double> force_times;
    std::vector<SpectralField> force_frames;
    double sup_err = 0.0, sup_fd_noise = 0.0;
    bool have_err = false;
    const double w_eval_end = t_eval + cfg.eval_window_or_default();
    std::optional<FlowState> v_at_eval;

    const std::size_t k_end = obs.index_at(emit_until);
    for (std::size_t k = k_begin; k <= k_end; ++k) {
        const double t_frame = obs.frame_time(k);

        // reconstitute the force once the relaxation period has passed
        if (t_frame >= t_eval - 1e-9 && k > 0 && k + 1 < obs.size()) {
            SpectralField u_n = obs.frame(k) + high_pass(v.velocity, cfg.N);
            SpectralField ddt = cfg.oracle_derivative && truth
                ? truth->ddt_low_modes(t_frame, cfg.N)
                : observed_time_derivative(obs, k);
            SpectralField f_n = ddt;
            f_n += cfg.integrator.nu * stokes_pow(obs.frame(k), 1.0);
            f_n += low_pass(bilinear(u_n, u_n), cfg.N);

            if (truth) {
                const SpectralField f_true = truth->force.evaluate(t_frame, grid);
                if (t_frame <= w_eval_end + 1e-9) {
                    sup_err = std::max(sup_err, l2_norm(f_n - f_true));
                    have_err = true;
                    // FD-vs-exact derivative gap: the observation noise floor
                    const SpectralField gap =
                        observed_time_derivative(obs, k) - truth->ddt_low_modes(t_frame, cfg.N);
                    sup_fd_noise = std::max(sup_fd_noise, l2_norm(gap));
                }
                if (!v_at_eval && t_frame >= t_eval - 1e-9) {
                    v_at_eval = v;
                    const FlowState& u = truth->at_time(t_frame);
                    record.sync_error_h1 = h1_norm(v.velocity - u.velocity);
                    record.reynolds_residual =
                        reynolds_residual(u, v, f_n - f_true, cfg.N);
                }
            }
            force_times.push_back(t_frame);
            force_frames.push_back(std::move(f_n));
        }

        if (k == k_end) break;
        for (int s = 0; s < spf; ++s)
            v = nudged_step(v, obs.frame(k), f_prev, cfg.mu, cfg.N, cfg.integrator);
    }

    if (force_frames.empty())
        throw RecoveryError("run_stage: no interior frames available after the relaxation period");
    record.force = ForcingSpec::sampled(std::move(force_times), std::move(force_frames));
    record.force.set_band_limit(cfg.N);
    if (have_err) {
        record.model_error_l2 = sup_err;
        record.fd_noise = sup_fd_noise;
    }
    return record;
}

/// A-priori stage schedule: relaxation periods from the estimated error
/// ladder g_est_n = beta^n gamma0 nu^2 G (H^1 initialization error bounded
/// by the absorbing radius, a documented over-estimate), rounded up to the
/// observation clock, plus the per-stage integration spans.
struct StagePlan {
    std::vector<double> rho;
    std::vector<bool> degenerate;
    std::vector<double> span;  ///< stage n integrates [t_{n-1}, t_{n-1} + span_n]
    double window_needed = 0.0;  ///< observation length required past t_start
};

inline StagePlan plan_schedule(const StageConfig& cfg, int n_stages, double dt_obs,
                               RecoveryMode mode) {
    const double nu = cfg.integrator.nu;
    const double rho_floor = -std::log(cfg.beta) / cfg.mu;
    const double w_eval = cfg.eval_window_or_default();

    StagePlan plan;
    plan.rho.resize(static_cast<std::size_t>(n_stages));
    plan.degenerate.assign(static_cast<std::size_t>(n_stages), false);
    plan.span.resize(static_cast<std::size_t>(n_stages));

    double g_est = cfg.gamma0 * nu * nu * cfg.grashof;
    const double w_init_bound = std::sqrt(2.0) * nu * cfg.grashof;
    for (int n = 0; n < n_stages; ++n) {
        RelaxationPeriod rp = (g_est > 0.0 || w_init_bound == 0.0)
            ? relaxation_period(cfg.mu, nu, w_init_bound, g_est, cfg.calib.C1, cfg.max_horizon)
            : RelaxationPeriod{cfg.max_horizon, true};
        plan.rho[static_cast<std::size_t>(n)] = std::max(rp.rho, rho_floor);
        plan.degenerate[static_cast<std::size_t>(n)] = rp.degenerate;
        g_est *= cfg.beta;
    }
    for (double& r : plan.rho) r = dt_obs * std::ceil(r / dt_obs - 1e-9);

    // stage n must emit its force over stage n+1's whole window
    for (int n = n_stages - 1; n >= 0; --n) {
        const double tail =
            (n + 1 < n_stages) ? plan.span[static_cast<std::size_t>(n + 1)] : w_eval;
        plan.span[static_cast<std::size_t>(n)] = plan.rho[static_cast<std::size_t>(n)]
            + ((mode == RecoveryMode::Asymptotic) ? tail : w_eval);
    }
    plan.window_needed = (mode == RecoveryMode::Recycle)
        ? *std::max_element(plan.rho.begin(), plan.rho.end()) + w_eval + 2.0 * dt_obs
        : plan.span[0] + 2.0 * dt_obs;
    return plan;
}

/// Drive the staged algorithm. In asymptotic mode each stage consumes fresh
/// observation times; in time-independent mode the stage force is the single
/// frame at t_n; in recycle mode every stage restarts on the same window and
/// the stage force is the frame at t_0 + rho_n.
inline RecoveryTrace run_recovery(const ObservationSeries& obs, const TruthOracle* truth,
                                  StageConfig cfg, RecoveryMode mode, int n_stages) {
    cfg.validate(cfg.integrator.nu);
    if (n_stages < 1) throw RecoveryError("run_recovery: need at least one stage");
    const SpectralGrid grid = obs.frame(0).grid();
    if (cfg.N.N > grid.dealias_cutoff)
        throw RecoveryError("run_recovery: observation cutoff exceeds the dealiased band");

    RecoveryTrace trace;
    trace.mode = mode;
    trace.gamma0 = cfg.gamma0;

    // initial force guess
    ForcingSpec f_prev;
    switch (cfg.f0_policy) {
        case StageConfig::F0::Zero: f_prev = ForcingSpec::zero(); break;
        case StageConfig::F0::LowModeReadout:
            f_prev = initial_force_readout(obs, cfg.integrator.nu, cfg.N);
            break;
        case StageConfig::F0::Custom: f_prev = cfg.f0_custom; break;
    }

    const double w_eval = cfg.eval_window_or_default();
    const double dt_obs = obs.sample_interval();
    const StagePlan plan = plan_schedule(cfg, n_stages, dt_obs, mode);
    const std::vector<double>& rho = plan.rho;
    const std::vector<bool>& rho_degen = plan.degenerate;
    const std::vector<double>& span = plan.span;

    const double t0 = obs.t_start();
    if (obs.t_end() - t0 < plan.window_needed - 1e-9) {
        std::ostringstream os;
        os << "run_recovery: observation window ends at " << obs.t_end()
           << " but the planned stages need "
           << (mode == RecoveryMode::Recycle ? "a recycle window up to " : "") << t0
           << " + " << plan.window_needed;
        throw RecoveryError(os.str());
    }

    // initial model error (twin only)
    double prev_err = -1.0;
    if (truth) {
        TimeWindow w0{t0 + dt_obs, t0 + dt_obs + w_eval, 32};
        auto [abs0, rel0] = model_error(f_prev, truth->force, w0, grid);
        trace.initial_error = abs0;
        prev_err = abs0;
    }

    double t_begin = t0;
    for (int n = 0; n < n_stages; ++n) {
        const double stage_start = (mode == RecoveryMode::Recycle) ? t0 : t_begin;

        // twin mode: refine the a-priori relaxation period with the measured
        // initialization error and the measured previous model error; the
        // planned value stays an upper bound so the window sizing holds
        double rho_n = rho[static_cast<std::size_t>(n)];
        if (truth && prev_err > 0.0) {
            SpectralField v0;
            switch (cfg.v_init) {
                case StageConfig::VInit::Observation: v0 = obs.at_time(stage_start); break;
                case StageConfig::VInit::Zero: v0 = SpectralField(grid); break;
                case StageConfig::VInit::Custom: v0 = cfg.v_custom; break;
            }
            const double w_init = h1_norm(v0 - truth->at_time(stage_start).velocity);
            const RelaxationPeriod rp = relaxation_period(cfg.mu, cfg.integrator.nu, w_init,
                                                          prev_err, cfg.calib.C1, cfg.max_horizon);
            double rho_meas = std::max(rp.rho, -std::log(cfg.beta) / cfg.mu);
            rho_meas = dt_obs * std::ceil(rho_meas / dt_obs - 1e-9);
            rho_n = std::min(rho_n, rho_meas);
        }
        const double emit_until = stage_start + span[static_cast<std::size_t>(n)];
        StageRecord record;
        try {
            record = run_stage(f_prev, obs, cfg, stage_start, rho_n, emit_until, truth);
        } catch (const std::exception& e) {
            trace.failure = e.what();
            return trace;
        }
        record.n = n + 1;
        record.rho_degenerate = rho_degen[static_cast<std::size_t>(n)];

        // collapse to a single field when the mode calls for it
        if (mode != RecoveryMode::Asymptotic) {
            const SpectralField point = record.force.evaluate(record.t_eval, grid);
            if (truth) {
                record.model_error_l2 =
                    l2_norm(point - truth->force.evaluate(record.t_eval, grid));
            }
            record.force = ForcingSpec::static_field(point);
            record.force.set_band_limit(cfg.N);
        }

        if (truth && prev_err >= 0.0 && record.model_error_l2 >= 0.0) {
            const double floor = std::max(record.fd_noise, 0.0);
            trace.measured_ratios.push_back(prev_err > 0.0 ? record.model_error_l2 / prev_err
                                                           : std::numeric_limits<double>::infinity());
            trace.ratio_at_floor.push_back(record.model_error_l2 <= 4.0 * floor
                                           || prev_err <= 4.0 * floor);
            prev_err = record.model_error_l2;
        }

        f_prev = record.force;
        trace.stages.push_back(std::move(record));
        if (mode != RecoveryMode::Recycle) t_begin += rho_n;
    }
    return trace;
}

/// Trace CSV: stage, t_begin, rho_n, sync_h1, model_err_l2, ratio, reynolds_residual.
inline void write_trace_csv(const std::filesystem::path& path, const RecoveryTrace& trace) {
    std::ofstream out(path);
    if (!out) throw RecoveryError("trace csv: cannot open for writing: " + path.string());
    out.precision(17);
    out << "stage,t_begin,rho_n,sync_h1,model_err_l2,ratio,reynolds_residual\n";
    for (std::size_t i = 0; i < trace.stages.size(); ++i) {
        const StageRecord& s = trace.stages[i];
        out << s.n << ',' << s.t_begin << ',' << s.rho << ',' << s.sync_error_h1 << ','
            << s.model_error_l2 << ','
            << (i < trace.measured_ratios.size() ? trace.measured_ratios[i] : -1.0) << ','
            << s.reynolds_residual << "\n";
    }
}

}  // namespace nsforce
