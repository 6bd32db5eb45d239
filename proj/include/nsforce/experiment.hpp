#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsforce/diagnostics.hpp"
#include "nsforce/integrate.hpp"
#include "nsforce/observations.hpp"
#include "nsforce/recovery.hpp"
#include "nsforce/snapshot.hpp"

namespace nsforce {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Flat experiment description, serialized as `key = value` lines. Unknown
/// keys are rejected; doubles round-trip losslessly (precision 17).
struct ExperimentConfig {
    // discretization
    int M = 64;
    double nu = 0.1;
    double dt = 2e-3;

    // truth setup
    std::string force = "single_shell";  ///< single_shell|two_shell|manufactured|file|zero
    double force_amplitude = 0.0;        ///< 0: sized so the Grashof number is `grashof`
    int force_shell = 2;
    int force_shell_2 = 4;  ///< second shell of the two_shell preset
    std::string force_file;
    double grashof = 2.0;  ///< prior force size, G = sup||f|| / nu^2
    std::uint64_t seed = 1;
    double u0_amplitude = 0.05;

    // observations
    int N_obs = 12;
    double delta_t_obs = 0.0;  ///< 0: ten solver steps

    // recovery
    double mu = 0.0;  ///< 0: upper end of the admissible interval
    double beta = 0.5;
    int n_stages = 4;
    std::string mode = "asymptotic";  ///< asymptotic|time_independent|recycle
    double gamma0 = 1.0;
    double sigma1 = 0.0;  ///< 0: computed from the force preset
    double eval_window = 0.0;
    double max_horizon = 10.0;
    bool oracle_derivative = false;

    // burn-in onto the attractor
    double burn_in_min = 20.0;
    int burn_in_streak = 100;  ///< consecutive envelope-satisfying samples required
    double burn_in_max = 200.0;

    // calibration constants (see Calibration)
    double c0 = 0.5;
    double c1 = 1.0;
    double C0 = 0.3;
    double C1 = 0.5;
    double c_lower0 = 1.0;
    double c_upper0 = 1.0;
    double guard_c = 1.0;
    double c2 = 12.0;

    Calibration calibration() const {
        return Calibration{c0, c1, C0, C1, c_lower0, c_upper0, guard_c, c2};
    }

    double delta_t_obs_or_default() const { return delta_t_obs > 0.0 ? delta_t_obs : 10.0 * dt; }

    RecoveryMode recovery_mode() const {
        if (mode == "asymptotic") return RecoveryMode::Asymptotic;
        if (mode == "time_independent") return RecoveryMode::TimeIndependent;
        if (mode == "recycle") return RecoveryMode::Recycle;
        throw ConfigError("config: unknown mode '" + mode + "'");
    }

    void validate() const {
        if (M < 4 || M % 2 != 0) throw ConfigError("config: M must be even and >= 4");
        if (!(nu > 0.0)) throw ConfigError("config: nu must be positive");
        if (!(dt > 0.0)) throw ConfigError("config: dt must be positive");
        if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("config: beta must lie in (0,1)");
        if (n_stages < 1) throw ConfigError("config: n_stages must be >= 1");
        if (N_obs < 1) throw ConfigError("config: N_obs must be >= 1");
        const SpectralGrid grid(M);
        if (N_obs > grid.dealias_cutoff)
            throw ConfigError("config: N_obs exceeds the dealiased band K_d = floor(M/3)");
        const double dto = delta_t_obs_or_default();
        if (std::abs(dto / dt - std::llround(dto / dt)) > 1e-6)
            throw ConfigError("config: delta_t_obs must be an integer multiple of dt");
        recovery_mode();  // throws on a bad mode string
        if (force != "single_shell" && force != "two_shell" && force != "manufactured"
            && force != "file" && force != "zero")
            throw ConfigError("config: unknown force preset '" + force + "'");
        if (force == "file" && force_file.empty())
            throw ConfigError("config: force = file requires force_file");
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

inline void write_config(std::ostream& out, const ExperimentConfig& c) {
    auto d = detail::fmt_double;
    out << "M = " << c.M << "\n"
        << "nu = " << d(c.nu) << "\n"
        << "dt = " << d(c.dt) << "\n"
        << "force = " << c.force << "\n"
        << "force_amplitude = " << d(c.force_amplitude) << "\n"
        << "force_shell = " << c.force_shell << "\n"
        << "force_shell_2 = " << c.force_shell_2 << "\n"
        << "force_file = " << c.force_file << "\n"
        << "grashof = " << d(c.grashof) << "\n"
        << "seed = " << c.seed << "\n"
        << "u0_amplitude = " << d(c.u0_amplitude) << "\n"
        << "N_obs = " << c.N_obs << "\n"
        << "delta_t_obs = " << d(c.delta_t_obs) << "\n"
        << "mu = " << d(c.mu) << "\n"
        << "beta = " << d(c.beta) << "\n"
        << "n_stages = " << c.n_stages << "\n"
        << "mode = " << c.mode << "\n"
        << "gamma0 = " << d(c.gamma0) << "\n"
        << "sigma1 = " << d(c.sigma1) << "\n"
        << "eval_window = " << d(c.eval_window) << "\n"
        << "max_horizon = " << d(c.max_horizon) << "\n"
        << "oracle_derivative = " << (c.oracle_derivative ? 1 : 0) << "\n"
        << "burn_in_min = " << d(c.burn_in_min) << "\n"
        << "burn_in_streak = " << c.burn_in_streak << "\n"
        << "burn_in_max = " << d(c.burn_in_max) << "\n"
        << "c0 = " << d(c.c0) << "\n"
        << "c1 = " << d(c.c1) << "\n"
        << "C0 = " << d(c.C0) << "\n"
        << "C1 = " << d(c.C1) << "\n"
        << "c_lower0 = " << d(c.c_lower0) << "\n"
        << "c_upper0 = " << d(c.c_upper0) << "\n"
        << "guard_c = " << d(c.guard_c) << "\n"
        << "c2 = " << d(c.c2) << "\n";
}

inline void write_config_file(const std::filesystem::path& path, const ExperimentConfig& c) {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot open for writing: " + path.string());
    write_config(out, c);
}

inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
        };
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "M") c.M = std::stoi(val);
            else if (key == "nu") c.nu = std::stod(val);
            else if (key == "dt") c.dt = std::stod(val);
            else if (key == "force") c.force = val;
            else if (key == "force_amplitude") c.force_amplitude = std::stod(val);
            else if (key == "force_shell") c.force_shell = std::stoi(val);
            else if (key == "force_shell_2") c.force_shell_2 = std::stoi(val);
            else if (key == "force_file") c.force_file = val;
            else if (key == "grashof") c.grashof = std::stod(val);
            else if (key == "seed") c.seed = std::stoull(val);
            else if (key == "u0_amplitude") c.u0_amplitude = std::stod(val);
            else if (key == "N_obs") c.N_obs = std::stoi(val);
            else if (key == "delta_t_obs") c.delta_t_obs = std::stod(val);
            else if (key == "mu") c.mu = std::stod(val);
            else if (key == "beta") c.beta = std::stod(val);
            else if (key == "n_stages") c.n_stages = std::stoi(val);
            else if (key == "mode") c.mode = val;
            else if (key == "gamma0") c.gamma0 = std::stod(val);
            else if (key == "sigma1") c.sigma1 = std::stod(val);
            else if (key == "eval_window") c.eval_window = std::stod(val);
            else if (key == "max_horizon") c.max_horizon = std::stod(val);
            else if (key == "oracle_derivative") c.oracle_derivative = std::stoi(val) != 0;
            else if (key == "burn_in_min") c.burn_in_min = std::stod(val);
            else if (key == "burn_in_streak") c.burn_in_streak = std::stoi(val);
            else if (key == "burn_in_max") c.burn_in_max = std::stod(val);
            else if (key == "c0") c.c0 = std::stod(val);
            else if (key == "c1") c.c1 = std::stod(val);
            else if (key == "C0") c.C0 = std::stod(val);
            else if (key == "C1") c.C1 = std::stod(val);
            else if (key == "c_lower0") c.c_lower0 = std::stod(val);
            else if (key == "c_upper0") c.c_upper0 = std::stod(val);
            else if (key == "guard_c") c.guard_c = std::stod(val);
            else if (key == "c2") c.c2 = std::stod(val);
            else throw ConfigError("config: unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config: malformed value for '" + key + "'");
        }
    }
    return c;
}

inline ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open: " + path.string());
    return parse_config(in);
}

/// A Kolmogorov-type mode pair: amplitude * (sin(shell * y), 0), which is
/// solenoidal, mean-free, and supported on |n| = shell.
inline SpectralField kolmogorov_mode(const SpectralGrid& grid, int shell, double amplitude) {
    if (shell < 1 || shell > grid.dealias_cutoff)
        throw ConfigError("force preset: shell outside the dealiased band");
    SpectralField f(grid);
    f.set_mode(0, 0, shell, Complex(0.0, -0.5 * amplitude));
    return f;
}

/// Amplitude giving ||f|| = grashof * nu^2 for a single Kolmogorov mode
/// (its L^2 norm is amplitude * pi * sqrt(2)).
inline double kolmogorov_amplitude(double grashof, double nu) {
    return grashof * nu * nu / (M_PI * std::sqrt(2.0));
}

/// Build the configured static force.
inline ForcingSpec make_force(const ExperimentConfig& cfg, const SpectralGrid& grid) {
    if (cfg.force == "zero") return ForcingSpec::zero();
    if (cfg.force == "file") {
        auto [field, meta] = read_snapshot_file(cfg.force_file);
        if (static_cast<int>(meta.M) != grid.resolution)
            throw ConfigError("force file resolution disagrees with the configured grid");
        return ForcingSpec::static_field(leray_project(field));
    }
    const double a = cfg.force_amplitude > 0.0 ? cfg.force_amplitude
                                               : kolmogorov_amplitude(cfg.grashof, cfg.nu);
    if (cfg.force == "single_shell" || cfg.force == "manufactured")
        return ForcingSpec::static_field(kolmogorov_mode(grid, cfg.force_shell, a));
    // two_shell: split the amplitude so the total L^2 norm is unchanged
    SpectralField f = kolmogorov_mode(grid, cfg.force_shell, a / std::sqrt(2.0));
    f += kolmogorov_mode(grid, cfg.force_shell_2, a / std::sqrt(2.0));
    return ForcingSpec::static_field(f);
}

/// Exact steady state of the manufactured preset: u = f / (nu * shell^2)
/// (the advection term vanishes on a single Kolmogorov mode).
inline FlowState manufactured_equilibrium(const ExperimentConfig& cfg, const SpectralGrid& grid) {
    const double a = cfg.force_amplitude > 0.0 ? cfg.force_amplitude
                                               : kolmogorov_amplitude(cfg.grashof, cfg.nu);
    const double k2 = static_cast<double>(cfg.force_shell) * cfg.force_shell;
    FlowState s;
    s.velocity = kolmogorov_mode(grid, cfg.force_shell, a / (cfg.nu * k2));
    s.time = 0.0;
    return s;
}

struct BurnInResult {
    FlowState state;
    double elapsed = 0.0;
    bool converged = false;  ///< envelope streak reached before burn_in_max
};

/// Integrate the truth until its enstrophy has sat inside the absorbing
/// envelope bound 2 nu^2 G^2 for `burn_in_streak` consecutive observation
/// samples (and at least burn_in_min time units). Gives an on-attractor
/// initial condition for the twin experiments.
inline BurnInResult burn_in(FlowState state, const ForcingSpec& f, const ExperimentConfig& cfg) {
    IntegratorConfig icfg{cfg.dt, cfg.nu};
    const double dto = cfg.delta_t_obs_or_default();
    const int spf = static_cast<int>(std::llround(dto / cfg.dt));
    const double bound = 2.0 * std::pow(cfg.nu * cfg.grashof, 2) * (1.0 + 1e-9);

    BurnInResult result;
    const double t0 = state.time;
    int streak = 0;
    while (state.time - t0 < cfg.burn_in_max) {
        for (int s = 0; s < spf; ++s) state = nse_step(state, f, icfg);
        const double ens = std::pow(h1_norm(state.velocity), 2);
        streak = (ens <= bound) ? streak + 1 : 0;
        if (state.time - t0 >= cfg.burn_in_min && streak >= cfg.burn_in_streak) {
            result.converged = true;
            break;
        }
    }
    result.elapsed = state.time - t0;
    state.time = 0.0;  // recovery clocks start at zero
    result.state = std::move(state);
    return result;
}

struct SimulationResult {
    std::vector<FlowState> truth;  ///< on the observation clock
    ObservationSeries obs;
    ForcingSpec force;
    BurnInResult burn;
};

/// Truth run for a twin experiment: burn in, then record full states and
/// their low-mode projections every delta_t_obs over [0, t_total].
inline SimulationResult run_simulation(const ExperimentConfig& cfg, double t_total) {
    cfg.validate();
    const SpectralGrid grid(cfg.M);
    SimulationResult result;
    result.force = make_force(cfg, grid);

    FlowState state;
    if (cfg.force == "manufactured") {
        state = manufactured_equilibrium(cfg, grid);
        result.burn.state = state;
        result.burn.converged = true;
    } else {
        state.velocity = random_solenoidal(grid, cfg.seed, cfg.u0_amplitude);
        state.time = 0.0;
        result.burn = burn_in(std::move(state), result.force, cfg);
        state = result.burn.state;
    }

    IntegratorConfig icfg{cfg.dt, cfg.nu};
    const double dto = cfg.delta_t_obs_or_default();
    const int spf = static_cast<int>(std::llround(dto / cfg.dt));
    const WavenumberBall ball{cfg.N_obs};

    result.obs = ObservationSeries(ball, dto, 0.0);
    const auto n_frames = static_cast<std::size_t>(std::ceil(t_total / dto - 1e-9)) + 1;
    for (std::size_t k = 0; k < n_frames; ++k) {
        result.truth.push_back(state);
        result.obs.append(sample_observation(state, ball));
        if (k + 1 < n_frames)
            for (int s = 0; s < spf; ++s) state = nse_step(state, result.force, icfg);
    }
    return result;
}

inline TruthOracle make_truth_oracle(const SimulationResult& sim, double nu) {
    TruthOracle oracle;
    oracle.states = sim.truth;
    oracle.force = sim.force;
    oracle.nu_ = nu;
    return oracle;
}

/// Resolve the stage configuration from the experiment: computes sigma1 from
/// the force preset when unspecified, and picks mu at the top of the
/// admissible interval when unspecified.
inline StageConfig make_stage_config(const ExperimentConfig& cfg) {
    cfg.validate();
    const SpectralGrid grid(cfg.M);
    StageConfig sc;
    sc.N = WavenumberBall{cfg.N_obs};
    sc.beta = cfg.beta;
    sc.calib = cfg.calibration();
    sc.gamma0 = cfg.gamma0;
    sc.grashof = cfg.grashof;
    sc.eval_window = cfg.eval_window;
    sc.max_horizon = cfg.max_horizon;
    sc.oracle_derivative = cfg.oracle_derivative;
    sc.integrator = IntegratorConfig{cfg.dt, cfg.nu};

    if (cfg.sigma1 > 0.0) {
        sc.sigma1 = cfg.sigma1;
    } else if (cfg.force == "zero") {
        sc.sigma1 = 1.0;
    } else {
        const ForcingSpec f = make_force(cfg, grid);
        sc.sigma1 = shape_factor(f, TimeWindow{0.0, 0.0, 1}, grid);
    }

    if (cfg.mu > 0.0) {
        sc.mu = cfg.mu;
    } else {
        const ParameterSelection sel =
            select_parameters(cfg.grashof, sc.sigma1, cfg.beta, cfg.nu, sc.calib, cfg.gamma0,
                              cfg.N_obs, grid.dealias_cutoff);
        if (!sel.feasible)
            throw ConfigError("config: admissible mu interval is empty for these parameters");
        sc.mu = sel.mu_hi;
    }
    return sc;
}

/// Random solenoidal field with per-mode amplitude ~ 1/|n| inside the ball
/// (shell energy ~ 1/|n|), normalized to the requested L^2 norm.
inline SpectralField band_noise(const SpectralGrid& grid, WavenumberBall ball,
                                std::uint64_t seed, double l2_target) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralField out(grid);
    const int K = ball.N;
    for (int ky = 0; ky <= K; ++ky) {
        for (int kx = -K; kx <= K; ++kx) {
            if (ky == 0 && kx <= 0) continue;
            const double k2 = static_cast<double>(kx) * kx + static_cast<double>(ky) * ky;
            if (!ball.contains(kx, ky)) continue;
            const Complex z(gauss(rng), gauss(rng));
            const double inv = 1.0 / std::sqrt(k2);
            out.set_mode(0, kx, ky, inv * z * (-ky * inv));
            out.set_mode(1, kx, ky, inv * z * (kx * inv));
        }
    }
    out.dealias();
    const double norm = l2_norm(out);
    if (norm > 0.0) out *= l2_target / norm;
    return out;
}

struct SweepResult {
    std::vector<double> mus;
    std::vector<double> plateau;  ///< settled H^1 mismatch per mu
    double slope = 0.0;           ///< least-squares log-log slope
};

/// Model-error sensitivity in mu: nudge toward a steady Kolmogorov truth with
/// a deliberately wrong force f + delta (delta band-limited, shell energy
/// ~ 1/|n|) and record the settled H^1 mismatch for each mu. The mismatch
/// plateau scales like a negative power of mu.
inline SweepResult mu_sensitivity_sweep(const SpectralGrid& grid, double nu, double dt,
                                        WavenumberBall ball, const std::vector<double>& mus,
                                        std::uint64_t seed, double grashof = 2.0,
                                        int force_shell = 2, double delta_rel = 0.5,
                                        double t_run = 1.5, double settle_window = 0.5) {
    const double a = kolmogorov_amplitude(grashof, nu);
    const SpectralField f = kolmogorov_mode(grid, force_shell, a);
    const double k2 = static_cast<double>(force_shell) * force_shell;
    SpectralField u_s = f;
    u_s *= 1.0 / (nu * k2);
    const SpectralField obs = low_pass(u_s, ball);
    const SpectralField delta = band_noise(grid, ball, seed, delta_rel * l2_norm(f));
    const ForcingSpec wrong = ForcingSpec::static_field(f + delta);

    IntegratorConfig icfg{dt, nu};
    SweepResult result;
    result.mus = mus;
    for (double mu : mus) {
        FlowState v{u_s, 0.0};
        double sup = 0.0;
        const int steps = static_cast<int>(std::llround(t_run / dt));
        for (int s = 0; s < steps; ++s) {
            v = nudged_step(v, obs, wrong, mu, ball, icfg);
            if (v.time >= t_run - settle_window && s % 10 == 0)
                sup = std::max(sup, h1_norm(v.velocity - u_s));
        }
        result.plateau.push_back(sup);
    }

    // least-squares fit of ln(plateau) against ln(mu)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(mus.size());
    for (std::size_t i = 0; i < mus.size(); ++i) {
        const double x = std::log(mus[i]), y = std::log(result.plateau[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    result.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return result;
}

}  // namespace nsforce
