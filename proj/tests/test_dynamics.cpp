#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nsforce/nsforce.hpp"

using namespace nsforce;
using Catch::Approx;

namespace {

SpectralField taylor_green(const SpectralGrid& grid, double amplitude = 1.0) {
    // u = a (sin x cos y, -cos x sin y), an exact eigenflow: B(u,u) is a
    // gradient and A u = 2u
    SpectralField u(grid);
    u.set_mode(0, 1, 1, Complex(0.0, -0.25 * amplitude));
    u.set_mode(0, 1, -1, Complex(0.0, -0.25 * amplitude));
    u.set_mode(1, 1, 1, Complex(0.0, 0.25 * amplitude));
    u.set_mode(1, 1, -1, Complex(0.0, -0.25 * amplitude));
    return u;
}

}  // namespace

TEST_CASE("integrator config validation") {
    CHECK_THROWS_AS((IntegratorConfig{0.0, 0.1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((IntegratorConfig{1e-3, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((IntegratorConfig{-1e-3, 0.1}).validate(), std::invalid_argument);
    CHECK_NOTHROW((IntegratorConfig{1e-3, 0.1}).validate());
}

TEST_CASE("cfl diagnostic matches hand arithmetic") {
    const SpectralGrid grid(32);
    // u = (3 sin y, 0): max speed 3
    SpectralField u(grid);
    u.set_mode(0, 0, 1, Complex(0.0, -1.5));
    IntegratorConfig cfg{1e-2, 0.1};
    CHECK(cfg.cfl(u) == Approx(1e-2 * 3.0 * 32 / (2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("unforced Taylor-Green flow decays at the exact viscous rate") {
    const SpectralGrid grid(64);
    const double nu = 0.1;
    FlowState s{taylor_green(grid), 0.0};
    const double initial = l2_norm(s.velocity);
    IntegratorConfig cfg{1e-3, nu};
    for (int i = 0; i < 1000; ++i) s = nse_step(s, ForcingSpec::zero(), cfg);
    REQUIRE(s.time == Approx(1.0));
    const double expected = initial * std::exp(-2.0 * nu * s.time);
    CHECK(std::abs(l2_norm(s.velocity) - expected) <= 1e-6 * expected);
    // the decayed field stays a Taylor-Green flow (shape is preserved)
    SpectralField ref = taylor_green(grid, std::exp(-2.0 * nu * s.time));
    CHECK(l2_norm(s.velocity - ref) <= 1e-6 * expected);
}

TEST_CASE("manufactured Kolmogorov equilibrium is held to 1e-8 over unit time") {
    ExperimentConfig cfg;
    cfg.M = 32;
    cfg.nu = 0.1;
    cfg.dt = 2e-4;
    cfg.force = "manufactured";
    cfg.force_shell = 2;
    cfg.grashof = 2.0;
    const SpectralGrid grid(cfg.M);
    const ForcingSpec f = make_force(cfg, grid);
    FlowState s = manufactured_equilibrium(cfg, grid);
    const SpectralField u_s = s.velocity;
    const double scale = l2_norm(u_s);
    IntegratorConfig icfg{cfg.dt, cfg.nu};
    for (int i = 0; i < 5000; ++i) s = nse_step(s, f, icfg);
    CHECK(l2_norm(s.velocity - u_s) <= 1e-8 * scale);
}

TEST_CASE("nudging with mu = 0 reproduces the plain solver bitwise") {
    const SpectralGrid grid(32);
    const ForcingSpec f = ForcingSpec::static_field(kolmogorov_mode(grid, 2, 0.01));
    FlowState a{random_solenoidal(grid, 5, 0.1), 0.0};
    FlowState b = a;
    IntegratorConfig cfg{1e-3, 0.05};
    const WavenumberBall ball{6};
    const SpectralField obs = low_pass(a.velocity, ball);
    for (int i = 0; i < 20; ++i) {
        a = nse_step(a, f, cfg);
        b = nudged_step(b, obs, f, 0.0, ball, cfg);
    }
    CHECK(l2_norm(a.velocity - b.velocity) == 0.0);
}

TEST_CASE("nudging with zero innovation tracks the plain solver") {
    // when the observations are the solution's own low modes the nudging
    // term vanishes analytically; holding obs fixed across the step leaves
    // an O(mu dt^2)-per-step remainder, measured here and frozen
    const SpectralGrid grid(32);
    const double nu = 0.05, dt = 1e-3, mu = 10.0;
    const ForcingSpec f = ForcingSpec::static_field(kolmogorov_mode(grid, 2, 0.02));
    const WavenumberBall ball{6};
    FlowState a{random_solenoidal(grid, 9, 0.1), 0.0};
    FlowState b = a;
    IntegratorConfig cfg{dt, nu};
    for (int i = 0; i < 200; ++i) {
        const SpectralField obs = low_pass(a.velocity, ball);
        a = nse_step(a, f, cfg);
        b = nudged_step(b, obs, f, mu, ball, cfg);
    }
    CHECK(l2_norm(a.velocity - b.velocity) <= 1e-3 * l2_norm(a.velocity));
}

TEST_CASE("nudged step input validation") {
    const SpectralGrid grid(32);
    const WavenumberBall ball{4};
    FlowState s{random_solenoidal(grid, 2, 0.1), 0.0};
    IntegratorConfig cfg{1e-3, 0.1};
    const SpectralField good = low_pass(s.velocity, ball);
    CHECK_THROWS_AS(nudged_step(s, good, ForcingSpec::zero(), -1.0, ball, cfg),
                    std::invalid_argument);
    // observation with energy outside the ball is rejected
    CHECK_THROWS_AS(nudged_step(s, s.velocity, ForcingSpec::zero(), 5.0, ball, cfg),
                    std::invalid_argument);
}

TEST_CASE("blow-up raises a dedicated error carrying the time") {
    const SpectralGrid grid(32);
    FlowState s{random_solenoidal(grid, 1, 1e8), 0.0};
    IntegratorConfig cfg{1.0, 0.1};
    bool thrown = false;
    try {
        for (int i = 0; i < 50; ++i) s = nse_step(s, ForcingSpec::zero(), cfg);
    } catch (const BlowupError& e) {
        thrown = true;
        CHECK(e.time > 0.0);
    }
    CHECK(thrown);
}

TEST_CASE("grashof number and shape factor on preset forces") {
    const SpectralGrid grid(32);
    const double nu = 0.1;
    const TimeWindow window{0.0, 1.0, 8};

    // single Kolmogorov mode on shell 2: ||f|| = a pi sqrt(2), sigma1 = 2
    const double a = 0.01;
    const ForcingSpec f = ForcingSpec::static_field(kolmogorov_mode(grid, 2, a));
    CHECK(grashof(f, nu, window, grid) == Approx(a * M_PI * std::sqrt(2.0) / (nu * nu)).epsilon(1e-12));
    CHECK(shape_factor(f, window, grid) == Approx(2.0).epsilon(1e-12));

    // equal-energy shells 1 and 4: sigma1 = sqrt((1 + 16)/2)
    SpectralField two = kolmogorov_mode(grid, 1, a);
    two += kolmogorov_mode(grid, 4, a);
    const ForcingSpec f2 = ForcingSpec::static_field(two);
    CHECK(shape_factor(f2, window, grid) == Approx(std::sqrt(17.0 / 2.0)).epsilon(1e-12));

    CHECK(grashof(ForcingSpec::zero(), nu, window, grid) == 0.0);
    CHECK_THROWS_AS(shape_factor(ForcingSpec::zero(), window, grid), std::invalid_argument);
}

TEST_CASE("amplitude helper hits the requested grashof number") {
    const SpectralGrid grid(32);
    const double nu = 0.1, G = 2.0;
    const SpectralField f = kolmogorov_mode(grid, 2, kolmogorov_amplitude(G, nu));
    CHECK(l2_norm(f) == Approx(G * nu * nu).epsilon(1e-12));
}

TEST_CASE("absorbing radii arithmetic") {
    AprioriReport report;
    absorbing_radii(2.0, 1.5, 0.1, report);
    CHECK(report.R1 == Approx(0.2));
    CHECK(report.R2 == Approx(12.0 * 0.1 * 3.5 * 2.0));
    absorbing_radii(2.0, 1.5, 0.1, report, 24.0);
    CHECK(report.R2 == Approx(24.0 * 0.1 * 3.5 * 2.0));
}

TEST_CASE("discrete energy balance residual shrinks at third order in dt") {
    const SpectralGrid grid(32);
    const double nu = 0.1;
    const ForcingSpec f = ForcingSpec::static_field(kolmogorov_mode(grid, 2, 0.02));
    const SpectralField u0 = random_solenoidal(grid, 77, 0.2);

    auto run = [&](double dt) {
        FlowState s{u0, 0.0};
        IntegratorConfig cfg{dt, nu};
        std::vector<FlowState> traj{s};
        const int steps = static_cast<int>(std::llround(0.2 / dt));
        for (int i = 0; i < steps; ++i) {
            s = nse_step(s, f, cfg);
            traj.push_back(s);
        }
        return balance_report(traj, f, nu).max_balance_residual;
    };
    const double coarse = run(4e-3);
    const double fine = run(2e-3);
    CHECK(coarse / fine > 5.0);
    CHECK(coarse / fine < 12.0);
}

TEST_CASE("enstrophy envelope holds along a settled forced trajectory") {
    ExperimentConfig cfg;
    cfg.M = 32;
    cfg.nu = 0.1;
    cfg.dt = 2e-3;
    cfg.grashof = 2.0;
    cfg.N_obs = 8;
    cfg.burn_in_min = 5.0;
    cfg.burn_in_streak = 20;
    cfg.burn_in_max = 60.0;
    SimulationResult sim = run_simulation(cfg, 2.0);
    REQUIRE(sim.burn.converged);
    AprioriReport report = balance_report(sim.truth, sim.force, cfg.nu);
    CHECK(report.envelope_violations == 0);
}

TEST_CASE("time window validation") {
    CHECK_THROWS_AS((TimeWindow{1.0, 0.0, 4}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((TimeWindow{0.0, 1.0, 0}).validate(), std::invalid_argument);
    CHECK_NOTHROW((TimeWindow{0.0, 0.0, 1}).validate());
}
