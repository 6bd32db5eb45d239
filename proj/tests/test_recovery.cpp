#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nsforce/nsforce.hpp"

using namespace nsforce;
using Catch::Approx;

namespace {

// small settled twin setup shared by the stage-level tests
struct Twin {
    ExperimentConfig cfg;
    SimulationResult sim;
    TruthOracle oracle;

    explicit Twin(double horizon = 4.0) {
        cfg.M = 32;
        cfg.nu = 0.1;
        cfg.dt = 2e-3;
        cfg.force_shell = 2;
        cfg.grashof = 2.0;
        cfg.N_obs = 8;
        cfg.beta = 0.5;
        cfg.burn_in_min = 5.0;
        cfg.burn_in_streak = 20;
        cfg.burn_in_max = 60.0;
        sim = run_simulation(cfg, horizon);
        oracle = make_truth_oracle(sim, cfg.nu);
    }

    StageConfig stage() const {
        StageConfig sc = make_stage_config(cfg);
        return sc;
    }
};

}  // namespace

TEST_CASE("parameter selection reproduces the hand-computed threshold") {
    // with c0 = c1 = 1: N^2 > (1+2)*4/0.25 = 48, so N_min = 7
    Calibration calib;
    calib.c0 = 1.0;
    calib.c1 = 1.0;
    const ParameterSelection sel = select_parameters(2.0, 1.0, 0.5, 0.1, calib);
    CHECK(sel.N_min == 7);
    CHECK(sel.feasible);
    CHECK(sel.mu_hi == Approx(1.0 * 0.1 * 49.0));
}

TEST_CASE("parameter selection degenerates gracefully at zero force") {
    const ParameterSelection sel = select_parameters(0.0, 1.0, 0.5, 0.1, Calibration{});
    CHECK(sel.N_min == 1);
    CHECK(sel.mu_lo == 0.0);
    CHECK(sel.feasible);
}

TEST_CASE("parameter selection at the acceptance scale") {
    // defaults, G = 2, sigma1 = 2, beta = 0.5: threshold 0.5*4*4/0.25 = 32,
    // so N_min = 6; at N = 12 the interval is (3.2, 14.4]
    const ParameterSelection sel =
        select_parameters(2.0, 2.0, 0.5, 0.1, Calibration{}, 1.0, 12);
    CHECK(sel.N_min == 6);
    CHECK(sel.N_use == 12);
    CHECK(sel.mu_lo == Approx(3.2));
    CHECK(sel.mu_hi == Approx(14.4));
    CHECK(sel.feasible);
    CHECK(sel.binding == "N-threshold");
}

TEST_CASE("parameter selection flags an empty interval and bad input") {
    // an absurd initial relative error pushes the contraction bound past
    // the upper end
    const ParameterSelection sel =
        select_parameters(2.0, 2.0, 0.5, 0.1, Calibration{}, 1e4, 12);
    CHECK_FALSE(sel.feasible);
    CHECK(sel.binding == "contraction");

    CHECK_THROWS_AS(select_parameters(2.0, 1.0, 0.0, 0.1, Calibration{}), RecoveryError);
    CHECK_THROWS_AS(select_parameters(2.0, 1.0, 1.0, 0.1, Calibration{}), RecoveryError);
    CHECK_THROWS_AS(select_parameters(-1.0, 1.0, 0.5, 0.1, Calibration{}), RecoveryError);
    // required cutoff exceeding the dealiased band is an error with guidance
    CHECK_THROWS_WITH(select_parameters(50.0, 1.0, 0.5, 0.1, Calibration{}, 1.0, 0, 10),
                      Catch::Matchers::ContainsSubstring("resolution"));
}

TEST_CASE("relaxation period arithmetic") {
    // mu = 100, nu = 0.1, C1 = 1, w = 1, g = 0.01:
    // rho = ln((100/0.1)*(0.1/0.01)^2)/100 = ln(1e5)/100
    const RelaxationPeriod rp = relaxation_period(100.0, 0.1, 1.0, 0.01, 1.0);
    CHECK_FALSE(rp.degenerate);
    CHECK(rp.rho == Approx(std::log(1e5) / 100.0).epsilon(1e-12));
    CHECK(rp.rho == Approx(0.1151).margin(2e-4));
}

TEST_CASE("relaxation period clamps, degenerates, and validates") {
    // argument of the log <= 1: already relaxed
    CHECK(relaxation_period(10.0, 0.1, 0.01, 10.0, 1.0).rho == 0.0);
    // converged previous stage with nonzero initialization error
    const RelaxationPeriod degen = relaxation_period(10.0, 0.1, 1.0, 0.0, 1.0, 7.5);
    CHECK(degen.degenerate);
    CHECK(degen.rho == 7.5);
    // both zero: nothing to wait for
    CHECK_FALSE(relaxation_period(10.0, 0.1, 0.0, 0.0, 1.0).degenerate);
    CHECK(relaxation_period(10.0, 0.1, 0.0, 0.0, 1.0).rho == 0.0);
    CHECK_THROWS_AS(relaxation_period(0.0, 0.1, 1.0, 1.0, 1.0), RecoveryError);
    CHECK_THROWS_AS(relaxation_period(10.0, 0.1, -1.0, 1.0, 1.0), RecoveryError);
}

TEST_CASE("stage schedule obeys the floor and the observation clock") {
    StageConfig sc;
    sc.mu = 100.0;
    sc.N = WavenumberBall{12};
    sc.beta = 0.5;
    sc.grashof = 2.0;
    sc.integrator = IntegratorConfig{1e-3, 0.1};
    const double dt_obs = 0.01;
    const StagePlan plan = plan_schedule(sc, 3, dt_obs, RecoveryMode::Asymptotic);
    REQUIRE(plan.rho.size() == 3);
    const double floor = -std::log(0.5) / 100.0;
    for (double r : plan.rho) {
        CHECK(r >= floor);
        // rounded up to the observation clock
        CHECK(std::abs(r / dt_obs - std::round(r / dt_obs)) < 1e-9);
    }
    // spans nest: stage n covers its own rho plus everything downstream
    const double w_eval = 5.0 / sc.mu;
    CHECK(plan.span[2] == Approx(plan.rho[2] + w_eval));
    CHECK(plan.span[1] == Approx(plan.rho[1] + plan.span[2]));
    CHECK(plan.span[0] == Approx(plan.rho[0] + plan.span[1]));
    CHECK(plan.window_needed == Approx(plan.span[0] + 2.0 * dt_obs));
}

TEST_CASE("advection is bilinear: difference splits into stress terms") {
    const SpectralGrid grid(32);
    const SpectralField u = random_solenoidal(grid, 81, 0.8);
    const SpectralField v = random_solenoidal(grid, 82, 0.6);
    const SpectralField w = v - u;
    SpectralField split = bilinear(w, w);
    split += bilinear(u, w);
    split += bilinear(w, u);
    const SpectralField direct = bilinear(v, v) - bilinear(u, u);
    CHECK(l2_norm(direct - split) < 1e-12 * std::max(1.0, l2_norm(direct)));
}

TEST_CASE("reynolds residual wiring matches an independent evaluation") {
    const SpectralGrid grid(32);
    const WavenumberBall ball{6};
    const FlowState u{random_solenoidal(grid, 83, 0.5), 0.0};
    const FlowState v{random_solenoidal(grid, 84, 0.5), 0.0};

    const SpectralField qw = high_pass(v.velocity - u.velocity, ball);
    SpectralField stress = bilinear(qw, qw);
    stress += bilinear(u.velocity, qw);
    stress += bilinear(qw, u.velocity);
    stress = low_pass(stress, ball);

    // feeding the stress itself as the model error gives a zero residual
    CHECK(reynolds_residual(u, v, stress, ball) < 1e-14);
    // and a zero model error returns the stress norm
    CHECK(reynolds_residual(u, v, SpectralField(grid), ball) == Approx(l2_norm(stress)));
    // v = u: both sides vanish
    CHECK(reynolds_residual(u, u, SpectralField(grid), ball) == 0.0);

    const FlowState other{random_solenoidal(SpectralGrid(16), 1, 0.5), 0.0};
    CHECK_THROWS_AS(reynolds_residual(u, other, stress, ball), RecoveryError);
}

TEST_CASE("initial force readout recovers a band-limited steady force") {
    // truth = manufactured equilibrium: frames are constant in time, the FD
    // term vanishes, and Q_N u = 0, so f_0 = f up to rounding
    ExperimentConfig cfg;
    cfg.M = 32;
    cfg.nu = 0.1;
    cfg.force = "manufactured";
    cfg.force_shell = 2;
    cfg.grashof = 2.0;
    const SpectralGrid grid(cfg.M);
    const SpectralField f = make_force(cfg, grid).evaluate(0.0, grid);
    const FlowState u_s = manufactured_equilibrium(cfg, grid);

    const WavenumberBall ball{8};
    ObservationSeries series(ball, 0.05, 0.0);
    for (int k = 0; k < 5; ++k) series.append(low_pass(u_s.velocity, ball));
    const ForcingSpec f0 = initial_force_readout(series, cfg.nu, ball);
    for (const SpectralField& frame : f0.frames())
        CHECK(l2_norm(frame - f) < 1e-12 * l2_norm(f));

    // too few frames
    ObservationSeries two(ball, 0.05, 0.0);
    two.append(low_pass(u_s.velocity, ball));
    two.append(low_pass(u_s.velocity, ball));
    CHECK_THROWS_AS(initial_force_readout(two, cfg.nu, ball), RecoveryError);
}

TEST_CASE("initial force readout of zero observations is the zero force") {
    const SpectralGrid grid(16);
    const WavenumberBall ball{4};
    ObservationSeries series(ball, 0.1, 0.0);
    for (int k = 0; k < 4; ++k) series.append(SpectralField(grid));
    const ForcingSpec f0 = initial_force_readout(series, 0.1, ball);
    for (const SpectralField& frame : f0.frames()) CHECK(l2_norm(frame) == 0.0);
}

TEST_CASE("readout defect against the true low-mode force is the stress") {
    // generic truth: f_0 - P_N f equals the Reynolds stress of u_n = P_N u,
    // up to FD noise
    Twin twin(1.0);
    const SpectralGrid grid(twin.cfg.M);
    const WavenumberBall ball{twin.cfg.N_obs};
    const ForcingSpec f0 = initial_force_readout(twin.sim.obs, twin.cfg.nu, ball);
    const SpectralField f = twin.sim.force.evaluate(0.0, grid);

    const std::size_t k = twin.sim.obs.size() / 2;
    const FlowState& u = twin.sim.truth[k];
    const SpectralField pnu = low_pass(u.velocity, ball);
    SpectralField stress = bilinear(pnu, pnu) - bilinear(u.velocity, u.velocity);
    stress = low_pass(stress, ball);

    const SpectralField frame = f0.evaluate(twin.sim.obs.frame_time(k), grid);
    const double defect = l2_norm(frame - low_pass(f, ball) - stress);
    // FD noise dominates; it is tiny for this laminar flow
    CHECK(defect < 1e-5 * l2_norm(f));
}

TEST_CASE("model error examples") {
    const SpectralGrid grid(16);
    const SpectralField f = kolmogorov_mode(grid, 2, 0.01);
    const ForcingSpec truth = ForcingSpec::static_field(f);
    const TimeWindow window{0.0, 1.0, 4};

    auto [abs_same, rel_same] = model_error(truth, truth, window, grid);
    CHECK(abs_same == 0.0);
    CHECK(rel_same == 0.0);

    // zero guess has relative error gamma_0 = 1 by definition
    auto [abs_zero, rel_zero] = model_error(ForcingSpec::zero(), truth, window, grid);
    CHECK(abs_zero == Approx(l2_norm(f)));
    CHECK(rel_zero == Approx(1.0));

    CHECK_THROWS_AS(model_error(truth, ForcingSpec::zero(), window, grid), RecoveryError);
}

TEST_CASE("stage configuration guard") {
    StageConfig sc;
    sc.mu = 15.0;
    sc.N = WavenumberBall{12};
    sc.integrator = IntegratorConfig{1e-3, 0.1};
    // guard: mu <= guard_c * nu * N^2 = 14.4
    CHECK_THROWS_AS(sc.validate(sc.integrator.nu), RecoveryError);
    sc.mu = 14.4;
    CHECK_NOTHROW(sc.validate(sc.integrator.nu));
    sc.beta = 1.5;
    CHECK_THROWS_AS(sc.validate(sc.integrator.nu), RecoveryError);
}

TEST_CASE("run_stage rejects mismatched cutoffs and short windows") {
    Twin twin(1.0);
    StageConfig sc = twin.stage();
    sc.N = WavenumberBall{6};  // series was sampled at N = 8
    sc.mu = 3.0;
    CHECK_THROWS_AS(run_stage(ForcingSpec::zero(), twin.sim.obs, sc, 0.0, 0.1, 0.5),
                    RecoveryError);
    StageConfig ok = twin.stage();
    CHECK_THROWS_AS(run_stage(ForcingSpec::zero(), twin.sim.obs, ok, 0.0, 0.1, 100.0),
                    RecoveryError);
}

TEST_CASE("a truth-initialized stage with the true force returns it") {
    // w_n = 0 and f_prev = f: in oracle-derivative mode the reconstituted
    // force is the true force to near machine precision
    Twin twin(2.0);
    StageConfig sc = twin.stage();
    sc.oracle_derivative = true;
    sc.v_init = StageConfig::VInit::Custom;
    sc.v_custom = twin.sim.truth.front().velocity;
    const StageRecord record =
        run_stage(twin.sim.force, twin.sim.obs, sc, 0.0, 0.2, 1.0, &twin.oracle);
    const SpectralGrid grid(twin.cfg.M);
    const SpectralField f = twin.sim.force.evaluate(0.0, grid);
    REQUIRE(record.model_error_l2 >= 0.0);
    CHECK(record.model_error_l2 < 1e-8 * l2_norm(f));
    // the zero-order hold of the observations between frames keeps the
    // surrogate within O(mu dt_obs^2) of the truth rather than exactly on it
    CHECK(record.sync_error_h1 < 1e-3);
    CHECK(record.reynolds_residual < 1e-10 * l2_norm(f));
}

TEST_CASE("every emitted stage force is band-limited exactly") {
    Twin twin(2.0);
    StageConfig sc = twin.stage();
    const StageRecord record =
        run_stage(ForcingSpec::zero(), twin.sim.obs, sc, 0.0, 0.2, 1.0, &twin.oracle);
    const WavenumberBall ball{twin.cfg.N_obs};
    REQUIRE(!record.force.frames().empty());
    for (const SpectralField& frame : record.force.frames())
        CHECK(l2_norm(high_pass(frame, ball)) == 0.0);
    CHECK(record.force.band_limit().has_value());
    CHECK(record.t_eval == Approx(record.t_begin + record.rho));
    CHECK(record.rho >= 0.0);
}

TEST_CASE("recycle mode refuses a window shorter than the schedule") {
    Twin twin(0.3);  // far too short for any stage ladder
    StageConfig sc = twin.stage();
    CHECK_THROWS_WITH(run_recovery(twin.sim.obs, &twin.oracle, sc, RecoveryMode::Recycle, 3),
                      Catch::Matchers::ContainsSubstring("window"));
    CHECK_THROWS_AS(run_recovery(twin.sim.obs, &twin.oracle, sc, RecoveryMode::Asymptotic, 0),
                    RecoveryError);
}

TEST_CASE("short multi-stage recovery contracts or reports the noise floor") {
    Twin twin(8.0);
    StageConfig sc = twin.stage();
    const RecoveryTrace trace =
        run_recovery(twin.sim.obs, &twin.oracle, sc, RecoveryMode::Asymptotic, 2);
    REQUIRE(trace.failure.empty());
    REQUIRE(trace.stages.size() == 2);
    REQUIRE(trace.measured_ratios.size() == 2);
    CHECK(trace.initial_error > 0.0);
    for (std::size_t i = 0; i < trace.measured_ratios.size(); ++i) {
        const bool contracted = trace.measured_ratios[i] <= sc.beta;
        CHECK((contracted || trace.ratio_at_floor[i]));
    }
    // stage forces are consumable as the next stage's guess
    CHECK(trace.stages.back().force.band_limit().has_value());
}

TEST_CASE("trace csv layout") {
    Twin twin(8.0);
    StageConfig sc = twin.stage();
    const RecoveryTrace trace =
        run_recovery(twin.sim.obs, &twin.oracle, sc, RecoveryMode::Asymptotic, 2);
    const auto path = std::filesystem::temp_directory_path() / "nsforce_trace_test.csv";
    write_trace_csv(path, trace);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "stage,t_begin,rho_n,sync_h1,model_err_l2,ratio,reynolds_residual");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
    std::filesystem::remove(path);
}
