#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ampsim/scenario.hpp"

using namespace ampsim;
namespace fs = std::filesystem;

namespace
{

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "ampsim-unit" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string field_of(const std::string& text)
{
    try
    {
        parse_config(text);
    }
    catch (const ConfigError& e)
    {
        return e.field();
    }
    return "";
}

ScenarioConfig quick()
{
    ScenarioConfig c;
    c.scenario_id = "quick";
    c.lambda_over_gamma = 20.0;
    c.omega_res_over_lambda = 50.0;
    c.field_dim = 30;
    c.t_max = 2.0;
    c.sample_interval = 0.1;
    c.steady_window = 0.5;
    return c;
}

} // namespace

TEST_SUITE("scenario")
{

TEST_CASE("minimal config applies the defaults")
{
    const ScenarioConfig c = parse_config("interaction_order=2\n");
    CHECK(serialize_config(c) == serialize_config(ScenarioConfig{}));
    CHECK(c.lambda_over_gamma == 1000.0);
    CHECK(c.omega_res_over_lambda == 1000.0);
    CHECK(c.omega31_over_res == 1.2);
    CHECK(c.omega32_over_res == 0.2);
    CHECK(c.nbar_h == 10.0);
    CHECK(c.nbar_c == 0.1);
    CHECK(c.atom_level == 2);
    CHECK(c.field_state == FieldKind::vacuum);
    CHECK(c.frame == Frame::interaction);

    const AmplifierModel m = c.model();
    CHECK(m.lambda == 1.0);
    CHECK(m.gamma_h == 1e-3);
    CHECK(m.omega2 - m.omega1 == 1000.0);
    CHECK(m.omega3 - m.omega1 == doctest::Approx(1200.0));
    CHECK(m.omega_f == 500.0);
}

TEST_CASE("config errors name the field")
{
    CHECK(field_of("fock_n = 4\nfield_dim = 3\nfield_state = fock\n") == "fock_n");
    CHECK(field_of("colour = red\n") == "colour");
    CHECK(field_of("nbar_h = 1\nnbar_h = 2\n") == "nbar_h");
    CHECK(field_of("nbar_h = ten\n") == "nbar_h");
    CHECK(field_of("nbar_h = 1.5x\n") == "nbar_h");
    CHECK(field_of("interaction_order = 3\n") == "interaction_order");
    CHECK(field_of("frame = rotating\n") == "frame");
    CHECK(field_of("omega32_over_res = 0.3\n") == "omega32_over_res");
    CHECK(field_of("omega_f_over_res = 0.4\n") == "omega_f_over_res");
    CHECK(field_of("t_max = 1\nsnapshots = 0, 2\n") == "snapshots");
    CHECK(field_of("snapshots = 1, 0.5\n") == "snapshots");
    CHECK(field_of("phase_space = Q,Q\n") == "phase_space");
    CHECK(field_of("just some words\n") == "line 1");
    CHECK(field_of("nbar_h =\n") == "nbar_h");
    CHECK(field_of("# comment only\n\n  \noutput_dir =\n") == "");
    CHECK(field_of("omega_f_over_res = 0.4\nframe = lab\n") == "");

    ScenarioConfig c;
    c.field_state = FieldKind::poisson_mixed;
    c.field_mean = 4.0;
    c.field_dim = 10;
    CHECK_THROWS_AS(c.initial_state(), ConfigError);
}

TEST_CASE("parse and serialize round trip")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        ScenarioConfig c;
        c.scenario_id = "rt_" + std::to_string(trial);
        c.interaction_order = 1 + trial % 2;
        c.frame = trial % 3 ? Frame::interaction : Frame::lab;
        c.omega_res_over_lambda = 10.0 + 1000.0 * u(rng);
        c.lambda_over_gamma = 1.0 + 1000.0 * u(rng);
        c.omega32_over_res = 0.05 + u(rng);
        c.omega31_over_res = c.omega32_over_res + 1.0;
        c.nbar_h = 20.0 * u(rng);
        c.nbar_c = u(rng) / 3.0;
        c.gamma_c_over_gamma_h = 0.1 + u(rng);
        c.field_dim = 10 + trial;
        c.field_state = static_cast<FieldKind>(trial % 5);
        c.fock_n = trial % 7;
        c.field_mean = u(rng);
        c.coherent_re = u(rng) - 0.5;
        c.coherent_im = u(rng) - 0.5;
        if (trial % 2)
            c.dt = 0.001 + 0.01 * u(rng);
        c.t_max = 1.0 + 9.0 * u(rng);
        c.sample_interval = 0.05 + 0.1 * u(rng);
        c.snapshots = {0.0, c.t_max * u(rng) * 0.5, c.t_max};
        c.q_function = trial % 2;
        c.wigner = trial % 3 == 0;
        if (trial % 4)
            c.grid_radius = 3.0 + 5.0 * u(rng);
        c.output_dir = trial % 2 ? "out/" + c.scenario_id : "";

        const std::string text = serialize_config(c);
        const ScenarioConfig back = parse_config(text);
        CHECK(serialize_config(back) == text);
        CHECK(back.omega_res_over_lambda == c.omega_res_over_lambda);
        CHECK(back.snapshots == c.snapshots);
        CHECK(back.dt == c.dt);
    }
}

TEST_CASE("aligned time step divides the sample interval")
{
    const ScenarioConfig c = ScenarioConfig{};
    const MasterEquation eq(c.model());
    const double interval = c.to_model_time(c.sample_interval);
    const double dt = aligned_time_step(eq, interval);
    CHECK(dt <= default_time_step(eq));
    const double steps = interval / dt;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
}

TEST_CASE("run_scenario artifacts")
{
    SUBCASE("t_max = 0 gives a single csv row")
    {
        ScenarioConfig c = quick();
        c.t_max = 0.0;
        const fs::path dir = scratch("tmax0");
        const RunOutcome r = run_scenario(c, dir);
        CHECK(r.code == exit_code::ok);
        std::istringstream csv(slurp(dir / "thermo.csv"));
        std::string line;
        int rows = 0;
        std::getline(csv, line);
        CHECK(line == thermo_csv_header);
        while (std::getline(csv, line))
            ++rows;
        CHECK(rows == 1);
    }

    SUBCASE("identical configs give identical bytes, and meta.json reruns the scenario")
    {
        ScenarioConfig c = quick();
        c.snapshots = {0.0, 1.0};
        c.q_function = c.wigner = true;
        c.grid_points = 41;
        const fs::path a = scratch("det_a"), b = scratch("det_b"), m = scratch("det_meta");
        REQUIRE(run_scenario(c, a).code == exit_code::ok);
        REQUIRE(run_scenario(c, b).code == exit_code::ok);
        const ScenarioConfig again = load_config(slurp(a / "meta.json"));
        CHECK(serialize_config(again) == serialize_config(c));
        REQUIRE(run_scenario(again, m).code == exit_code::ok);
        for (const char* f : {"thermo.csv", "meta.json", "snapshots/Q_t0.csv", "snapshots/W_t1.csv",
                              "snapshots/W_t1.json"})
        {
            REQUIRE(fs::exists(a / f));
            CHECK(slurp(a / f) == slurp(b / f));
            CHECK(slurp(a / f) == slurp(m / f));
        }

        const auto meta = nlohmann::json::parse(slurp(a / "meta.json"));
        CHECK(meta["status"] == "ok");
        CHECK(meta["exit_code"] == 0);
        CHECK(meta["health"]["max_trace_drift"].get<double>() < 1e-8);
        CHECK(meta["config"]["lambda_over_gamma"] == "20");
        CHECK(meta["resolved"]["steps"].get<long>() > 0);

        const auto side = nlohmann::json::parse(slurp(a / "snapshots/W_t0.json"));
        CHECK(side["scenario_id"] == "quick");
        CHECK(side["t"].get<double>() == 0.0);
        CHECK(side["value_at_origin"].get<double>() == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));
        CHECK(side.contains("min_value"));
        CHECK(side.contains("negative_volume"));
    }

    SUBCASE("an integrator abort exits with code 3 and records the diagnostic")
    {
        ScenarioConfig c = quick();
        c.field_dim = 6;
        // Two-photon gain only fills even Fock states, so the guard has to reach n = 4.
        c.guard_levels = 2;
        const fs::path dir = scratch("abort");
        const RunOutcome r = run_scenario(c, dir);
        CHECK(r.code == exit_code::integrator_abort);
        CHECK_FALSE(r.result.has_value());
        const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
        CHECK(meta["status"] == "integrator_abort");
        CHECK(meta["exit_code"] == 3);
        CHECK(meta["diagnostic"]["metric"] == "tail_mass");
        CHECK(meta["diagnostic"]["time"].get<double>() > 0.0);
        CHECK(meta["diagnostic"]["time"].get<double>() <= c.t_max);
    }

    SUBCASE("a grid that misses the state is a config error")
    {
        ScenarioConfig c = quick();
        c.snapshots = {0.0};
        c.q_function = true;
        c.grid_radius = 0.5;
        c.grid_points = 11;
        const fs::path dir = scratch("coverage");
        const RunOutcome r = run_scenario(c, dir);
        CHECK(r.code == exit_code::config_error);
        const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
        CHECK(meta["diagnostic"]["field"] == "grid_radius");
    }
}

TEST_CASE("auto grid radius follows the photon number")
{
    ScenarioConfig c = quick();
    CHECK(c.grid(0.0).re_max == 6.0);
    CHECK(c.grid(16.0).re_max == 9.0);
    CHECK(c.grid(17.0).re_max == 10.0);
    c.grid_radius = 7.5;
    CHECK(c.grid(100.0).re_max == 7.5);
}

TEST_CASE("two-photon amplifier from an excited atom, reduced scale")
{
    // lambda/gamma = 100: the fast variant of the main amplification run.
    const std::vector<ScenarioConfig> branches = preset_branches("fig2", true);
    REQUIRE(branches.size() == 2);
    const ScenarioConfig& c = branches[0];
    CHECK(c.interaction_order == 2);
    const ScenarioResult r = simulate(c);
    const SteadySummary& s = r.steady;
    CHECK(s.eta == doctest::Approx(1.0 / 1.2).epsilon(0.005));
    CHECK(s.qdot_h > 0.0);
    CHECK(s.qdot_c < 0.0);
    CHECK(s.qdot_c_over_qdot_h == doctest::Approx(-1.0 / 6.0).epsilon(0.01));
    REQUIRE(s.t.has_value());
    CHECK(*s.t < c.t_max);

    // Atomic populations settle while the field keeps growing in energy and entropy.
    const auto& samples = r.series.samples;
    for (std::size_t k = 1; k < samples.size(); ++k)
        if (c.to_gamma_time(samples[k - 1].t) >= 5.0)
        {
            CHECK(samples[k].e_field > samples[k - 1].e_field);
            CHECK(samples[k].s_field > samples[k - 1].s_field);
        }
}

TEST_CASE("semiclassical report")
{
    const SemiclassicalReport r = semiclassical_report(ScenarioConfig{});
    CHECK(r.max_rel_discrepancy < 1e-8);
    CHECK(r.analytic.eta_sc == doctest::Approx(1.0 / 1.2).epsilon(1e-15));
    const auto j = nlohmann::json::parse(semiclassical_json(r));
    for (const char* key : {"params", "qdot_h_sc", "qdot_c_sc", "p_sc", "eta_sc", "numeric", "max_rel_discrepancy"})
        CHECK(j.contains(key));
}

TEST_CASE("presets")
{
    const auto names = preset_names();
    for (const char* n : {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "semiclassical_table"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    CHECK_THROWS_AS(preset_branches("fig9", false), ConfigError);
    CHECK(preset_branches("semiclassical_table", false).empty());

    const auto fig5 = preset_branches("fig5", false);
    REQUIRE(fig5.size() == 2);
    CHECK(fig5[0].lambda_over_gamma == 1000.0);
    CHECK(fig5[0].wigner);
    CHECK(fig5[0].snapshots == std::vector<double>{0.0, 0.1, 8.0});
    CHECK(fig5[0].field_state == FieldKind::fock);
    CHECK(fig5[1].field_state == FieldKind::poisson_mixed);
    const auto fig6 = preset_branches("fig6", true);
    CHECK(fig6[0].interaction_order == 1);
    CHECK(fig6[0].snapshots.back() == 10.0);
    CHECK(fig6[0].scenario_id.ends_with("_fast"));
    for (const auto& name : names)
        for (bool fast : {true, false})
            for (const ScenarioConfig& c : preset_branches(name, fast))
            {
                CHECK_NOTHROW(c.validate());
                REQUIRE(c.dt.has_value());
                // Samples must land on the step grid.
                const double steps = c.sample_interval * c.lambda_over_gamma / *c.dt;
                CHECK(std::abs(steps - std::round(steps)) < 1e-9);
            }
}

}
