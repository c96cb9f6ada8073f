#ifndef AMPSIM_SCENARIO_HPP
#define AMPSIM_SCENARIO_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ampsim/integrate.hpp"
#include "ampsim/phasespace.hpp"
#include "ampsim/semiclassical.hpp"

namespace ampsim
{

// A config key that is unknown, duplicated, malformed or out of range.
class ConfigError : public Error
{
public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const { return m_field; }

private:
    std::string m_field;
};

enum class FieldKind
{
    vacuum,
    fock,
    coherent,
    poisson_mixed,
    thermal
};

/*
 * One simulation run. Frequencies are ratios to omega_res = omega2 - omega1,
 * rates are fixed by lambda/gamma with lambda = 1 as the internal unit and
 * gamma = gamma_h. Times are in 1/gamma except dt, which is in 1/lambda.
 *
 * Plain-text form: one `key = value` per line, `#` starts a comment. Keys
 * match the member names; optional members accept `auto` (dt, grid_radius)
 * or `resonant` (omega_f_over_res).
 */
struct ScenarioConfig
{
    std::string scenario_id = "scenario";

    int interaction_order = 2;
    Frame frame = Frame::interaction;
    double omega_res_over_lambda = 1000.0;
    double lambda_over_gamma = 1000.0;
    double omega31_over_res = 1.2;
    double omega32_over_res = 0.2;
    double omega1_over_res = 0.0;
    std::optional<double> omega_f_over_res;
    double gamma_c_over_gamma_h = 1.0;
    double nbar_h = 10.0;
    double nbar_c = 0.1;
    int field_dim = 100;

    int atom_level = 2;
    FieldKind field_state = FieldKind::vacuum;
    int fock_n = 0;
    double field_mean = 0.0;
    double coherent_re = 0.0;
    double coherent_im = 0.0;
    double max_tail_mass = default_max_tail_mass;

    std::optional<double> dt;
    double t_max = 10.0;
    double sample_interval = 0.05;
    int guard_levels = 5;
    double guard_tol = 1e-6;
    double trace_drift_tol = 1e-8;
    double steady_window = 1.0;
    double steady_tol = 1e-3;

    std::vector<double> snapshots;
    bool q_function = false;
    bool wigner = false;
    // Half-width of the square alpha grid. auto resolves to
    // max(6, ceil(sqrt(<n>) + 5)) with <n> the largest mean photon number among the snapshots.
    std::optional<double> grid_radius;
    int grid_points = 201;

    // Empty: <output root>/<scenario_id>.
    std::string output_dir;

    void validate() const;

    double gamma_h() const { return 1.0 / lambda_over_gamma; }
    AmplifierModel model() const;
    // Model time (1/lambda) for a time given in 1/gamma.
    double to_model_time(double t_gamma) const { return t_gamma * lambda_over_gamma; }
    double to_gamma_time(double t_model) const { return t_model / lambda_over_gamma; }
    GridSpec grid(double max_mean_photons) const;
    IntegratorConfig integrator(const MasterEquation& eq) const;
    DensityMatrix initial_state() const;
};

ScenarioConfig parse_config(std::string_view text);
// Canonical text: every key in a fixed order, reals printed round-trip exact.
std::string serialize_config(const ScenarioConfig& config);

/*
 * Auto step: the largest dt <= min(0.02, stable RK4 step) that divides the
 * sample interval, so samples and snapshots land exactly on the step grid.
 */
double aligned_time_step(const MasterEquation& eq, double sample_interval);

struct FieldSnapshot
{
    double t;  // 1/gamma
    DensityMatrix field;
    double parity;
    std::optional<PhaseSpaceGrid> q;
    std::optional<PhaseSpaceGrid> w;
};

struct SteadySummary
{
    std::optional<double> t;  // 1/gamma
    // Means over the final steady window.
    double qdot_h;
    double qdot_c;
    double p_f;
    double eta;
    double qdot_c_over_qdot_h;
    double p_f_over_qdot_h;
    double first_law_residual;  // max |qdot_h + qdot_c - p_f| / |qdot_h| after t
};

struct ScenarioResult
{
    ScenarioConfig config;
    AmplifierModel model;
    double dt;
    TimeSeries series;
    SteadySummary steady;
    std::vector<FieldSnapshot> snapshots;
    // Shared by every snapshot grid of the run.
    std::optional<GridSpec> grid;
};

// Runs the evolution and the phase-space analysis; no files are written.
// Observers see every sample (model time, joint state).
// Throws ConfigError, IntegratorAbort or GridCoverage.
ScenarioResult simulate(const ScenarioConfig& config, std::span<const Observer> observers = {});

namespace exit_code
{
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int integrator_abort = 3;
}

// AMPSIM_OUTPUT_ROOT, else ./ampsim-output.
std::filesystem::path default_output_root();
std::filesystem::path resolve_output_dir(const ScenarioConfig& config);

/*
 * simulate() plus artifacts in `dir`:
 *   thermo.csv, snapshots/{Q,W}_t<t>.csv with a .json sidecar each, meta.json.
 * meta.json always carries the resolved config and a status; on failure it
 * also holds the diagnostic and the returned code is nonzero.
 */
struct RunOutcome
{
    int code;
    std::optional<ScenarioResult> result;
    std::string diagnostic;
};
RunOutcome run_scenario(const ScenarioConfig& config, const std::filesystem::path& dir,
                        std::span<const Observer> observers = {});

// Accepts either a plain config or a meta.json written by run_scenario.
ScenarioConfig load_config(std::string_view text);

// Semiclassical view of a scenario: closed form and null-space solve.
struct SemiclassicalReport
{
    SemiclassicalModel model;
    SteadyCurrents analytic;
    NumericSteadyState numeric;
    double max_rel_discrepancy;
};
SemiclassicalReport semiclassical_report(const ScenarioConfig& config);
std::string semiclassical_json(const SemiclassicalReport& report);

// Figure presets.
std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name. semiclassical_table has no branches.
std::vector<ScenarioConfig> preset_branches(const std::string& name, bool fast);

struct PresetOutcome
{
    int code;
    std::vector<RunOutcome> branches;
};
// Observers for one branch. Called once per branch before the branches start;
// each branch only touches its own observers.
using ObserverFactory = std::function<std::vector<Observer>(const ScenarioConfig&)>;

// Branches run concurrently, each into <out>/<scenario_id>; summary.json goes to <out>.
PresetOutcome reproduce_preset(const std::string& name, const std::filesystem::path& out, bool fast,
                               const ObserverFactory& watch = {});

} // namespace ampsim

#endif
