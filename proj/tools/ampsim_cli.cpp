#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ampsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace ampsim;

namespace
{

std::string read_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("--config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void report(const ScenarioConfig& c, const RunOutcome& r, const fs::path& dir)
{
    if (!r.result)
    {
        std::cerr << c.scenario_id << ": " << r.diagnostic << "\n";
        return;
    }
    const SteadySummary& s = r.result->steady;
    const IntegratorHealth& h = r.result->series.health;
    std::cout << fmt::format("{}: eta {:.6f}  qdot_c/qdot_h {:.6f}  p_f/qdot_h {:.6f}  steady at {}  "
                             "trace drift {:.2e}  min eig {:.2e}  tail {:.2e}\n",
                             c.scenario_id, s.eta, s.qdot_c_over_qdot_h, s.p_f_over_qdot_h,
                             s.t ? fmt::format("{:g}/gamma", *s.t) : std::string("(not settled)"),
                             h.max_trace_drift, h.min_eigenvalue, h.max_tail_mass);
    std::cout << "  artifacts in " << dir.string() << "\n";
}

int run_simulate(const std::string& config_path, const std::string& out)
{
    const ScenarioConfig c = load_config(read_file(config_path));
    const fs::path dir = out.empty() ? resolve_output_dir(c) : fs::path(out);
    const RunOutcome r = run_scenario(c, dir);
    report(c, r, dir);
    return r.code;
}

int run_reproduce(std::string preset, const std::string& out, bool fast)
{
    const std::string suffix = "_fast";
    if (preset.size() > suffix.size() && preset.ends_with(suffix))
    {
        preset.resize(preset.size() - suffix.size());
        fast = true;
    }
    const fs::path dir = out.empty() ? default_output_root() / (fast ? preset + suffix : preset) : fs::path(out);
    const PresetOutcome p = reproduce_preset(preset, dir, fast);
    const auto configs = preset_branches(preset, fast);
    for (std::size_t k = 0; k < p.branches.size(); ++k)
        report(configs[k], p.branches[k], dir / configs[k].scenario_id);
    std::cout << "summary: " << (dir / "summary.json").string() << "\n";
    return p.code;
}

int run_semiclassical(const std::string& config_path, const std::string& out)
{
    const ScenarioConfig c = load_config(read_file(config_path));
    const std::string text = semiclassical_json(semiclassical_report(c));
    if (out.empty())
    {
        std::cout << text;
        return exit_code::ok;
    }
    std::ofstream os(out, std::ios::binary);
    if (!os)
        throw ConfigError("--out", "cannot write '" + out + "'");
    os << text;
    return exit_code::ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Three-level quantum amplifier simulator"};
    app.require_subcommand(1);

    std::string config_path, out, preset;
    bool fast = false;

    auto* simulate = app.add_subcommand("simulate", "Run one scenario from a config file or a previous meta.json");
    simulate->add_option("--config", config_path, "Scenario config (key = value) or meta.json")->required();
    simulate->add_option("--out", out, "Output directory (default: output_dir from the config)");

    auto* reproduce = app.add_subcommand("reproduce", "Run a figure preset");
    reproduce->add_option("preset", preset, "fig2 .. fig7 or semiclassical_table (suffix _fast allowed)")
        ->required();
    reproduce->add_option("--out", out, "Output directory");
    reproduce->add_flag("--fast", fast, "Use the CI-scale variant (lambda/gamma = 100)");

    auto* semiclassical = app.add_subcommand("semiclassical", "Semiclassical steady-state currents as JSON");
    semiclassical->add_option("--config", config_path, "Scenario config (key = value) or meta.json")->required();
    semiclassical->add_option("--out", out, "Write the JSON here instead of stdout");

    auto* presets = app.add_subcommand("presets", "List preset names");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return exit_code::config_error;
    }

    try
    {
        if (simulate->parsed())
            return run_simulate(config_path, out);
        if (reproduce->parsed())
            return run_reproduce(preset, out, fast);
        if (semiclassical->parsed())
            return run_semiclassical(config_path, out);
        if (presets->parsed())
        {
            for (const std::string& name : preset_names())
                std::cout << name << "\n";
            return exit_code::ok;
        }
    }
    catch (const ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_code::config_error;
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config_error;
    }
    return exit_code::ok;
}
