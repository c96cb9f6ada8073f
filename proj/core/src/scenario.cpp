#include "ampsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

namespace ampsim
{

namespace
{

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            return parts;
        start = pos + 1;
    }
}

double parse_real(const std::string& field, std::string_view text)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw ConfigError(field, fmt::format("expected a finite real number, got '{}'", text));
    return v;
}

int parse_int(const std::string& field, std::string_view text)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError(field, fmt::format("expected an integer, got '{}'", text));
    return v;
}

std::optional<double> parse_optional_real(const std::string& field, std::string_view text, std::string_view keyword)
{
    if (text == keyword)
        return std::nullopt;
    return parse_real(field, text);
}

std::string real(double v)
{
    return fmt::format("{}", v);
}

std::string optional_real(const std::optional<double>& v, std::string_view keyword)
{
    return v ? real(*v) : std::string(keyword);
}

constexpr std::pair<FieldKind, std::string_view> field_kind_names[] = {
    {FieldKind::vacuum, "vacuum"},
    {FieldKind::fock, "fock"},
    {FieldKind::coherent, "coherent"},
    {FieldKind::poisson_mixed, "poisson_mixed"},
    {FieldKind::thermal, "thermal"},
};

std::string_view field_kind_name(FieldKind k)
{
    for (const auto& [kind, name] : field_kind_names)
        if (kind == k)
            return name;
    return "?";
}

bool valid_id(std::string_view id)
{
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    }) && id != "." && id != "..";
}

struct Key
{
    std::string_view name;
    std::function<void(ScenarioConfig&, const std::string&, std::string_view)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

Key real_key(std::string_view name, double ScenarioConfig::*member)
{
    return {name, [member](ScenarioConfig& c, const std::string& f, std::string_view v) { c.*member = parse_real(f, v); },
            [member](const ScenarioConfig& c) { return real(c.*member); }};
}

Key int_key(std::string_view name, int ScenarioConfig::*member)
{
    return {name, [member](ScenarioConfig& c, const std::string& f, std::string_view v) { c.*member = parse_int(f, v); },
            [member](const ScenarioConfig& c) { return std::to_string(c.*member); }};
}

Key optional_key(std::string_view name, std::optional<double> ScenarioConfig::*member, std::string_view keyword)
{
    return {name,
            [member, keyword](ScenarioConfig& c, const std::string& f, std::string_view v) {
                c.*member = parse_optional_real(f, v, keyword);
            },
            [member, keyword](const ScenarioConfig& c) { return optional_real(c.*member, keyword); }};
}

const std::vector<Key>& keys()
{
    static const std::vector<Key> table = {
        {"scenario_id",
         [](ScenarioConfig& c, const std::string& f, std::string_view v) {
             if (!valid_id(v))
                 throw ConfigError(f, fmt::format("'{}' is not a valid id (letters, digits, '_', '-', '.')", v));
             c.scenario_id = std::string(v);
         },
         [](const ScenarioConfig& c) { return c.scenario_id; }},
        int_key("interaction_order", &ScenarioConfig::interaction_order),
        {"frame",
         [](ScenarioConfig& c, const std::string& f, std::string_view v) {
             if (v == "interaction")
                 c.frame = Frame::interaction;
             else if (v == "lab")
                 c.frame = Frame::lab;
             else
                 throw ConfigError(f, fmt::format("expected 'lab' or 'interaction', got '{}'", v));
         },
         [](const ScenarioConfig& c) { return std::string(to_string(c.frame)); }},
        real_key("omega_res_over_lambda", &ScenarioConfig::omega_res_over_lambda),
        real_key("lambda_over_gamma", &ScenarioConfig::lambda_over_gamma),
        real_key("omega31_over_res", &ScenarioConfig::omega31_over_res),
        real_key("omega32_over_res", &ScenarioConfig::omega32_over_res),
        real_key("omega1_over_res", &ScenarioConfig::omega1_over_res),
        optional_key("omega_f_over_res", &ScenarioConfig::omega_f_over_res, "resonant"),
        real_key("gamma_c_over_gamma_h", &ScenarioConfig::gamma_c_over_gamma_h),
        real_key("nbar_h", &ScenarioConfig::nbar_h),
        real_key("nbar_c", &ScenarioConfig::nbar_c),
        int_key("field_dim", &ScenarioConfig::field_dim),
        int_key("atom_level", &ScenarioConfig::atom_level),
        {"field_state",
         [](ScenarioConfig& c, const std::string& f, std::string_view v) {
             for (const auto& [kind, name] : field_kind_names)
                 if (name == v)
                 {
                     c.field_state = kind;
                     return;
                 }
             throw ConfigError(f, fmt::format("unknown field state '{}'", v));
         },
         [](const ScenarioConfig& c) { return std::string(field_kind_name(c.field_state)); }},
        int_key("fock_n", &ScenarioConfig::fock_n),
        real_key("field_mean", &ScenarioConfig::field_mean),
        real_key("coherent_re", &ScenarioConfig::coherent_re),
        real_key("coherent_im", &ScenarioConfig::coherent_im),
        real_key("max_tail_mass", &ScenarioConfig::max_tail_mass),
        optional_key("dt", &ScenarioConfig::dt, "auto"),
        real_key("t_max", &ScenarioConfig::t_max),
        real_key("sample_interval", &ScenarioConfig::sample_interval),
        int_key("guard_levels", &ScenarioConfig::guard_levels),
        real_key("guard_tol", &ScenarioConfig::guard_tol),
        real_key("trace_drift_tol", &ScenarioConfig::trace_drift_tol),
        real_key("steady_window", &ScenarioConfig::steady_window),
        real_key("steady_tol", &ScenarioConfig::steady_tol),
        {"snapshots",
         [](ScenarioConfig& c, const std::string& f, std::string_view v) {
             c.snapshots.clear();
             if (v == "none")
                 return;
             for (std::string_view item : split(v, ','))
                 c.snapshots.push_back(parse_real(f, item));
         },
         [](const ScenarioConfig& c) {
             if (c.snapshots.empty())
                 return std::string("none");
             std::string out;
             for (std::size_t k = 0; k < c.snapshots.size(); ++k)
                 out += (k ? ", " : "") + real(c.snapshots[k]);
             return out;
         }},
        {"phase_space",
         [](ScenarioConfig& c, const std::string& f, std::string_view v) {
             c.q_function = c.wigner = false;
             if (v == "none")
                 return;
             const auto items = split(v, ',');
             const auto has = [&](std::string_view x) { return std::count(items.begin(), items.end(), x); };
             if (has("Q") + has("W") != static_cast<long>(items.size()) || has("Q") > 1 || has("W") > 1)
                 throw ConfigError(f, fmt::format("expected none, Q, W or Q,W; got '{}'", v));
             c.q_function = has("Q") == 1;
             c.wigner = has("W") == 1;
         },
         [](const ScenarioConfig& c) {
             if (c.q_function && c.wigner)
                 return std::string("Q,W");
             return std::string(c.q_function ? "Q" : c.wigner ? "W" : "none");
         }},
        optional_key("grid_radius", &ScenarioConfig::grid_radius, "auto"),
        int_key("grid_points", &ScenarioConfig::grid_points),
        {"output_dir", [](ScenarioConfig& c, const std::string&, std::string_view v) { c.output_dir = std::string(v); },
         [](const ScenarioConfig& c) { return c.output_dir; }},
    };
    return table;
}

void require(bool ok, const char* field, const std::string& message)
{
    if (!ok)
        throw ConfigError(field, message);
}

} // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error(fmt::format("config field '{}': {}", field, message)), m_field(std::move(field))
{
}

void ScenarioConfig::validate() const
{
    require(valid_id(scenario_id), "scenario_id", "must be a non-empty id");
    require(interaction_order == 1 || interaction_order == 2, "interaction_order", "must be 1 or 2");
    require(omega_res_over_lambda > 0.0, "omega_res_over_lambda", "must be > 0");
    require(lambda_over_gamma > 0.0, "lambda_over_gamma", "must be > 0");
    require(omega32_over_res > 0.0, "omega32_over_res", "must be > 0");
    require(omega31_over_res > omega32_over_res, "omega31_over_res", "must exceed omega32_over_res");
    // omega_res is omega2 - omega1, so the two gaps must differ by exactly one unit.
    require(std::abs(omega31_over_res - omega32_over_res - 1.0) <= 1e-12, "omega32_over_res",
            fmt::format("omega31_over_res - omega32_over_res must be 1 (omega_res = omega2 - omega1), got {}",
                        omega31_over_res - omega32_over_res));
    require(!omega_f_over_res || *omega_f_over_res > 0.0, "omega_f_over_res", "must be > 0");
    require(gamma_c_over_gamma_h >= 0.0, "gamma_c_over_gamma_h", "must be >= 0");
    require(nbar_h >= 0.0, "nbar_h", "must be >= 0");
    require(nbar_c >= 0.0, "nbar_c", "must be >= 0");
    require(field_dim >= 2, "field_dim", "must be >= 2");
    require(atom_level >= 1 && atom_level <= 3, "atom_level", "must be 1, 2 or 3");
    require(fock_n >= 0 && fock_n < field_dim, "fock_n",
            fmt::format("must satisfy 0 <= fock_n < field_dim = {}", field_dim));
    require(field_mean >= 0.0, "field_mean", "must be >= 0");
    require(max_tail_mass > 0.0 && max_tail_mass < 1.0, "max_tail_mass", "must lie in (0, 1)");
    require(!dt || *dt > 0.0, "dt", "must be > 0 or auto");
    require(t_max >= 0.0, "t_max", "must be >= 0");
    require(sample_interval > 0.0, "sample_interval", "must be > 0");
    require(!dt || to_model_time(sample_interval) >= *dt * (1.0 - 1e-9), "sample_interval",
            "must be at least dt");
    require(guard_levels >= 1 && guard_levels <= field_dim, "guard_levels", "must lie in [1, field_dim]");
    require(guard_tol >= 0.0, "guard_tol", "must be >= 0");
    require(trace_drift_tol >= 0.0, "trace_drift_tol", "must be >= 0");
    require(steady_window > 0.0, "steady_window", "must be > 0");
    require(steady_tol > 0.0, "steady_tol", "must be > 0");
    for (std::size_t k = 0; k < snapshots.size(); ++k)
    {
        require(snapshots[k] >= 0.0 && snapshots[k] <= t_max, "snapshots",
                fmt::format("time {} outside [0, t_max = {}]", snapshots[k], t_max));
        require(k == 0 || snapshots[k] > snapshots[k - 1], "snapshots", "times must be strictly increasing");
    }
    require(!grid_radius || *grid_radius > 0.0, "grid_radius", "must be > 0 or auto");
    require(grid_points >= 2, "grid_points", "must be >= 2");

    try
    {
        model().validate();
    }
    catch (const UnsupportedConfiguration& e)
    {
        throw ConfigError("omega_f_over_res", e.what());
    }
    catch (const InvalidModel& e)
    {
        throw ConfigError("omega31_over_res", e.what());
    }
}

AmplifierModel ScenarioConfig::model() const
{
    const double res = omega_res_over_lambda;
    AmplifierModel m;
    m.omega1 = omega1_over_res * res;
    m.omega3 = m.omega1 + omega31_over_res * res;
    m.omega2 = m.omega1 + res;
    m.omega_f = omega_f_over_res ? *omega_f_over_res * res : res / interaction_order;
    m.lambda = 1.0;
    m.gamma_h = gamma_h();
    m.gamma_c = gamma_c_over_gamma_h * gamma_h();
    m.nbar_h = nbar_h;
    m.nbar_c = nbar_c;
    m.interaction_order = interaction_order;
    m.frame = frame;
    m.layout = HilbertLayout(field_dim);
    return m;
}

GridSpec ScenarioConfig::grid(double max_mean_photons) const
{
    const double radius = grid_radius ? *grid_radius : std::max(6.0, std::ceil(std::sqrt(max_mean_photons) + 5.0));
    return GridSpec::square(radius, grid_points);
}

IntegratorConfig ScenarioConfig::integrator(const MasterEquation& eq) const
{
    IntegratorConfig ic;
    ic.sample_interval = to_model_time(sample_interval);
    ic.dt = dt ? *dt : aligned_time_step(eq, ic.sample_interval);
    ic.t_max = to_model_time(t_max);
    ic.guard_levels = guard_levels;
    ic.guard_tol = guard_tol;
    ic.trace_drift_tol = trace_drift_tol;
    for (double t : snapshots)
        ic.snapshot_times.push_back(to_model_time(t));
    return ic;
}

DensityMatrix ScenarioConfig::initial_state() const
{
    FieldStateSpec field;
    switch (field_state)
    {
    case FieldKind::vacuum:
        field = field_states::Vacuum{};
        break;
    case FieldKind::fock:
        field = field_states::Fock{fock_n};
        break;
    case FieldKind::coherent:
        field = field_states::Coherent{cplx(coherent_re, coherent_im)};
        break;
    case FieldKind::poisson_mixed:
        field = field_states::PoissonMixed{field_mean};
        break;
    case FieldKind::thermal:
        field = field_states::Thermal{field_mean};
        break;
    }
    try
    {
        return build_joint_state(atom_states::Level{atom_level}, field, HilbertLayout(field_dim), max_tail_mass);
    }
    catch (const TruncationTooSmall& e)
    {
        throw ConfigError("field_dim", e.what());
    }
}

ScenarioConfig parse_config(std::string_view text)
{
    ScenarioConfig c;
    std::vector<std::string_view> seen;
    std::size_t line_no = 0;
    for (std::string_view raw : split(text, '\n'))
    {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("line {}", line_no), fmt::format("expected 'key = value', got '{}'", line));
        const std::string_view name = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto& table = keys();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == name; });
        if (it == table.end())
            throw ConfigError(std::string(name), "unknown key");
        if (std::find(seen.begin(), seen.end(), name) != seen.end())
            throw ConfigError(std::string(name), "given more than once");
        seen.push_back(it->name);
        if (value.empty() && name != "output_dir")
            throw ConfigError(std::string(name), "missing value");
        it->set(c, std::string(name), value);
    }
    c.validate();
    return c;
}

std::string serialize_config(const ScenarioConfig& config)
{
    std::string out;
    for (const Key& k : keys())
    {
        const std::string v = k.get(config);
        out += v.empty() ? fmt::format("{} =\n", k.name) : fmt::format("{} = {}\n", k.name, v);
    }
    return out;
}

ScenarioConfig load_config(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos || text[first] != '{')
        return parse_config(text);
    json meta;
    try
    {
        meta = json::parse(text);
    }
    catch (const json::exception& e)
    {
        throw ConfigError("meta.json", e.what());
    }
    if (!meta.contains("config_text") || !meta["config_text"].is_string())
        throw ConfigError("meta.json", "no 'config_text' entry");
    return parse_config(meta["config_text"].get<std::string>());
}

double aligned_time_step(const MasterEquation& eq, double sample_interval)
{
    const double base = default_time_step(eq);
    const double steps = std::ceil(sample_interval / base * (1.0 - 1e-12));
    return sample_interval / std::max(1.0, steps);
}

namespace
{

SteadySummary summarize(const ScenarioConfig& c, const TimeSeries& series)
{
    SteadySummary s{};
    const auto& samples = series.samples;
    const double window = c.to_model_time(c.steady_window);
    if (const auto t = detect_steady_state(samples, window, c.steady_tol))
        s.t = c.to_gamma_time(*t);

    const double t_end = samples.back().t;
    double n = 0.0;
    for (const ThermoSample& x : samples)
        if (x.t >= t_end - window * (1.0 + 1e-9))
        {
            s.qdot_h += x.qdot_h;
            s.qdot_c += x.qdot_c;
            s.p_f += x.p_f;
            n += 1.0;
        }
    s.qdot_h /= n;
    s.qdot_c /= n;
    s.p_f /= n;
    const bool defined = std::abs(s.qdot_h) >= eta_threshold;
    s.eta = defined ? s.p_f / s.qdot_h : nan;
    s.qdot_c_over_qdot_h = defined ? s.qdot_c / s.qdot_h : nan;
    s.p_f_over_qdot_h = s.eta;

    // After the detected steady time, or over the final window if none was found.
    const double from = s.t ? c.to_model_time(*s.t) : t_end - window * (1.0 + 1e-9);
    s.first_law_residual = 0.0;
    for (const ThermoSample& x : samples)
        if (x.t >= from)
            s.first_law_residual = std::max(s.first_law_residual,
                                            std::abs(x.qdot_h + x.qdot_c - x.p_f) / std::abs(x.qdot_h));
    return s;
}

} // namespace

ScenarioResult simulate(const ScenarioConfig& config, std::span<const Observer> observers)
{
    config.validate();
    const AmplifierModel model = config.model();
    const MasterEquation eq(model);
    const IntegratorConfig ic = config.integrator(eq);
    const DensityMatrix rho0 = config.initial_state();

    ScenarioResult r{config, model, ic.dt, evolve(rho0, model, ic, observers), {}, {}, std::nullopt};
    r.steady = summarize(config, r.series);

    std::vector<DensityMatrix> fields;
    double max_mean = 0.0;
    for (const Snapshot& snap : r.series.snapshots)
    {
        fields.push_back(partial_trace(snap.rho, Subsystem::field));
        max_mean = std::max(max_mean, expectation(fields.back(), number_op(config.field_dim)).real());
    }
    if (config.q_function || config.wigner)
        r.grid = config.grid(max_mean);
    for (std::size_t k = 0; k < fields.size(); ++k)
    {
        const DensityMatrix& field = fields[k];
        FieldSnapshot fs{config.to_gamma_time(r.series.snapshots[k].t), field, parity_expectation(field), std::nullopt,
                         std::nullopt};
        if (config.q_function)
            fs.q = q_function(field, *r.grid, CoveragePolicy::require);
        if (config.wigner)
            fs.w = wigner_function(field, *r.grid, CoveragePolicy::require);
        r.snapshots.push_back(std::move(fs));
    }
    return r;
}

fs::path default_output_root()
{
    if (const char* root = std::getenv("AMPSIM_OUTPUT_ROOT"); root && *root)
        return root;
    return "ampsim-output";
}

fs::path resolve_output_dir(const ScenarioConfig& config)
{
    if (!config.output_dir.empty())
        return config.output_dir;
    return default_output_root() / config.scenario_id;
}

namespace
{

json grid_json(const GridSpec& g)
{
    return {{"re_min", g.re_min}, {"re_max", g.re_max}, {"n_re", g.n_re},
            {"im_min", g.im_min}, {"im_max", g.im_max}, {"n_im", g.n_im}};
}

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot write " + path.string());
    os << text;
}

std::string snapshot_stem(const char* kind, double t)
{
    return fmt::format("{}_t{}", kind, t);
}

json write_snapshots(const ScenarioResult& r, const fs::path& dir)
{
    json files = json::array();
    if (r.snapshots.empty() || !(r.config.q_function || r.config.wigner))
        return files;
    fs::create_directories(dir / "snapshots");
    const bool named = r.snapshots.size() == r.config.snapshots.size();
    for (std::size_t k = 0; k < r.snapshots.size(); ++k)
    {
        const FieldSnapshot& s = r.snapshots[k];
        const double label = named ? r.config.snapshots[k] : s.t;
        for (const auto& [kind, grid] : {std::pair{"Q", &s.q}, std::pair{"W", &s.w}})
        {
            if (!grid->has_value())
                continue;
            const PhaseSpaceGrid& g = **grid;
            const std::string stem = snapshot_stem(kind, label);
            std::ostringstream csv;
            write_grid_csv(csv, g);
            write_text(dir / "snapshots" / (stem + ".csv"), csv.str());

            const NegativityMetrics neg = negativity_metrics(g);
            json side = {{"scenario_id", r.config.scenario_id},
                         {"function", kind},
                         {"t", label},
                         {"t_step_grid", s.t},
                         {"grid", grid_json(g.spec)},
                         {"integral", g.integral()},
                         {"max_abs", g.max_abs()},
                         {"min_value", neg.min_value},
                         {"min_location", {neg.min_location.real(), neg.min_location.imag()}},
                         {"negative_volume", neg.negative_volume},
                         {"parity", s.parity},
                         {"value_at_origin",
                          kind == std::string_view("W") ? wigner_at(s.field, 0.0) : q_function_at(s.field, 0.0)}};
            write_text(dir / "snapshots" / (stem + ".json"), side.dump(2) + "\n");
            files.push_back("snapshots/" + stem + ".csv");
        }
    }
    return files;
}

json resolved_json(const ScenarioConfig& c)
{
    const AmplifierModel m = c.model();
    return {{"lambda", m.lambda}, {"gamma_h", m.gamma_h}, {"gamma_c", m.gamma_c}, {"omega1", m.omega1},
            {"omega2", m.omega2}, {"omega3", m.omega3},   {"omega_f", m.omega_f}, {"time_unit", "1/gamma_h"},
            {"energy_unit", "lambda"}};
}

json config_json(const ScenarioConfig& c)
{
    json out = json::object();
    for (const Key& k : keys())
        out[std::string(k.name)] = k.get(c);
    return out;
}

void write_meta(const fs::path& dir, const ScenarioConfig& c, int code, const json& diagnostic,
                const ScenarioResult* r, const json& artifacts)
{
    json meta;
    meta["scenario_id"] = c.scenario_id;
    meta["status"] = code == exit_code::ok ? "ok" : code == exit_code::config_error ? "config_error" : "integrator_abort";
    meta["exit_code"] = code;
    meta["diagnostic"] = diagnostic;
    meta["config_text"] = serialize_config(c);
    meta["config"] = config_json(c);
    meta["resolved"] = resolved_json(c);
    if (r)
    {
        meta["resolved"]["dt"] = r->dt;
        meta["resolved"]["steps"] = r->series.health.steps;
        const IntegratorHealth& h = r->series.health;
        meta["health"] = {{"max_trace_drift", h.max_trace_drift},
                          {"min_eigenvalue", h.min_eigenvalue},
                          {"max_tail_mass", h.max_tail_mass},
                          {"steady_state_time", optional_number(r->steady.t)}};
        const SteadySummary& s = r->steady;
        meta["final_window"] = {{"qdot_h", s.qdot_h},
                                {"qdot_c", s.qdot_c},
                                {"p_f", s.p_f},
                                {"eta", number_or_null(s.eta)},
                                {"qdot_c_over_qdot_h", number_or_null(s.qdot_c_over_qdot_h)},
                                {"p_f_over_qdot_h", number_or_null(s.p_f_over_qdot_h)},
                                {"first_law_residual", number_or_null(s.first_law_residual)}};
    }
    meta["artifacts"] = artifacts;
    write_text(dir / "meta.json", meta.dump(2) + "\n");
}

} // namespace

RunOutcome run_scenario(const ScenarioConfig& config, const fs::path& dir, std::span<const Observer> observers)
{
    fs::create_directories(dir);
    RunOutcome out{exit_code::ok, std::nullopt, {}};
    json diagnostic = nullptr;
    try
    {
        out.result = simulate(config, observers);
    }
    catch (const IntegratorAbort& e)
    {
        out.code = exit_code::integrator_abort;
        out.diagnostic = fmt::format("integration aborted at t = {}/gamma: {} = {}", config.to_gamma_time(e.time()),
                                     e.metric(), e.value());
        diagnostic = {{"message", out.diagnostic},
                      {"metric", e.metric()},
                      {"time", config.to_gamma_time(e.time())},
                      {"value", number_or_null(e.value())}};
    }
    catch (const ConfigError& e)
    {
        out.code = exit_code::config_error;
        out.diagnostic = e.what();
        diagnostic = {{"message", e.what()}, {"field", e.field()}};
    }
    catch (const GridCoverage& e)
    {
        out.code = exit_code::config_error;
        out.diagnostic = e.what();
        diagnostic = {{"message", e.what()}, {"field", "grid_radius"}};
    }

    json artifacts = json::array();
    if (out.result)
    {
        std::ostringstream csv;
        write_thermo_csv(csv, out.result->series.samples, config.lambda_over_gamma);
        write_text(dir / "thermo.csv", csv.str());
        artifacts.push_back("thermo.csv");
        for (auto& f : write_snapshots(*out.result, dir))
            artifacts.push_back(f);
    }
    artifacts.push_back("meta.json");
    write_meta(dir, config, out.code, diagnostic, out.result ? &*out.result : nullptr, artifacts);
    return out;
}

SemiclassicalReport semiclassical_report(const ScenarioConfig& config)
{
    config.validate();
    const SemiclassicalModel m = SemiclassicalModel::from(config.model());
    SemiclassicalReport r{m, sc_analytic_currents(m), sc_numeric_steady_state(m), 0.0};
    auto rel = [](double a, double b) {
        const double scale = std::max(std::abs(a), std::abs(b));
        return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
    };
    const SteadyCurrents& a = r.analytic;
    const SteadyCurrents& n = r.numeric.currents;
    r.max_rel_discrepancy = std::max({rel(a.qdot_h_sc, n.qdot_h_sc), rel(a.qdot_c_sc, n.qdot_c_sc),
                                      rel(a.p_sc, n.p_sc), rel(a.p_sc, r.numeric.power_explicit)});
    return r;
}

namespace
{

json semiclassical_value(const SemiclassicalReport& r)
{
    const SemiclassicalModel& m = r.model;
    const SteadyCurrents& a = r.analytic;
    const SteadyCurrents& n = r.numeric.currents;
    json populations = json::array();
    for (int k = 0; k < 3; ++k)
        populations.push_back(r.numeric.rho(k, k).real());
    return {{"params",
             {{"omega1", m.omega1},
              {"omega2", m.omega2},
              {"omega3", m.omega3},
              {"omega_f", m.omega_f},
              {"lambda", m.lambda},
              {"gamma_h", m.gamma_h},
              {"gamma_c", m.gamma_c},
              {"nbar_h", m.nbar_h},
              {"nbar_c", m.nbar_c}}},
            {"qdot_h_sc", a.qdot_h_sc},
            {"qdot_c_sc", a.qdot_c_sc},
            {"p_sc", a.p_sc},
            {"eta_sc", number_or_null(a.eta_sc)},
            {"alpha_sc", a.alpha_sc},
            {"beta_sc", a.beta_sc},
            {"gamma_sc", a.gamma_sc},
            {"gap_ratio_efficiency", sc_efficiency(m)},
            {"numeric",
             {{"qdot_h_sc", n.qdot_h_sc},
              {"qdot_c_sc", n.qdot_c_sc},
              {"p_sc", n.p_sc},
              {"p_explicit", r.numeric.power_explicit},
              {"eta_sc", number_or_null(n.eta_sc)},
              {"populations", populations}}},
            {"max_rel_discrepancy", r.max_rel_discrepancy}};
}

} // namespace

std::string semiclassical_json(const SemiclassicalReport& report)
{
    return semiclassical_value(report).dump(2) + "\n";
}

namespace
{

ScenarioConfig reference_base(bool fast)
{
    ScenarioConfig c;
    c.lambda_over_gamma = fast ? 100.0 : 1000.0;
    c.field_dim = fast ? 60 : 100;
    return c;
}

ScenarioConfig branch(const std::string& id, bool fast, int order, int atom_level, FieldKind kind, double n)
{
    ScenarioConfig c = reference_base(fast);
    c.scenario_id = fast ? id + "_fast" : id;
    c.interaction_order = order;
    c.atom_level = atom_level;
    c.field_state = kind;
    if (kind == FieldKind::fock)
        c.fock_n = static_cast<int>(n);
    else
        c.field_mean = n;
    return c;
}

std::vector<ScenarioConfig> phase_space_pair(const std::string& fig, bool fast, int order, int n,
                                             std::vector<double> times, bool q, bool w)
{
    std::vector<ScenarioConfig> out = {
        branch(fmt::format("{}_fock{}", fig, n), fast, order, 1, FieldKind::fock, n),
        branch(fmt::format("{}_poisson{}", fig, n), fast, order, 1, FieldKind::poisson_mixed, n),
    };
    for (ScenarioConfig& c : out)
    {
        c.snapshots = times;
        c.q_function = q;
        c.wigner = w;
        c.grid_radius = 9.0;
    }
    return out;
}

// Thermo and phase-space comparison of a two-branch preset.
json compare_pair(const ScenarioResult& a, const ScenarioResult& b)
{
    const ThermoSample& fa = a.series.samples.back();
    const ThermoSample& fb = b.series.samples.back();
    auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(x), std::abs(y)); };
    json out = {{"t_final", a.config.to_gamma_time(fa.t)},
                {"p_f", {fa.p_f, fb.p_f}},
                {"eta", {number_or_null(fa.eta), number_or_null(fb.eta)}},
                {"p_f_rel_diff", rel(fa.p_f, fb.p_f)},
                {"eta_rel_diff", number_or_null(rel(fa.eta, fb.eta))}};
    json snaps = json::array();
    for (std::size_t k = 0; k < std::min(a.snapshots.size(), b.snapshots.size()); ++k)
    {
        const FieldSnapshot& sa = a.snapshots[k];
        const FieldSnapshot& sb = b.snapshots[k];
        json entry = {{"t", sa.t}, {"parity", {sa.parity, sb.parity}}};
        for (const auto& [kind, ga, gb] :
             {std::tuple{"Q", &sa.q, &sb.q}, std::tuple{"W", &sa.w, &sb.w}})
        {
            if (!ga->has_value() || !gb->has_value())
                continue;
            const double peak = std::max((*ga)->max_abs(), (*gb)->max_abs());
            const double dist = grid_distance(**ga, **gb, GridNorm::max_abs);
            entry[kind] = {{"max_abs_distance", dist},
                           {"peak", peak},
                           {"relative_distance", dist / peak},
                           {"min_value", {negativity_metrics(**ga).min_value, negativity_metrics(**gb).min_value}}};
        }
        snaps.push_back(entry);
    }
    out["snapshots"] = snaps;
    return out;
}

json semiclassical_table(bool fast)
{
    ScenarioConfig c = reference_base(fast);
    c.scenario_id = fast ? "semiclassical_table_fast" : "semiclassical_table";
    json rows = json::array();
    for (double lg : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0})
    {
        c.lambda_over_gamma = lg;
        rows.push_back(semiclassical_value(semiclassical_report(c)));
        rows.back()["lambda_over_gamma"] = lg;
    }
    c = reference_base(fast);
    return {{"reference_parameters", semiclassical_value(semiclassical_report(c))}, {"lambda_over_gamma_sweep", rows}};
}

} // namespace

std::vector<std::string> preset_names()
{
    return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "semiclassical_table"};
}

std::vector<ScenarioConfig> preset_branches(const std::string& name, bool fast)
{
    std::vector<ScenarioConfig> out;
    // Step sizes in 1/lambda, chosen by step halving (changes below 1e-6 of
    // each thermo column's peak). Poisson-mixed fields have the widest photon
    // distribution and set the step for the two-photon pairs.
    double full_dt = 0.001, fast_dt = 0.00125;
    if (name == "fig2")
    {
        out = {branch("fig2_order2", fast, 2, 2, FieldKind::vacuum, 0),
               branch("fig2_order1", fast, 1, 2, FieldKind::vacuum, 0)};
        full_dt = 0.0025;
        fast_dt = 0.005;
    }
    else if (name == "fig3")
        out = phase_space_pair("fig3", fast, 2, 4, {}, false, false);
    else if (name == "fig4")
        out = phase_space_pair("fig4", fast, 2, 4, {0.0, 0.1, 8.0}, true, false);
    else if (name == "fig5")
        out = phase_space_pair("fig5", fast, 2, 4, {0.0, 0.1, 8.0}, false, true);
    else if (name == "fig6")
    {
        out = phase_space_pair("fig6", fast, 1, 4, {0.0, 0.1, 10.0}, false, true);
        full_dt = 0.0025;
        fast_dt = 0.005;
    }
    else if (name == "fig7")
        out = phase_space_pair("fig7", fast, 2, 3, {0.0, 0.1, 8.0}, false, true);
    else if (name == "semiclassical_table")
        return {};
    else
        throw ConfigError("preset", fmt::format("unknown preset '{}'", name));
    for (ScenarioConfig& c : out)
        c.dt = fast ? fast_dt : full_dt;
    return out;
}

PresetOutcome reproduce_preset(const std::string& name, const fs::path& out, bool fast, const ObserverFactory& watch)
{
    std::vector<ScenarioConfig> configs = preset_branches(name, fast);
    fs::create_directories(out);
    PresetOutcome result{exit_code::ok, {}};
    json summary = {{"preset", name}, {"fast", fast}};

    if (name == "semiclassical_table")
    {
        write_text(out / "semiclassical_table.json", semiclassical_table(fast).dump(2) + "\n");
        summary["artifacts"] = {"semiclassical_table.json"};
        write_text(out / "summary.json", summary.dump(2) + "\n");
        return result;
    }

    std::vector<std::future<RunOutcome>> jobs;
    for (ScenarioConfig& c : configs)
    {
        c.output_dir = (out / c.scenario_id).string();
        std::vector<Observer> obs = watch ? watch(c) : std::vector<Observer>{};
        jobs.push_back(std::async(std::launch::async, [c, obs = std::move(obs)] { return run_scenario(c, c.output_dir, obs); }));
    }
    json branches = json::array();
    for (std::size_t k = 0; k < jobs.size(); ++k)
    {
        RunOutcome r = jobs[k].get();
        result.code = std::max(result.code, r.code);
        json entry = {{"scenario_id", configs[k].scenario_id}, {"exit_code", r.code}};
        if (r.result)
        {
            const SteadySummary& s = r.result->steady;
            entry["steady_state_time"] = optional_number(s.t);
            entry["final_window_eta"] = number_or_null(s.eta);
            entry["qdot_c_over_qdot_h"] = number_or_null(s.qdot_c_over_qdot_h);
            entry["p_f_over_qdot_h"] = number_or_null(s.p_f_over_qdot_h);
            entry["first_law_residual"] = number_or_null(s.first_law_residual);
        }
        else
            entry["diagnostic"] = r.diagnostic;
        branches.push_back(entry);
        result.branches.push_back(std::move(r));
    }
    summary["branches"] = branches;
    if (result.branches.size() == 2 && result.branches[0].result && result.branches[1].result)
        summary["comparison"] = compare_pair(*result.branches[0].result, *result.branches[1].result);
    write_text(out / "summary.json", summary.dump(2) + "\n");
    return result;
}

} // namespace ampsim
