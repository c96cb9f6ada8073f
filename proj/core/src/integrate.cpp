#include "ampsim/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

namespace ampsim
{

namespace
{

constexpr double rk4_stability_radius = 2.6;

long to_steps(double t, double dt)
{
    return std::lround(t / dt);
}

// RK4 on the packed entries of a ReducedGenerator.
class PackedRk4
{
public:
    explicit PackedRk4(const ReducedGenerator& gen) : m_gen(gen) {}

    void step(ReducedGenerator::Vector& y, double dt)
    {
        m_gen.apply(y, m_k);
        m_acc = m_k;
        m_stage = y + (0.5 * dt) * m_k;
        m_gen.apply(m_stage, m_k);
        m_acc += 2.0 * m_k;
        m_stage = y + (0.5 * dt) * m_k;
        m_gen.apply(m_stage, m_k);
        m_acc += 2.0 * m_k;
        m_stage = y + dt * m_k;
        m_gen.apply(m_stage, m_k);
        m_acc += m_k;
        y += (dt / 6.0) * m_acc;
        m_gen.symmetrize(y);
    }

private:
    const ReducedGenerator& m_gen;
    ReducedGenerator::Vector m_k, m_acc, m_stage;
};

} // namespace

void IntegratorConfig::validate() const
{
    if (!(dt > 0.0))
        throw InvalidArgument("dt must be > 0");
    if (!(t_max >= 0.0))
        throw InvalidArgument("t_max must be >= 0");
    if (!(sample_interval >= dt * (1.0 - 1e-9)))
        throw InvalidArgument("sample_interval must be >= dt");
    if (guard_levels < 1)
        throw InvalidArgument("guard_levels must be >= 1");
    if (!(guard_tol >= 0.0) || !(trace_drift_tol >= 0.0) || !(positivity_tol >= 0.0))
        throw InvalidArgument("tolerances must be >= 0");
    for (double t : snapshot_times)
        if (!(t >= 0.0) || t > t_max * (1.0 + 1e-12))
            throw InvalidArgument(fmt::format("snapshot time {} outside [0, t_max = {}]", t, t_max));
}

double stable_time_step(const MasterEquation& eq)
{
    const double bound = eq.spectral_radius_bound();
    if (bound <= 0.0)
        return std::numeric_limits<double>::infinity();
    return 0.9 * rk4_stability_radius / bound;
}

double default_time_step(const MasterEquation& eq)
{
    return std::min(0.02, stable_time_step(eq));
}

IntegratorAbort::IntegratorAbort(double t, std::string metric, double value)
    : Error(fmt::format("integration aborted at t = {}: {} = {}", t, metric, value)),
      m_time(t), m_metric(std::move(metric)), m_value(value)
{
}

double tail_mass(const Matrix& rho, const HilbertLayout& layout, int guard_levels)
{
    const int n = layout.field_dim();
    const int k = std::min(guard_levels, n);
    double mass = 0.0;
    for (int level = 1; level <= 3; ++level)
        for (int f = n - k; f < n; ++f)
            mass += rho(layout.index(level, f), layout.index(level, f)).real();
    return mass;
}

GuardResult truncation_guard(const DensityMatrix& rho, const HilbertLayout& layout, int guard_levels,
                             double guard_tol)
{
    if (!(rho.space() == Space::joint(layout)))
        throw LayoutMismatch("truncation_guard: state is not on the given joint layout");
    if (guard_levels < 1)
        throw InvalidArgument("guard_levels must be >= 1");
    const double mass = tail_mass(rho.matrix(), layout, guard_levels);
    return {mass <= guard_tol, mass};
}

Rk4Stepper::Rk4Stepper(const MasterEquation& eq) : m_eq(eq)
{
}

void Rk4Stepper::step(Matrix& rho, double dt)
{
    // k1
    m_eq.apply(rho, m_k);
    m_acc = m_k;
    m_stage = rho + (0.5 * dt) * m_k;
    // k2
    m_eq.apply(m_stage, m_k);
    m_acc += 2.0 * m_k;
    m_stage = rho + (0.5 * dt) * m_k;
    // k3
    m_eq.apply(m_stage, m_k);
    m_acc += 2.0 * m_k;
    m_stage = rho + dt * m_k;
    // k4
    m_eq.apply(m_stage, m_k);
    m_acc += m_k;

    rho += (dt / 6.0) * m_acc;
    m_stage = 0.5 * (rho + rho.adjoint());
    rho.swap(m_stage);
}

DensityMatrix rk4_step(const DensityMatrix& rho, const AmplifierModel& model, double dt)
{
    if (!(rho.space() == Space::joint(model.layout)))
        throw LayoutMismatch("rk4_step: state is not on the model's joint layout");
    const MasterEquation eq(model);
    Rk4Stepper stepper(eq);
    Matrix m = rho.matrix();
    stepper.step(m, dt);
    return DensityMatrix::unchecked(rho.space(), std::move(m));
}

TimeSeries evolve(const DensityMatrix& rho0, const AmplifierModel& model, const IntegratorConfig& config,
                  std::span<const Observer> observers)
{
    config.validate();
    if (!(rho0.space() == Space::joint(model.layout)))
        throw LayoutMismatch("evolve: initial state is not on the model's joint layout");

    const MasterEquation eq(model);
    const ThermoEvaluator thermo(model);
    const ReducedGenerator gen(eq, rho0.matrix());
    PackedRk4 stepper(gen);

    const double dt = config.dt;
    const long total_steps = to_steps(config.t_max, dt);
    const long sample_every = std::max(1L, to_steps(config.sample_interval, dt));
    std::set<long> snapshot_steps;
    for (double t : config.snapshot_times)
        snapshot_steps.insert(std::min(total_steps, to_steps(t, dt)));

    TimeSeries series{{}, {}, {}, rho0, {}};
    series.health.min_eigenvalue = std::numeric_limits<double>::infinity();
    ReducedGenerator::Vector y = gen.gather(rho0.matrix());
    Matrix rho = rho0.matrix();
    const Space space = rho0.space();

    auto record = [&](long step) {
        const double t = static_cast<double>(step) * dt;
        if (!rho.allFinite())
            throw IntegratorAbort(t, "nan", std::numeric_limits<double>::quiet_NaN());
        ThermoSample s = thermo.sample(rho, t);
        const double drift = std::abs(s.trace - 1.0);
        const double tail = tail_mass(rho, model.layout, config.guard_levels);
        IntegratorHealth& h = series.health;
        h.max_trace_drift = std::max(h.max_trace_drift, drift);
        h.min_eigenvalue = std::min(h.min_eigenvalue, s.min_eigenvalue);
        h.max_tail_mass = std::max(h.max_tail_mass, tail);

        if (!std::isfinite(s.trace) || !std::isfinite(s.e_total) || !std::isfinite(s.qdot_h))
            throw IntegratorAbort(t, "nan", s.trace);
        if (drift > config.trace_drift_tol)
            throw IntegratorAbort(t, "trace_drift", drift);
        if (s.min_eigenvalue < -config.positivity_tol)
            throw IntegratorAbort(t, "min_eigenvalue", s.min_eigenvalue);
        if (tail > config.guard_tol)
            throw IntegratorAbort(t, "tail_mass", tail);

        series.times.push_back(t);
        series.samples.push_back(s);
        if (!observers.empty())
        {
            const DensityMatrix view = DensityMatrix::unchecked(space, rho);
            for (const Observer& obs : observers)
                obs(t, view);
        }
    };

    auto snapshot = [&](long step) {
        series.snapshots.push_back(Snapshot{static_cast<double>(step) * dt, DensityMatrix::unchecked(space, rho)});
    };

    record(0);
    if (snapshot_steps.contains(0))
        snapshot(0);

    for (long step = 1; step <= total_steps; ++step)
    {
        stepper.step(y, dt);
        const bool sample = step % sample_every == 0 || step == total_steps;
        const bool snap = snapshot_steps.contains(step);
        if (!sample && !snap)
            continue;
        gen.scatter(y, rho);
        if (sample)
            record(step);
        if (snap)
            snapshot(step);
    }

    series.health.steps = total_steps;
    gen.scatter(y, rho);
    series.final_state = DensityMatrix::unchecked(space, std::move(rho));
    return series;
}

} // namespace ampsim
