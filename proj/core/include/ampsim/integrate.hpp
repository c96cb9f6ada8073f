#ifndef AMPSIM_INTEGRATE_HPP
#define AMPSIM_INTEGRATE_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ampsim/thermo.hpp"

namespace ampsim
{

// Times are in the model's time unit (1/lambda when lambda = 1).
struct IntegratorConfig
{
    double dt = 0.02;
    double t_max = 0.0;
    double sample_interval = 1.0;
    int guard_levels = 5;
    double guard_tol = 1e-6;
    double trace_drift_tol = 1e-8;
    double positivity_tol = negativity_failure;
    std::vector<double> snapshot_times;

    void validate() const;
};

// Explicit step size for which RK4 is stable on the generator: 0.9 * 2.6 / bound.
double stable_time_step(const MasterEquation& eq);

// min(0.02, stable_time_step): the preferred dt for resonant interaction-frame runs.
double default_time_step(const MasterEquation& eq);

struct Snapshot
{
    double t;
    DensityMatrix rho;
};

struct IntegratorHealth
{
    double max_trace_drift = 0.0;
    double min_eigenvalue = 0.0;
    double max_tail_mass = 0.0;
    long steps = 0;
};

struct TimeSeries
{
    std::vector<double> times;
    std::vector<ThermoSample> samples;
    std::vector<Snapshot> snapshots;
    DensityMatrix final_state;
    IntegratorHealth health;
};

// Thrown when a monitored health metric trips; carries where and what.
class IntegratorAbort : public Error
{
public:
    IntegratorAbort(double t, std::string metric, double value);

    double time() const { return m_time; }
    const std::string& metric() const { return m_metric; }
    double value() const { return m_value; }

private:
    double m_time;
    std::string m_metric;
    double m_value;
};

struct GuardResult
{
    bool pass;
    double tail_mass;
};

// Population in the top guard_levels Fock states, summed over the atom.
GuardResult truncation_guard(const DensityMatrix& rho, const HilbertLayout& layout, int guard_levels,
                             double guard_tol);
double tail_mass(const Matrix& rho, const HilbertLayout& layout, int guard_levels);

// Classical RK4 with preallocated stage storage for repeated stepping.
class Rk4Stepper
{
public:
    explicit Rk4Stepper(const MasterEquation& eq);

    // Advances rho in place and re-symmetrizes it to (rho + rho^dag)/2.
    void step(Matrix& rho, double dt);

private:
    const MasterEquation& m_eq;
    Matrix m_k;
    Matrix m_acc;
    Matrix m_stage;
};

DensityMatrix rk4_step(const DensityMatrix& rho, const AmplifierModel& model, double dt);

using Observer = std::function<void(double t, const DensityMatrix& rho)>;

/*
 * Fixed-step evolution from rho0 to t_max.
 *
 * Sample and snapshot times are rounded to the step grid; the recorded
 * times are the grid times actually reached. A thermo sample is taken at
 * t = 0, every sample_interval and at t_max. At each sample the trace drift,
 * minimum eigenvalue and truncation tail are checked and any violation (or
 * a NaN) throws IntegratorAbort. No renormalization is ever applied.
 *
 * Stepping runs on the ReducedGenerator seeded with rho0, so only entries
 * the dynamics can reach are integrated.
 */
TimeSeries evolve(const DensityMatrix& rho0, const AmplifierModel& model, const IntegratorConfig& config,
                  std::span<const Observer> observers = {});

} // namespace ampsim

#endif
