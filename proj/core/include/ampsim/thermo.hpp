#ifndef AMPSIM_THERMO_HPP
#define AMPSIM_THERMO_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <span>

#include "ampsim/liouville.hpp"

namespace ampsim
{

/*
 * One time point of the energy and entropy bookkeeping.
 *
 * Heat currents are Tr{D_bath[rho] (H_a + H_int)}, positive when energy
 * enters the system; p_f = -i Tr{rho [H_f, H_int]} is the power delivered to
 * the field. All energies use the lab-frame H_a, H_f and H_int, which is
 * also correct for interaction-frame states at resonance.
 */
struct ThermoSample
{
    double t = 0.0;
    double e_total = 0.0;
    double e_atom = 0.0;
    double e_field = 0.0;
    double e_int = 0.0;
    double s_atom = 0.0;
    double s_field = 0.0;
    double s_total = 0.0;
    double qdot_h = 0.0;
    double qdot_c = 0.0;
    double p_f = 0.0;
    // NaN when |qdot_h| < eta_threshold.
    double eta = 0.0;

    // Diagnostics, not part of the CSV schema.
    std::array<double, 3> atom_populations{};
    double trace = 1.0;
    double min_eigenvalue = 0.0;
};

inline constexpr double eta_threshold = 1e-12;

bool eta_defined(const ThermoSample& s);

class ThermoEvaluator
{
public:
    explicit ThermoEvaluator(const AmplifierModel& model);

    const AmplifierModel& model() const { return m_model; }

    double heat_current(const Matrix& rho, Bath bath) const;
    double field_power(const Matrix& rho) const;
    ThermoSample sample(const Matrix& rho, double t) const;

    // -i [H_f, H_int], computed numerically from the sparse operators.
    const SparseMatrix& power_operator() const { return m_power_op; }

private:
    AmplifierModel m_model;
    SparseMatrix m_h_atom;
    SparseMatrix m_h_field;
    SparseMatrix m_h_int;
    SparseMatrix m_h_quasi; // H_a + H_int
    SparseMatrix m_power_op;
};

double heat_current(const DensityMatrix& rho, const AmplifierModel& model, Bath bath);
double field_power(const DensityMatrix& rho, const AmplifierModel& model);
ThermoSample thermo_sample(const DensityMatrix& rho, const AmplifierModel& model, double t);

// Tr[rho A] for sparse A.
cplx trace_product(const Matrix& rho, const SparseMatrix& a);

/*
 * Earliest time after which qdot_h, qdot_c, p_f and the three atomic
 * populations all stay flat: every trailing window of length `window` from
 * that point on has a range below tol times the quantity's magnitude over
 * the final window. Quantities whose final magnitude is below tol of their
 * peak are measured against the peak instead. Needs at least two windows of
 * samples.
 */
std::optional<double> detect_steady_state(std::span<const ThermoSample> samples, double window, double tol);

inline constexpr const char* thermo_csv_header = "t,e_total,e_atom,e_field,e_int,s_atom,s_field,s_total,qdot_h,qdot_c,p_f,eta";

// Times are divided by time_unit (e.g. 1/gamma to report in units of 1/gamma).
// Reals use the shortest representation that reads back to the same double.
void write_thermo_csv(std::ostream& os, std::span<const ThermoSample> samples, double time_unit);

} // namespace ampsim

#endif
