#ifndef AMPSIM_SEMICLASSICAL_HPP
#define AMPSIM_SEMICLASSICAL_HPP

#include "ampsim/liouville.hpp"

namespace ampsim
{

/*
 * Three-level atom driven by a classical two-photon field,
 *   H = H_a + lambda (sigma12 e^{2 i omega_f t} + sigma12^dag e^{-2 i omega_f t}),
 * with the same hot (1<->3) and cold (2<->3) thermal dissipators as the
 * quantized amplifier. Only the resonant case 2 omega_f = omega2 - omega1 is
 * supported.
 */
struct SemiclassicalModel
{
    double omega1 = 0.0;
    double omega2 = 1.0;
    double omega3 = 1.2;
    double omega_f = 0.5;
    double lambda = 1.0;
    double gamma_h = 1.0;
    double gamma_c = 1.0;
    double nbar_h = 0.0;
    double nbar_c = 0.0;

    static SemiclassicalModel from(const AmplifierModel& m);
    void validate() const;
};

struct SteadyCurrents
{
    double qdot_h_sc = 0.0;
    double qdot_c_sc = 0.0;
    double p_sc = 0.0;
    double eta_sc = 0.0;
    // Rate aggregates of the closed form; NaN for the numeric route.
    double alpha_sc = 0.0;
    double beta_sc = 0.0;
    double gamma_sc = 0.0;
};

SteadyCurrents sc_analytic_currents(const SemiclassicalModel& model);

struct NumericSteadyState
{
    // Steady state in the frame rotating with H_a.
    Eigen::Matrix3cd rho;
    // qdot from Tr{D[rho] H_a}; p_sc from the first law qdot_h + qdot_c.
    SteadyCurrents currents;
    // -Tr{rho dV/dt} evaluated in the rotating frame: 4 omega_f lambda Im rho_21.
    double power_explicit;
};

/*
 * Solves L[rho] = 0 for the time-independent rotating-frame generator
 * (static drive lambda (sigma12 + sigma12^dag) plus both dissipators) as a
 * vectorized 9x9 system. The solve runs in extended precision because the
 * heat currents are small differences of large population fluxes when
 * lambda is weak. Throws DegenerateNullSpace unless the kernel is 1-D.
 */
NumericSteadyState sc_numeric_steady_state(const SemiclassicalModel& model);

// (omega2 - omega1)/(omega3 - omega1)
double sc_efficiency(const SemiclassicalModel& model);

} // namespace ampsim

#endif
