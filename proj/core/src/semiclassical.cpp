#include "ampsim/semiclassical.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ampsim
{

namespace
{

using lcplx = std::complex<long double>;
using LMatrix3 = Eigen::Matrix<lcplx, 3, 3>;
using LMatrix9 = Eigen::Matrix<lcplx, 9, 9>;
using LVector9 = Eigen::Matrix<lcplx, 9, 1>;

constexpr double nullity_threshold = 1e-12;

LMatrix3 unit(int i, int j)
{
    LMatrix3 m = LMatrix3::Zero();
    m(i, j) = 1.0L;
    return m;
}

// Gamma (n+1) (2 s rho s^dag - {s^dag s, rho}) + Gamma n (2 s^dag rho s - {s s^dag, rho})
LMatrix3 thermal_dissipator(const LMatrix3& rho, const LMatrix3& s, long double rate, long double nbar)
{
    const LMatrix3 sd = s.adjoint();
    const LMatrix3 sds = sd * s;
    const LMatrix3 ssd = s * sd;
    return rate * (nbar + 1.0L) * (2.0L * s * rho * sd - sds * rho - rho * sds) +
           rate * nbar * (2.0L * sd * rho * s - ssd * rho - rho * ssd);
}

struct RotatingFrameGenerator
{
    LMatrix3 drive;
    LMatrix3 sigma13 = unit(0, 2);
    LMatrix3 sigma23 = unit(1, 2);
    long double gamma_h, gamma_c, nbar_h, nbar_c;

    explicit RotatingFrameGenerator(const SemiclassicalModel& m)
        : gamma_h(m.gamma_h), gamma_c(m.gamma_c), nbar_h(m.nbar_h), nbar_c(m.nbar_c)
    {
        drive = static_cast<long double>(m.lambda) * (unit(0, 1) + unit(1, 0));
    }

    LMatrix3 hot(const LMatrix3& rho) const { return thermal_dissipator(rho, sigma13, gamma_h, nbar_h); }
    LMatrix3 cold(const LMatrix3& rho) const { return thermal_dissipator(rho, sigma23, gamma_c, nbar_c); }

    LMatrix3 operator()(const LMatrix3& rho) const
    {
        const lcplx mi(0.0L, -1.0L);
        return mi * (drive * rho - rho * drive) + hot(rho) + cold(rho);
    }
};

} // namespace

SemiclassicalModel SemiclassicalModel::from(const AmplifierModel& m)
{
    return SemiclassicalModel{m.omega1, m.omega2, m.omega3, (m.omega2 - m.omega1) / 2.0, m.lambda,
                              m.gamma_h, m.gamma_c, m.nbar_h, m.nbar_c};
}

void SemiclassicalModel::validate() const
{
    if (!(omega3 > omega2 && omega2 > omega1))
        throw InvalidModel("level frequencies must satisfy omega3 > omega2 > omega1");
    if (!(lambda >= 0.0) || !(gamma_h >= 0.0) || !(gamma_c >= 0.0) || !(nbar_h >= 0.0) || !(nbar_c >= 0.0))
        throw InvalidModel("lambda, bath rates and occupations must be >= 0");
    const double target = 0.5 * (omega2 - omega1);
    if (std::abs(omega_f - target) > 1e-12 * std::max(std::abs(omega2), std::abs(omega1)))
        throw UnsupportedConfiguration("semiclassical steady state needs 2 omega_f = omega2 - omega1");
}

SteadyCurrents sc_analytic_currents(const SemiclassicalModel& m)
{
    m.validate();
    const double gh = m.gamma_h, gc = m.gamma_c, nh = m.nbar_h, nc = m.nbar_c;
    const double lam2 = m.lambda * m.lambda;
    const double pump = gh * nh + gc * nc;

    SteadyCurrents c;
    c.alpha_sc = gh * gc * (nc + nh + 3.0 * nh * nc);
    c.beta_sc = pump * (2.0 * gh + 2.0 * gc + 3.0 * gh * nh + 3.0 * gc * nc);
    c.gamma_sc = c.alpha_sc * pump * pump;

    const double denom = c.beta_sc * lam2 + c.gamma_sc;
    const double common = denom == 0.0 ? 0.0 : 2.0 * gh * gc * lam2 * (nh - nc) * pump / denom;
    c.qdot_h_sc = common * (m.omega3 - m.omega1);
    c.qdot_c_sc = -common * (m.omega3 - m.omega2);
    c.p_sc = common * (m.omega2 - m.omega1);
    c.eta_sc = c.qdot_h_sc != 0.0 ? c.p_sc / c.qdot_h_sc : std::numeric_limits<double>::quiet_NaN();
    return c;
}

NumericSteadyState sc_numeric_steady_state(const SemiclassicalModel& m)
{
    m.validate();
    const RotatingFrameGenerator gen(m);

    // Column k of the superoperator is vec(L[E_k]), vec stacking columns.
    LMatrix9 super;
    for (int k = 0; k < 9; ++k)
    {
        const LMatrix3 image = gen(unit(k % 3, k / 3));
        super.col(k) = Eigen::Map<const LVector9>(image.data());
    }

    const Eigen::Matrix<cplx, 9, 9> super_d = super.cast<cplx>();
    Eigen::JacobiSVD<Eigen::Matrix<cplx, 9, 9>> svd(super_d);
    const auto& sv = svd.singularValues();
    int nullity = 0;
    for (int k = 0; k < 9; ++k)
        if (sv(k) <= nullity_threshold * sv(0))
            ++nullity;
    if (nullity != 1)
        throw DegenerateNullSpace("rotating-frame generator has a " + std::to_string(nullity) +
                                      "-dimensional kernel; the steady state is not unique",
                                  nullity);

    // The population equation of level 1 is redundant with trace conservation.
    LMatrix9 bordered = super;
    bordered.row(0).setZero();
    bordered(0, 0) = bordered(0, 4) = bordered(0, 8) = 1.0L;
    LVector9 rhs = LVector9::Zero();
    rhs(0) = 1.0L;
    const LVector9 x = bordered.fullPivLu().solve(rhs);
    LMatrix3 rho = Eigen::Map<const LMatrix3>(x.data());
    rho = 0.5L * (rho + rho.adjoint()).eval();

    LMatrix3 h_atom = LMatrix3::Zero();
    h_atom(0, 0) = m.omega1;
    h_atom(1, 1) = m.omega2;
    h_atom(2, 2) = m.omega3;

    NumericSteadyState out;
    out.rho = rho.cast<cplx>();
    SteadyCurrents& c = out.currents;
    c.qdot_h_sc = static_cast<double>((gen.hot(rho) * h_atom).trace().real());
    c.qdot_c_sc = static_cast<double>((gen.cold(rho) * h_atom).trace().real());
    c.p_sc = c.qdot_h_sc + c.qdot_c_sc;
    c.eta_sc = c.qdot_h_sc != 0.0 ? c.p_sc / c.qdot_h_sc : std::numeric_limits<double>::quiet_NaN();
    c.alpha_sc = c.beta_sc = c.gamma_sc = std::numeric_limits<double>::quiet_NaN();

    // In the frame rotating with H_a, U dV/dt U^dag = 2 i omega_f lambda (sigma12 - sigma12^dag).
    out.power_explicit =
        static_cast<double>(4.0L * static_cast<long double>(m.omega_f) * static_cast<long double>(m.lambda) *
                            rho(1, 0).imag());
    return out;
}

double sc_efficiency(const SemiclassicalModel& m)
{
    if (!(m.omega3 > m.omega1))
        throw InvalidModel("sc_efficiency needs omega3 > omega1");
    return (m.omega2 - m.omega1) / (m.omega3 - m.omega1);
}

} // namespace ampsim
