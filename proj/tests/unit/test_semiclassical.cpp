#include <doctest.h>

#include <cmath>
#include <random>

#include "ampsim/semiclassical.hpp"

using namespace ampsim;

namespace
{

// omega_res = 1000 lambda, lambda = 1000 gamma, gaps 1.2 and 0.2 omega_res.
SemiclassicalModel reference()
{
    SemiclassicalModel m;
    m.omega1 = 0.0;
    m.omega2 = 1000.0;
    m.omega3 = 1200.0;
    m.omega_f = 500.0;
    m.lambda = 1.0;
    m.gamma_h = m.gamma_c = 1e-3;
    m.nbar_h = 10.0;
    m.nbar_c = 0.1;
    return m;
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

} // namespace

TEST_SUITE("semiclassical")
{

TEST_CASE("closed form at the reference point")
{
    const SteadyCurrents c = sc_analytic_currents(reference());
    CHECK(c.qdot_h_sc > 0.0);
    CHECK(c.qdot_c_sc < 0.0);
    CHECK(c.p_sc > 0.0);
    CHECK(c.eta_sc == doctest::Approx(1.0 / 1.2).epsilon(1e-15));
    CHECK(c.qdot_c_sc / c.qdot_h_sc == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
    CHECK(std::abs(c.qdot_h_sc + c.qdot_c_sc - c.p_sc) < 1e-14 * c.qdot_h_sc);

    const double gh = 1e-3, gc = 1e-3, nh = 10.0, nc = 0.1;
    CHECK(c.alpha_sc == doctest::Approx(gh * gc * (nc + nh + 3 * nh * nc)));
    CHECK(c.beta_sc == doctest::Approx((gh * nh + gc * nc) * (2 * gh + 2 * gc + 3 * gh * nh + 3 * gc * nc)));
    CHECK(c.gamma_sc == doctest::Approx(c.alpha_sc * std::pow(gh * nh + gc * nc, 2)));
}

TEST_CASE("equal occupations carry no current")
{
    SemiclassicalModel m = reference();
    m.nbar_c = m.nbar_h;
    const SteadyCurrents c = sc_analytic_currents(m);
    CHECK(c.qdot_h_sc == 0.0);
    CHECK(c.qdot_c_sc == 0.0);
    CHECK(c.p_sc == 0.0);

    m.gamma_c = m.gamma_h;
    const NumericSteadyState s = sc_numeric_steady_state(m);
    CHECK(std::abs(s.currents.qdot_h_sc) < 1e-12);
    CHECK(std::abs(s.currents.qdot_c_sc) < 1e-12);
    const double r = m.nbar_h / (m.nbar_h + 1.0);
    CHECK(s.rho(2, 2).real() == doctest::Approx(r * s.rho(0, 0).real()).epsilon(1e-10));
    CHECK(s.rho(2, 2).real() == doctest::Approx(r * s.rho(1, 1).real()).epsilon(1e-10));
}

TEST_CASE("strong-drive limit")
{
    SemiclassicalModel m = reference();
    m.lambda = 1e6;
    const SteadyCurrents c = sc_analytic_currents(m);
    const double gh = m.gamma_h, gc = m.gamma_c, nh = m.nbar_h, nc = m.nbar_c;
    const double pump = gh * nh + gc * nc;
    const double beta = pump * (2 * gh + 2 * gc + 3 * gh * nh + 3 * gc * nc);
    const double limit = 2 * gh * gc * (nh - nc) * pump / beta;
    CHECK(c.qdot_h_sc == doctest::Approx(limit * (m.omega3 - m.omega1)).epsilon(1e-9));
    CHECK(c.p_sc == doctest::Approx(limit * (m.omega2 - m.omega1)).epsilon(1e-9));
}

TEST_CASE("null-space solve matches the closed form")
{
    const SemiclassicalModel m = reference();
    const SteadyCurrents a = sc_analytic_currents(m);
    const NumericSteadyState n = sc_numeric_steady_state(m);
    CHECK(rel(a.qdot_h_sc, n.currents.qdot_h_sc) < 1e-8);
    CHECK(rel(a.qdot_c_sc, n.currents.qdot_c_sc) < 1e-8);
    CHECK(rel(a.p_sc, n.currents.p_sc) < 1e-8);
    CHECK(rel(a.p_sc, n.power_explicit) < 1e-8);
    CHECK(std::abs(n.rho.trace() - 1.0) < 1e-14);
    CHECK((n.rho - n.rho.adjoint()).norm() < 1e-15);
    CHECK(std::isnan(n.currents.alpha_sc));

    SUBCASE("random sweep over three decades per parameter")
    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> dec(0.0, 3.0);
        for (int trial = 0; trial < 100; ++trial)
        {
            SemiclassicalModel r = reference();
            r.gamma_h = 1e-4 * std::pow(10.0, dec(rng));
            r.gamma_c = 1e-4 * std::pow(10.0, dec(rng));
            r.nbar_h = 1e-2 * std::pow(10.0, dec(rng));
            r.nbar_c = 1e-2 * std::pow(10.0, dec(rng));
            r.lambda = 1e-3 * std::pow(10.0, dec(rng));
            const SteadyCurrents ca = sc_analytic_currents(r);
            const NumericSteadyState cn = sc_numeric_steady_state(r);
            CHECK(rel(ca.qdot_h_sc, cn.currents.qdot_h_sc) < 1e-8);
            CHECK(rel(ca.qdot_c_sc, cn.currents.qdot_c_sc) < 1e-8);
            CHECK(rel(ca.p_sc, cn.currents.p_sc) < 1e-8);
            CHECK(std::abs(ca.qdot_h_sc + ca.qdot_c_sc - ca.p_sc) <= 1e-14 * std::abs(ca.qdot_h_sc));
            CHECK((ca.qdot_h_sc > 0.0) == (r.nbar_h > r.nbar_c));
        }
    }
}

TEST_CASE("no drive: two-bath detailed balance")
{
    SemiclassicalModel m = reference();
    m.lambda = 0.0;
    const NumericSteadyState s = sc_numeric_steady_state(m);
    const double r1 = (m.nbar_h + 1.0) / m.nbar_h, r2 = (m.nbar_c + 1.0) / m.nbar_c;
    const double p3 = 1.0 / (1.0 + r1 + r2);
    CHECK(s.rho(2, 2).real() == doctest::Approx(p3).epsilon(1e-12));
    CHECK(s.rho(0, 0).real() == doctest::Approx(p3 * r1).epsilon(1e-12));
    CHECK(s.rho(1, 1).real() == doctest::Approx(p3 * r2).epsilon(1e-12));
    CHECK(std::abs(s.rho(0, 1)) < 1e-15);
    CHECK(std::abs(s.currents.qdot_h_sc) < 1e-15);
    CHECK(std::abs(s.currents.p_sc) < 1e-15);
}

TEST_CASE("degenerate kernel is reported")
{
    SemiclassicalModel m = reference();
    m.gamma_h = m.gamma_c = 0.0;
    m.lambda = 0.0;
    try
    {
        sc_numeric_steady_state(m);
        FAIL("expected DegenerateNullSpace");
    }
    catch (const DegenerateNullSpace& e)
    {
        CHECK(e.dimension() > 1);
    }
}

TEST_CASE("efficiency formula")
{
    SemiclassicalModel m = reference();
    CHECK(sc_efficiency(m) == doctest::Approx(1.0 / 1.2).epsilon(1e-15));
    m.omega2 = m.omega3 - 1e-9;
    CHECK(sc_efficiency(m) == doctest::Approx(1.0).epsilon(1e-9));
    m = reference();
    m.omega2 = 1e-9;
    CHECK(sc_efficiency(m) == doctest::Approx(0.0).epsilon(1e-9));
    m.omega3 = -1.0;
    CHECK_THROWS_AS(sc_efficiency(m), InvalidModel);
}

TEST_CASE("validation")
{
    SemiclassicalModel m = reference();
    m.omega_f = 400.0;
    CHECK_THROWS_AS(sc_analytic_currents(m), UnsupportedConfiguration);
    m = reference();
    m.omega3 = 900.0;
    CHECK_THROWS_AS(sc_numeric_steady_state(m), InvalidModel);

    AmplifierModel q;
    q.omega1 = 0.0;
    q.omega2 = 1000.0;
    q.omega3 = 1200.0;
    q.omega_f = 1000.0;
    q.interaction_order = 1;
    const SemiclassicalModel from = SemiclassicalModel::from(q);
    CHECK(from.omega_f == 500.0);
    CHECK_NOTHROW(from.validate());
}

}
