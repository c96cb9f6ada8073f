#include <doctest.h>

#include <cmath>
#include <random>

#include "ampsim/integrate.hpp"
#include "oracles.hpp"

using namespace ampsim;

namespace
{

AmplifierModel small_model(int order, Frame frame, int n)
{
    AmplifierModel m;
    m.omega1 = 0.0;
    m.omega2 = 20.0;
    m.omega3 = 24.0;
    m.omega_f = 20.0 / order;
    m.lambda = 1.0;
    m.gamma_h = 0.05;
    m.gamma_c = 0.08;
    m.nbar_h = 3.0;
    m.nbar_c = 0.2;
    m.interaction_order = order;
    m.frame = frame;
    m.layout = HilbertLayout(n);
    return m;
}

DensityMatrix joint(const Matrix& m, int n)
{
    return DensityMatrix::unchecked(Space::joint(HilbertLayout(n)), m);
}

} // namespace

TEST_SUITE("liouville")
{

TEST_CASE("planck occupation")
{
    CHECK(planck_occupation(1.0, 1e-3) == 0.0);
    CHECK(planck_occupation(std::log(2.0), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(planck_occupation(2.0, 3.0) == doctest::Approx(1.0 / std::expm1(2.0 / 3.0)).epsilon(1e-14));
    CHECK_THROWS_AS(planck_occupation(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(planck_occupation(1.0, 0.0), InvalidArgument);
}

TEST_CASE("model validation")
{
    AmplifierModel m = small_model(2, Frame::interaction, 6);
    CHECK_NOTHROW(m.validate());
    CHECK(m.resonant());

    AmplifierModel bad = m;
    bad.omega3 = 15.0;
    CHECK_THROWS_AS(bad.validate(), InvalidModel);
    bad = m;
    bad.interaction_order = 3;
    CHECK_THROWS_AS(bad.validate(), InvalidModel);
    bad = m;
    bad.gamma_c = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidModel);
    bad = m;
    bad.nbar_h = -0.1;
    CHECK_THROWS_AS(bad.validate(), InvalidModel);

    bad = m;
    bad.omega_f = 9.0;
    CHECK_THROWS_AS(bad.validate(), UnsupportedConfiguration);
    CHECK_THROWS_AS(build_hamiltonian(bad), UnsupportedConfiguration);
    bad.frame = Frame::lab;
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("hamiltonian matrix elements")
{
    const int n = 8;
    SUBCASE("two-photon")
    {
        AmplifierModel m = small_model(2, Frame::lab, n);
        const Matrix h = build_hamiltonian(m).matrix();
        const HilbertLayout& l = m.layout;
        for (int k = 0; k + 2 < n; ++k)
            CHECK(h(l.index(1, k + 2), l.index(2, k)).real() ==
                  doctest::Approx(std::sqrt((k + 1.0) * (k + 2.0))).epsilon(1e-15));
        CHECK((h - h.adjoint()).norm() == 0.0);
        CHECK((h - oracle::hamiltonian(m)).norm() < 1e-13);
    }
    SUBCASE("linear")
    {
        AmplifierModel m = small_model(1, Frame::lab, n);
        const Matrix h = interaction_hamiltonian(m).matrix();
        for (int k = 0; k + 1 < n; ++k)
            CHECK(h(m.layout.index(1, k + 1), m.layout.index(2, k)).real() ==
                  doctest::Approx(std::sqrt(k + 1.0)).epsilon(1e-15));
        const Matrix full = build_hamiltonian(m).matrix();
        CHECK((full - full.adjoint()).norm() == 0.0);
        CHECK((full - oracle::hamiltonian(m)).norm() < 1e-13);
    }
    SUBCASE("interaction frame keeps H_int only")
    {
        for (int order : {1, 2})
        {
            AmplifierModel m = small_model(order, Frame::interaction, n);
            CHECK((build_hamiltonian(m).matrix() - oracle::interaction(m)).norm() < 1e-13);
            CHECK((Matrix(generator_hamiltonian_sparse(m)) - oracle::interaction(m)).norm() < 1e-13);
        }
    }
}

TEST_CASE("dissipator")
{
    std::mt19937_64 rng(2);
    const int n = 4;
    AmplifierModel m = small_model(2, Frame::interaction, n);
    for (Bath b : {Bath::hot, Bath::cold})
    {
        const BathChannel ch = bath_channel(m, b);
        const Matrix s = b == Bath::hot ? oracle::hot_lowering(n) : oracle::cold_lowering(n);
        CHECK((ch.lowering.matrix() - s).norm() == 0.0);
        for (int trial = 0; trial < 5; ++trial)
        {
            const Matrix rho = oracle::random_state(3 * n, rng);
            const Matrix d = apply_dissipator(joint(rho, n), ch).matrix();
            CHECK(std::abs(d.trace()) < 1e-14);
            CHECK((d - d.adjoint()).norm() < 1e-14);
            CHECK((d - oracle::dissipator(rho, s, ch.rate, ch.nbar)).norm() < 1e-13);
        }
    }

    SUBCASE("zero-temperature decay of level 3")
    {
        m.nbar_h = 0.0;
        const DensityMatrix rho = build_joint_state(atom_states::Level{3}, field_states::Vacuum{}, m.layout);
        const Matrix d = apply_dissipator(rho, bath_channel(m, Bath::hot)).matrix();
        const int i3 = m.layout.index(3, 0), i1 = m.layout.index(1, 0);
        CHECK(d(i3, i3).real() == doctest::Approx(-2.0 * m.gamma_h).epsilon(1e-15));
        CHECK(d(i1, i1).real() == doctest::Approx(2.0 * m.gamma_h).epsilon(1e-15));
    }

    SUBCASE("detailed balance with one bath and no coupling")
    {
        m.lambda = 0.0;
        m.gamma_c = 0.0;
        const double nb = m.nbar_h;
        // rho33/rho11 = nbar/(nbar+1), level 2 empty.
        Eigen::Matrix3cd a = Eigen::Matrix3cd::Zero();
        a(0, 0) = (nb + 1.0) / (2.0 * nb + 1.0);
        a(2, 2) = nb / (2.0 * nb + 1.0);
        const DensityMatrix rho = build_joint_state(atom_states::General{a}, field_states::Fock{2}, m.layout);
        CHECK(master_rhs(rho, m).matrix().cwiseAbs().maxCoeff() < 1e-15);

        // Relaxation from level 1 reaches the same ratio.
        IntegratorConfig ic;
        ic.dt = 0.05;
        ic.t_max = 20.0 / m.gamma_h;
        ic.sample_interval = ic.t_max;
        ic.guard_levels = 1;
        const DensityMatrix rho0 = build_joint_state(atom_states::Level{1}, field_states::Fock{2}, m.layout);
        const Matrix fin = evolve(rho0, m, ic).final_state.matrix();
        const double p1 = fin(m.layout.index(1, 2), m.layout.index(1, 2)).real();
        const double p3 = fin(m.layout.index(3, 2), m.layout.index(3, 2)).real();
        CHECK(p3 / p1 == doctest::Approx(nb / (nb + 1.0)).epsilon(1e-9));
    }
}

TEST_CASE("master equation rhs")
{
    std::mt19937_64 rng(9);
    for (int order : {1, 2})
        for (Frame frame : {Frame::lab, Frame::interaction})
        {
            const int n = 5;
            const AmplifierModel m = small_model(order, frame, n);
            const MasterEquation eq(m);
            for (int trial = 0; trial < 4; ++trial)
            {
                const Matrix rho = oracle::random_state(3 * n, rng);
                const Matrix out = master_rhs(joint(rho, n), m).matrix();
                const Matrix ref = oracle::rhs(rho, m);
                CHECK(std::abs(out.trace()) < 1e-12);
                CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
                CHECK((out - ref).norm() < 1e-11 * ref.norm());
                CHECK((eq.apply(rho) - ref).norm() < 1e-11 * ref.norm());
            }
        }
}

TEST_CASE("spectral radius bound")
{
    const AmplifierModel m = small_model(2, Frame::lab, 4);
    const Eigen::ComplexEigenSolver<Matrix> es(oracle::liouvillian(m));
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= MasterEquation(m).spectral_radius_bound());
}

TEST_CASE("no coupling: the Hamiltonian part conserves atomic and field energy separately")
{
    std::mt19937_64 rng(4);
    AmplifierModel m = small_model(2, Frame::lab, 6);
    m.lambda = 0.0;
    const Matrix rho = oracle::random_state(18, rng);
    const Matrix h = oracle::hamiltonian(m);
    const Matrix comm = cplx(0, -1) * (h * rho - rho * h);
    CHECK(std::abs((oracle::atom_energy(m) * comm).trace()) < 1e-12);
    CHECK(std::abs((oracle::field_energy(m) * comm).trace()) < 1e-12);
    // Dissipators act on the atom only.
    const Matrix full = master_rhs(joint(rho, 6), m).matrix();
    CHECK(std::abs((oracle::field_energy(m) * full).trace()) < 1e-12);
}

TEST_CASE("two-photon Rabi oscillation without baths")
{
    const int n = 10;
    AmplifierModel m = small_model(2, Frame::interaction, n);
    m.gamma_h = m.gamma_c = 0.0;
    const MasterEquation eq(m);
    Rk4Stepper stepper(eq);
    for (int k : {0, 3})
    {
        Matrix rho = build_joint_state(atom_states::Level{2}, field_states::Fock{k}, m.layout).matrix();
        const double omega = std::sqrt((k + 1.0) * (k + 2.0));
        const double dt = 1e-3;
        for (int step = 1; step <= 2000; ++step)
        {
            stepper.step(rho, dt);
            if (step % 250 == 0)
            {
                const double t = step * dt;
                const double c = std::cos(omega * t);
                CHECK(rho(m.layout.index(2, k), m.layout.index(2, k)).real() == doctest::Approx(c * c).epsilon(1e-9));
                CHECK(rho(m.layout.index(1, k + 2), m.layout.index(1, k + 2)).real() ==
                      doctest::Approx(1.0 - c * c).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("reduced generator")
{
    std::mt19937_64 rng(17);
    SUBCASE("diagonal seed closes on the coherence-charge sectors")
    {
        for (int order : {1, 2})
        {
            AmplifierModel m = small_model(order, Frame::interaction, 100);
            const MasterEquation eq(m);
            const DensityMatrix rho = build_joint_state(atom_states::Level{2}, field_states::Vacuum{}, m.layout);
            const ReducedGenerator gen(eq, rho.matrix());
            CHECK(gen.size() == (order == 2 ? 248 : 498));
        }
    }

    SUBCASE("packed apply equals the dense apply and the set is invariant")
    {
        for (int order : {1, 2})
            for (Frame frame : {Frame::lab, Frame::interaction})
            {
                const int n = 7;
                AmplifierModel m = small_model(order, frame, n);
                const MasterEquation eq(m);
                // Seed: a diagonal state plus one coherence in the (1, k+order) <-> (2, k) sector.
                Matrix seed = oracle::random_state(3 * n, rng).diagonal().asDiagonal();
                seed /= seed.trace();
                const int i = m.layout.index(1, 1 + order), j = m.layout.index(2, 1);
                seed(i, j) = cplx(0.01, 0.003);
                seed(j, i) = std::conj(seed(i, j));
                const ReducedGenerator gen(eq, seed);

                Matrix packed_state;
                gen.scatter(gen.gather(seed), packed_state);
                CHECK((packed_state - seed).norm() == 0.0);

                ReducedGenerator::Vector out;
                gen.apply(gen.gather(seed), out);
                Matrix dense_out = eq.apply(seed);
                Matrix scattered;
                gen.scatter(out, scattered);
                CHECK((scattered - dense_out).norm() < 1e-13 * dense_out.norm());

                // Everything the generator can reach is inside the set.
                Matrix probe = packed_state;
                for (int it = 0; it < 6; ++it)
                {
                    probe = eq.apply(probe);
                    Matrix back;
                    gen.scatter(gen.gather(probe), back);
                    CHECK((back - probe).norm() == 0.0);
                }
            }
    }

    SUBCASE("full seed covers every entry")
    {
        const AmplifierModel m = small_model(2, Frame::interaction, 4);
        const ReducedGenerator gen(MasterEquation(m), oracle::random_state(12, rng));
        CHECK(gen.size() == 144);
    }
}

TEST_CASE("frame equivalence at resonance")
{
    // omega_res = 20 lambda keeps the lab frame integrable.
    const int n = 12;
    for (int order : {1, 2})
    {
        AmplifierModel lab = small_model(order, Frame::lab, n);
        AmplifierModel rot = lab;
        rot.frame = Frame::interaction;
        const DensityMatrix rho0 = tensor_product(build_atom_state(atom_states::Level{2}),
                                                  build_field_state(field_states::Coherent{cplx(0.6, 0.2)}, n).rho);
        IntegratorConfig ic;
        ic.dt = 5e-4;
        ic.t_max = 4.0;
        ic.sample_interval = 0.5;
        ic.guard_tol = 1.0;

        std::vector<Matrix> lab_fields, rot_fields;
        const Observer keep_lab = [&](double, const DensityMatrix& r) {
            lab_fields.push_back(r.matrix());
        };
        const Observer keep_rot = [&](double, const DensityMatrix& r) {
            rot_fields.push_back(r.matrix());
        };
        const TimeSeries a = evolve(rho0, lab, ic, std::span(&keep_lab, 1));
        const TimeSeries b = evolve(rho0, rot, ic, std::span(&keep_rot, 1));
        REQUIRE(a.samples.size() == b.samples.size());
        REQUIRE(lab_fields.size() == a.samples.size());

        auto rel = [](double x, double y, double scale) { return std::abs(x - y) / scale; };
        double scale_q = 0.0, scale_p = 0.0;
        for (const ThermoSample& s : b.samples)
        {
            scale_q = std::max({scale_q, std::abs(s.qdot_h), std::abs(s.qdot_c)});
            scale_p = std::max(scale_p, std::abs(s.p_f));
        }
        for (std::size_t k = 0; k < a.samples.size(); ++k)
        {
            const ThermoSample& x = a.samples[k];
            const ThermoSample& y = b.samples[k];
            for (int lvl = 0; lvl < 3; ++lvl)
                CHECK(rel(x.atom_populations[lvl], y.atom_populations[lvl], 1.0) < 1e-6);
            CHECK(rel(x.qdot_h, y.qdot_h, scale_q) < 1e-6);
            CHECK(rel(x.qdot_c, y.qdot_c, scale_q) < 1e-6);
            CHECK(rel(x.p_f, y.p_f, scale_p) < 1e-6);
            const Matrix fa = oracle::trace_out_atom(lab_fields[k], n);
            const Matrix fb = oracle::trace_out_atom(rot_fields[k], n);
            CHECK((fa.diagonal() - fb.diagonal()).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

}
