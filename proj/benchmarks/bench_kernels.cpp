#include <benchmark/benchmark.h>

#include "ampsim/integrate.hpp"
#include "ampsim/phasespace.hpp"
#include "ampsim/scenario.hpp"

using namespace ampsim;

namespace
{

AmplifierModel amplifier(int order, int n)
{
    AmplifierModel m;
    m.omega1 = 0.0;
    m.omega2 = 1000.0;
    m.omega3 = 1200.0;
    m.omega_f = 1000.0 / order;
    m.lambda = 1.0;
    m.gamma_h = m.gamma_c = 1e-3;
    m.nbar_h = 10.0;
    m.nbar_c = 0.1;
    m.interaction_order = order;
    m.frame = Frame::interaction;
    m.layout = HilbertLayout(n);
    return m;
}

DensityMatrix excited_vacuum(const AmplifierModel& m)
{
    return build_joint_state(atom_states::Level{2}, field_states::Vacuum{}, m.layout);
}

void dense_apply(benchmark::State& state)
{
    const AmplifierModel m = amplifier(2, static_cast<int>(state.range(0)));
    const MasterEquation eq(m);
    const Matrix rho = excited_vacuum(m).matrix();
    Matrix out(rho.rows(), rho.cols());
    for (auto _ : state)
    {
        eq.apply(rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(dense_apply)->Arg(40)->Arg(100)->Arg(200);

void reduced_apply(benchmark::State& state)
{
    const AmplifierModel m = amplifier(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    const MasterEquation eq(m);
    const Matrix rho = excited_vacuum(m).matrix();
    const ReducedGenerator g(eq, rho);
    const ReducedGenerator::Vector y = g.gather(rho);
    ReducedGenerator::Vector out(g.size());
    for (auto _ : state)
    {
        g.apply(y, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.counters["entries"] = static_cast<double>(g.size());
}
BENCHMARK(reduced_apply)->Args({2, 100})->Args({1, 100})->Args({2, 400});

void evolve_one_gamma(benchmark::State& state)
{
    const AmplifierModel m = amplifier(2, 100);
    const DensityMatrix rho0 = excited_vacuum(m);
    IntegratorConfig c;
    c.t_max = 1000.0;
    c.sample_interval = 100.0;
    c.dt = aligned_time_step(MasterEquation(m), c.sample_interval);
    for (auto _ : state)
        benchmark::DoNotOptimize(evolve(rho0, m, c).final_state.matrix().data());
}
BENCHMARK(evolve_one_gamma)->Unit(benchmark::kMillisecond);

void wigner_grid(benchmark::State& state)
{
    const DensityMatrix rho = build_field_state(field_states::PoissonMixed{4.0}, 100).rho;
    const GridSpec spec = GridSpec::square(9.0, static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(wigner_function(rho, spec).values.data());
}
BENCHMARK(wigner_grid)->Arg(61)->Arg(121)->Unit(benchmark::kMillisecond);

void q_grid(benchmark::State& state)
{
    const DensityMatrix rho = build_field_state(field_states::Coherent{cplx(1.5, -0.5)}, 100).rho;
    const GridSpec spec = GridSpec::square(9.0, 121);
    for (auto _ : state)
        benchmark::DoNotOptimize(q_function(rho, spec).values.data());
}
BENCHMARK(q_grid)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
