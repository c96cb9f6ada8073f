#include "ampsim/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace ampsim
{

namespace
{

// Diagonal sum of a block-diagonal energy operator against the joint state.
double real_trace(const Matrix& rho, const SparseMatrix& a)
{
    return trace_product(rho, a).real();
}

Matrix reduced_field(const Matrix& rho, int n)
{
    return rho.block(0, 0, n, n) + rho.block(n, n, n, n) + rho.block(2 * n, 2 * n, n, n);
}

Matrix reduced_atom(const Matrix& rho, int n)
{
    Matrix out(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = rho.block(i * n, j * n, n, n).trace();
    return out;
}

std::string csv_number(double v)
{
    if (std::isnan(v))
        return "undefined";
    return fmt::format("{}", v);
}

} // namespace

bool eta_defined(const ThermoSample& s)
{
    return !std::isnan(s.eta);
}

cplx trace_product(const Matrix& rho, const SparseMatrix& a)
{
    // Tr[rho A] = sum_ij rho_ji A_ij
    cplx acc = 0.0;
    for (Eigen::Index i = 0; i < a.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(a, i); it; ++it)
            acc += rho(it.col(), it.row()) * it.value();
    return acc;
}

ThermoEvaluator::ThermoEvaluator(const AmplifierModel& model)
    : m_model(model),
      m_h_atom(atomic_hamiltonian_sparse(model)),
      m_h_field(field_hamiltonian_sparse(model)),
      m_h_int(interaction_hamiltonian_sparse(model))
{
    model.validate();
    m_h_quasi = m_h_atom + m_h_int;
    SparseMatrix comm = SparseMatrix(m_h_field * m_h_int) - SparseMatrix(m_h_int * m_h_field);
    m_power_op = comm * cplx(0.0, -1.0);
    m_power_op.prune(cplx(0.0));
}

double ThermoEvaluator::heat_current(const Matrix& rho, Bath bath) const
{
    const int n = m_model.layout.field_dim();
    Matrix d = Matrix::Zero(rho.rows(), rho.cols());
    if (bath == Bath::hot)
        add_dissipator(rho, n, 1, 3, m_model.gamma_h, m_model.nbar_h, 1.0, d);
    else
        add_dissipator(rho, n, 2, 3, m_model.gamma_c, m_model.nbar_c, 1.0, d);
    return real_trace(d, m_h_quasi);
}

double ThermoEvaluator::field_power(const Matrix& rho) const
{
    return real_trace(rho, m_power_op);
}

ThermoSample ThermoEvaluator::sample(const Matrix& rho, double t) const
{
    const int n = m_model.layout.field_dim();
    ThermoSample s;
    s.t = t;
    s.e_atom = real_trace(rho, m_h_atom);
    s.e_field = real_trace(rho, m_h_field);
    s.e_int = real_trace(rho, m_h_int);
    s.e_total = s.e_atom + s.e_field + s.e_int;

    const SpectrumSummary joint = spectrum_summary(rho);
    s.s_total = joint.entropy;
    s.min_eigenvalue = joint.min_eigenvalue;
    s.s_atom = spectrum_summary(reduced_atom(rho, n)).entropy;
    s.s_field = spectrum_summary(reduced_field(rho, n)).entropy;

    s.qdot_h = heat_current(rho, Bath::hot);
    s.qdot_c = heat_current(rho, Bath::cold);
    s.p_f = field_power(rho);
    s.eta = std::abs(s.qdot_h) < eta_threshold ? std::numeric_limits<double>::quiet_NaN() : s.p_f / s.qdot_h;

    for (int level = 0; level < 3; ++level)
        s.atom_populations[level] = rho.block(level * n, level * n, n, n).trace().real();
    s.trace = rho.trace().real();
    return s;
}

double heat_current(const DensityMatrix& rho, const AmplifierModel& model, Bath bath)
{
    if (!(rho.space() == Space::joint(model.layout)))
        throw LayoutMismatch("heat_current: state is not on the model's joint layout");
    return ThermoEvaluator(model).heat_current(rho.matrix(), bath);
}

double field_power(const DensityMatrix& rho, const AmplifierModel& model)
{
    if (!(rho.space() == Space::joint(model.layout)))
        throw LayoutMismatch("field_power: state is not on the model's joint layout");
    return ThermoEvaluator(model).field_power(rho.matrix());
}

ThermoSample thermo_sample(const DensityMatrix& rho, const AmplifierModel& model, double t)
{
    if (!(rho.space() == Space::joint(model.layout)))
        throw LayoutMismatch("thermo_sample: state is not on the model's joint layout");
    const ThermoSample s = ThermoEvaluator(model).sample(rho.matrix(), t);
    if (s.min_eigenvalue < -negativity_failure)
        throw NotAState("thermo_sample: joint state has eigenvalue " + std::to_string(s.min_eigenvalue));
    return s;
}

std::optional<double> detect_steady_state(std::span<const ThermoSample> samples, double window, double tol)
{
    if (samples.size() < 2 || !(window > 0.0))
        return std::nullopt;
    if (samples.back().t - samples.front().t < 2.0 * window)
        return std::nullopt;

    using Getter = double (*)(const ThermoSample&);
    static constexpr Getter tracked[] = {
        [](const ThermoSample& s) { return s.qdot_h; },
        [](const ThermoSample& s) { return s.qdot_c; },
        [](const ThermoSample& s) { return s.p_f; },
        [](const ThermoSample& s) { return s.atom_populations[0]; },
        [](const ThermoSample& s) { return s.atom_populations[1]; },
        [](const ThermoSample& s) { return s.atom_populations[2]; },
    };

    const double t0 = samples.front().t;
    const double eps = 1e-9 * window;

    // Variation is measured against the settled level (the final window), not
    // against the early transient. A column whose final level is below tol of
    // its peak settles at zero and is measured against its peak.
    std::array<double, std::size(tracked)> scale{};
    for (std::size_t q = 0; q < std::size(tracked); ++q)
    {
        double peak = 0.0, last = 0.0;
        for (const ThermoSample& s : samples)
        {
            peak = std::max(peak, std::abs(tracked[q](s)));
            if (samples.back().t - s.t <= window + eps)
                last = std::max(last, std::abs(tracked[q](s)));
        }
        scale[q] = last > tol * peak ? last : peak;
    }

    // settled[j]: the trailing window ending at sample j is flat.
    // Walk backwards to find the earliest j from which all later windows are flat.
    std::optional<std::size_t> first_settled;
    std::size_t lo = 0;
    std::vector<bool> settled(samples.size(), false);
    for (std::size_t j = 0; j < samples.size(); ++j)
    {
        if (samples[j].t - t0 < window - eps)
            continue;
        while (samples[j].t - samples[lo].t > window + eps)
            ++lo;
        bool flat = true;
        for (std::size_t q = 0; q < std::size(tracked) && flat; ++q)
        {
            double mn = tracked[q](samples[lo]), mx = mn;
            for (std::size_t k = lo; k <= j; ++k)
            {
                mn = std::min(mn, tracked[q](samples[k]));
                mx = std::max(mx, tracked[q](samples[k]));
            }
            flat = (mx - mn) <= tol * scale[q];
        }
        settled[j] = flat;
    }
    for (std::size_t j = samples.size(); j-- > 0;)
    {
        if (!settled[j])
            break;
        first_settled = j;
    }
    if (!first_settled)
        return std::nullopt;
    return std::max(t0, samples[*first_settled].t - window);
}

void write_thermo_csv(std::ostream& os, std::span<const ThermoSample> samples, double time_unit)
{
    os << thermo_csv_header << '\n';
    for (const ThermoSample& s : samples)
    {
        os << csv_number(s.t / time_unit) << ',' << csv_number(s.e_total) << ',' << csv_number(s.e_atom) << ','
           << csv_number(s.e_field) << ',' << csv_number(s.e_int) << ',' << csv_number(s.s_atom) << ','
           << csv_number(s.s_field) << ',' << csv_number(s.s_total) << ',' << csv_number(s.qdot_h) << ','
           << csv_number(s.qdot_c) << ',' << csv_number(s.p_f) << ',' << csv_number(s.eta) << '\n';
    }
}

} // namespace ampsim
