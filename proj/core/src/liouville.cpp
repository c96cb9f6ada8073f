#include "ampsim/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ampsim
{

namespace
{

using Triplet = Eigen::Triplet<cplx>;

SparseMatrix from_triplets(int dim, const std::vector<Triplet>& t)
{
    SparseMatrix m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

void add_atomic_terms(const AmplifierModel& m, std::vector<Triplet>& t)
{
    const HilbertLayout& l = m.layout;
    const double omega[3] = {m.omega1, m.omega2, m.omega3};
    for (int level = 1; level <= 3; ++level)
        if (omega[level - 1] != 0.0)
            for (int n = 0; n < l.field_dim(); ++n)
                t.emplace_back(l.index(level, n), l.index(level, n), omega[level - 1]);
}

void add_field_terms(const AmplifierModel& m, std::vector<Triplet>& t)
{
    const HilbertLayout& l = m.layout;
    if (m.omega_f == 0.0)
        return;
    for (int level = 1; level <= 3; ++level)
        for (int n = 1; n < l.field_dim(); ++n)
            t.emplace_back(l.index(level, n), l.index(level, n), m.omega_f * n);
}

// <1, n+k| H_int |2, n> = lambda sqrt((n+1)...(n+k)) and its conjugate.
void add_interaction_terms(const AmplifierModel& m, std::vector<Triplet>& t)
{
    const HilbertLayout& l = m.layout;
    const int k = m.interaction_order;
    if (m.lambda == 0.0)
        return;
    for (int n = 0; n + k < l.field_dim(); ++n)
    {
        double amp = 1.0;
        for (int j = 1; j <= k; ++j)
            amp *= std::sqrt(static_cast<double>(n + j));
        const int row = l.index(1, n + k);
        const int col = l.index(2, n);
        t.emplace_back(row, col, m.lambda * amp);
        t.emplace_back(col, row, m.lambda * amp);
    }
}

Operator to_operator(const AmplifierModel& m, const SparseMatrix& s)
{
    return Operator(Space::joint(m.layout), Matrix(s));
}

void require_joint(const DensityMatrix& rho, const HilbertLayout& layout, const char* what)
{
    if (!(rho.space() == Space::joint(layout)))
        throw LayoutMismatch(std::string(what) + ": state is not on the model's joint layout (field_dim " +
                             std::to_string(layout.field_dim()) + ")");
}

} // namespace

const char* to_string(Frame frame)
{
    return frame == Frame::lab ? "lab" : "interaction";
}

const char* to_string(Bath bath)
{
    return bath == Bath::hot ? "hot" : "cold";
}

bool AmplifierModel::resonant() const
{
    const double target = resonance_frequency();
    const double scale = std::max({std::abs(omega1), std::abs(omega2), std::abs(omega3), 1e-300});
    return std::abs(omega_f - target) <= 1e-12 * scale;
}

void AmplifierModel::validate() const
{
    if (!(omega3 > omega2 && omega2 > omega1))
        throw InvalidModel("level frequencies must satisfy omega3 > omega2 > omega1");
    if (interaction_order != 1 && interaction_order != 2)
        throw InvalidModel("interaction_order must be 1 or 2, got " + std::to_string(interaction_order));
    if (!(lambda >= 0.0))
        throw InvalidModel("lambda must be >= 0");
    if (!(gamma_h >= 0.0) || !(gamma_c >= 0.0))
        throw InvalidModel("bath rates must be >= 0");
    if (!(nbar_h >= 0.0) || !(nbar_c >= 0.0))
        throw InvalidModel("bath occupations must be >= 0");
    if (!(omega_f >= 0.0))
        throw InvalidModel("field frequency must be >= 0");
    if (frame == Frame::interaction && !resonant())
        throw UnsupportedConfiguration("interaction frame requires omega_f = (omega2 - omega1)/" +
                                       std::to_string(interaction_order));
}

BathChannel bath_channel(const AmplifierModel& model, Bath which)
{
    const int lower = which == Bath::hot ? 1 : 2;
    const double rate = which == Bath::hot ? model.gamma_h : model.gamma_c;
    const double nbar = which == Bath::hot ? model.nbar_h : model.nbar_c;
    return BathChannel{which, lower, 3, rate, nbar,
                       embed(atomic_transition_op(lower, 3), Subsystem::atom, model.layout)};
}

double planck_occupation(double gap, double temperature)
{
    if (!(gap > 0.0) || !(temperature > 0.0))
        throw InvalidArgument("planck_occupation needs gap > 0 and temperature > 0");
    return 1.0 / std::expm1(gap / temperature);
}

SparseMatrix atomic_hamiltonian_sparse(const AmplifierModel& model)
{
    std::vector<Triplet> t;
    add_atomic_terms(model, t);
    return from_triplets(model.layout.joint_dim(), t);
}

SparseMatrix field_hamiltonian_sparse(const AmplifierModel& model)
{
    std::vector<Triplet> t;
    add_field_terms(model, t);
    return from_triplets(model.layout.joint_dim(), t);
}

SparseMatrix interaction_hamiltonian_sparse(const AmplifierModel& model)
{
    std::vector<Triplet> t;
    add_interaction_terms(model, t);
    return from_triplets(model.layout.joint_dim(), t);
}

SparseMatrix generator_hamiltonian_sparse(const AmplifierModel& model)
{
    std::vector<Triplet> t;
    if (model.frame == Frame::lab)
    {
        add_atomic_terms(model, t);
        add_field_terms(model, t);
    }
    add_interaction_terms(model, t);
    return from_triplets(model.layout.joint_dim(), t);
}

Operator atomic_hamiltonian(const AmplifierModel& model)
{
    return to_operator(model, atomic_hamiltonian_sparse(model));
}

Operator field_hamiltonian(const AmplifierModel& model)
{
    return to_operator(model, field_hamiltonian_sparse(model));
}

Operator interaction_hamiltonian(const AmplifierModel& model)
{
    return to_operator(model, interaction_hamiltonian_sparse(model));
}

Operator build_hamiltonian(const AmplifierModel& model)
{
    model.validate();
    return to_operator(model, generator_hamiltonian_sparse(model));
}

void add_dissipator(const Matrix& rho, int field_dim, int lower, int upper, double rate, double nbar,
                    double scale, Matrix& out)
{
    const Eigen::Index n = field_dim;
    const Eigen::Index l = (lower - 1) * n;
    const Eigen::Index u = (upper - 1) * n;

    // Emission: sigma = |lower><upper|.
    const double down = scale * rate * (nbar + 1.0);
    if (down != 0.0)
    {
        out.block(l, l, n, n) += (2.0 * down) * rho.block(u, u, n, n);
        out.middleRows(u, n) -= down * rho.middleRows(u, n);
        out.middleCols(u, n) -= down * rho.middleCols(u, n);
    }

    // Absorption: sigma^dag = |upper><lower|.
    const double up = scale * rate * nbar;
    if (up != 0.0)
    {
        out.block(u, u, n, n) += (2.0 * up) * rho.block(l, l, n, n);
        out.middleRows(l, n) -= up * rho.middleRows(l, n);
        out.middleCols(l, n) -= up * rho.middleCols(l, n);
    }
}

Operator apply_dissipator(const DensityMatrix& rho, const BathChannel& channel)
{
    if (rho.space().kind() != Space::Kind::joint)
        throw LayoutMismatch("apply_dissipator needs a joint-space state");
    if (!(channel.lowering.space() == rho.space()))
        throw LayoutMismatch("apply_dissipator: channel and state live on different layouts");
    Matrix out = Matrix::Zero(rho.dim(), rho.dim());
    add_dissipator(rho.matrix(), rho.space().field_dim(), channel.lower, channel.upper, channel.rate,
                   channel.nbar, 1.0, out);
    return Operator(rho.space(), std::move(out));
}

Operator master_rhs(const DensityMatrix& rho, const AmplifierModel& model)
{
    require_joint(rho, model.layout, "master_rhs");
    const MasterEquation eq(model);
    return Operator(rho.space(), eq.apply(rho.matrix()));
}

MasterEquation::MasterEquation(const AmplifierModel& model)
    : m_model(model), m_h(generator_hamiltonian_sparse(model))
{
    model.validate();
    const Eigen::Index dim = m_h.rows();
    m_energy = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index r = 0; r < m_h.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m_h, r); it; ++it)
        {
            if (it.row() == it.col())
                m_energy(it.row()) = it.value().real();
            else if (it.row() < it.col())
                m_couplings.push_back({static_cast<Eigen::Index>(it.row()), static_cast<Eigen::Index>(it.col()),
                                       it.value().real()});
        }

    const int n = model.layout.field_dim();
    const double down_h = model.gamma_h * (model.nbar_h + 1.0), up_h = model.gamma_h * model.nbar_h;
    const double down_c = model.gamma_c * (model.nbar_c + 1.0), up_c = model.gamma_c * model.nbar_c;
    m_decay = Eigen::VectorXd::Zero(dim);
    m_decay.segment(0, n).setConstant(up_h);
    m_decay.segment(n, n).setConstant(up_c);
    m_decay.segment(2 * n, n).setConstant(down_h + down_c);
    m_diagonal_factor.resize(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i)
            m_diagonal_factor(i, j) = cplx(-m_decay(i) - m_decay(j), m_energy(j) - m_energy(i));
    for (const Jump& jp : {Jump{2, 0, 2.0 * down_h}, Jump{0, 2, 2.0 * up_h}, Jump{2, 1, 2.0 * down_c},
                           Jump{1, 2, 2.0 * up_c}})
        if (jp.rate != 0.0)
            m_jumps.push_back(jp);

    const Matrix dense(m_h);
    double span = 0.0;
    if (dense.size() > 0 && m_h.nonZeros() > 0)
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(dense, Eigen::EigenvaluesOnly);
        span = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
    }
    const double dissipative = 2.0 * model.gamma_h * (2.0 * model.nbar_h + 1.0) +
                               2.0 * model.gamma_c * (2.0 * model.nbar_c + 1.0);
    m_radius_bound = span + dissipative;
}

void MasterEquation::apply(const Matrix& rho, Matrix& out) const
{
    const Eigen::Index dim = rho.rows();
    out.resize(dim, dim);

    // Diagonal part of H together with the anticommutator terms of both dissipators.
    out.array() = m_diagonal_factor.array() * rho.array();

    // Off-diagonal couplings: -i (V rho - rho V) with V real symmetric.
    for (const Coupling& c : m_couplings)
    {
        out.col(c.col).noalias() += (I * c.value) * rho.col(c.row);
        out.col(c.row).noalias() += (I * c.value) * rho.col(c.col);
    }
    // i v z spelled out; std::complex multiplication is not inlined without fast-math.
    auto times_i = [](double v, cplx z) { return cplx(-v * z.imag(), v * z.real()); };
    for (Eigen::Index j = 0; j < dim; ++j)
        for (const Coupling& c : m_couplings)
        {
            out(c.row, j) -= times_i(c.value, rho(c.col, j));
            out(c.col, j) -= times_i(c.value, rho(c.row, j));
        }

    // Jump terms.
    const Eigen::Index n = m_model.layout.field_dim();
    for (const Jump& jp : m_jumps)
        out.block(jp.to * n, jp.to * n, n, n) += jp.rate * rho.block(jp.from * n, jp.from * n, n, n);
}

Matrix MasterEquation::apply(const Matrix& rho) const
{
    Matrix out;
    apply(rho, out);
    return out;
}

ReducedGenerator::ReducedGenerator(const MasterEquation& eq, const Matrix& seed)
    : m_dim(eq.hamiltonian().rows())
{
    const Eigen::Index dim = m_dim;
    if (seed.rows() != dim || seed.cols() != dim)
        throw LayoutMismatch("ReducedGenerator: seed matrix does not match the generator dimension");
    const Eigen::Index n = eq.model().layout.field_dim();

    std::vector<std::vector<std::pair<Eigen::Index, double>>> partners(static_cast<std::size_t>(dim));
    for (const MasterEquation::Coupling& c : eq.couplings())
    {
        partners[c.row].emplace_back(c.col, c.value);
        partners[c.col].emplace_back(c.row, c.value);
    }

    // Closure of the (Hermitian-symmetrized) seed support under the generator's couplings.
    constexpr Eigen::Index absent = -1;
    std::vector<Eigen::Index> slot(static_cast<std::size_t>(dim * dim), absent);
    std::vector<Eigen::Index> queue;
    auto visit = [&](Eigen::Index i, Eigen::Index j) {
        Eigen::Index& s = slot[j * dim + i];
        if (s == absent)
        {
            s = 0;
            queue.push_back(j * dim + i);
        }
    };
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i)
            if (seed(i, j) != cplx(0.0) || seed(j, i) != cplx(0.0))
                visit(i, j);
    for (std::size_t q = 0; q < queue.size(); ++q)
    {
        const Eigen::Index i = queue[q] % dim, j = queue[q] / dim;
        for (const auto& [p, v] : partners[i])
            visit(p, j);
        for (const auto& [p, v] : partners[j])
            visit(i, p);
        for (const MasterEquation::Jump& jp : eq.jumps())
            if (i / n == jp.from && j / n == jp.from)
                visit(jp.to * n + i % n, jp.to * n + j % n);
    }

    // Column-major order keeps gathers and scatters sequential.
    std::sort(queue.begin(), queue.end());
    for (std::size_t k = 0; k < queue.size(); ++k)
    {
        slot[queue[k]] = static_cast<Eigen::Index>(k);
        m_rows.push_back(queue[k] % dim);
        m_cols.push_back(queue[k] / dim);
    }
    for (std::size_t k = 0; k < queue.size(); ++k)
        m_mirror.push_back(slot[m_rows[k] * dim + m_cols[k]]);

    const Matrix& factor = eq.diagonal_factor();
    m_offsets.push_back(0);
    auto add = [&](Eigen::Index i, Eigen::Index j, cplx c) {
        const Eigen::Index s = slot[j * dim + i];
        if (s != absent && c != cplx(0.0))
        {
            m_sources.push_back(s);
            m_coeffs.push_back(c);
        }
    };
    for (std::size_t k = 0; k < queue.size(); ++k)
    {
        const Eigen::Index i = m_rows[k], j = m_cols[k];
        add(i, j, factor(i, j));
        for (const auto& [p, v] : partners[i])
            add(p, j, cplx(0.0, -v));
        for (const auto& [p, v] : partners[j])
            add(i, p, cplx(0.0, v));
        for (const MasterEquation::Jump& jp : eq.jumps())
            if (i / n == jp.to && j / n == jp.to)
                add(jp.from * n + i % n, jp.from * n + j % n, jp.rate);
        m_offsets.push_back(static_cast<Eigen::Index>(m_sources.size()));
    }
}

ReducedGenerator::Vector ReducedGenerator::gather(const Matrix& rho) const
{
    Vector y(size());
    for (Eigen::Index k = 0; k < size(); ++k)
        y(k) = rho(m_rows[k], m_cols[k]);
    return y;
}

void ReducedGenerator::scatter(const Vector& y, Matrix& rho) const
{
    rho.setZero(m_dim, m_dim);
    for (Eigen::Index k = 0; k < size(); ++k)
        rho(m_rows[k], m_cols[k]) = y(k);
}

void ReducedGenerator::apply(const Vector& y, Vector& out) const
{
    out.resize(size());
    const cplx* in = y.data();
    for (Eigen::Index r = 0; r < size(); ++r)
    {
        // Written out in real arithmetic; std::complex products are not inlined without fast-math.
        double re = 0.0, im = 0.0;
        for (Eigen::Index e = m_offsets[r]; e < m_offsets[r + 1]; ++e)
        {
            const cplx a = m_coeffs[e], b = in[m_sources[e]];
            re += a.real() * b.real() - a.imag() * b.imag();
            im += a.real() * b.imag() + a.imag() * b.real();
        }
        out(r) = cplx(re, im);
    }
}

void ReducedGenerator::symmetrize(Vector& y) const
{
    for (Eigen::Index k = 0; k < size(); ++k)
    {
        const Eigen::Index m = m_mirror[k];
        if (m < k)
            continue;
        const cplx v = 0.5 * (y(k) + std::conj(y(m)));
        y(k) = v;
        y(m) = std::conj(v);
    }
}

} // namespace ampsim
