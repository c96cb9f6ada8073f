#include "ampsim/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace ampsim
{

namespace
{

std::string dims(int a, int b)
{
    return std::to_string(a) + " vs " + std::to_string(b);
}

void require_same_space(const Space& a, const Space& b, const char* what)
{
    if (!(a == b))
        throw LayoutMismatch(std::string(what) + ": operands live on different spaces (" +
                             to_string(a.kind()) + "/" + std::to_string(a.field_dim()) + " vs " +
                             to_string(b.kind()) + "/" + std::to_string(b.field_dim()) + ")");
}

double hermiticity_error(const Matrix& m)
{
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Poisson mass outside [0, n_keep) for the given mean, summed term by term in log space.
double poisson_tail(double mean, int n_keep)
{
    if (mean <= 0.0)
        return 0.0;
    const double log_mean = std::log(mean);
    double tail = 0.0;
    const int n_stop = n_keep + 200 + static_cast<int>(10.0 * mean + 10.0 * std::sqrt(mean));
    for (int n = n_keep; n < n_stop; ++n)
    {
        const double term = std::exp(-mean + n * log_mean - std::lgamma(n + 1.0));
        tail += term;
        if (n > mean && term < 1e-20 * tail)
            break;
        if (n > mean && tail == 0.0 && term == 0.0)
            break;
    }
    return tail;
}

void check_tail(double tail, double max_tail_mass, int field_dim)
{
    if (tail > max_tail_mass)
        throw TruncationTooSmall("field_dim " + std::to_string(field_dim) +
                                     " discards probability " + std::to_string(tail) +
                                     " (limit " + std::to_string(max_tail_mass) + ")",
                                 tail);
}

} // namespace

HilbertLayout::HilbertLayout(int field_dim) : m_field_dim(field_dim)
{
    if (field_dim < 2)
        throw InvalidDimension("field dimension must be >= 2, got " + std::to_string(field_dim));
}

Space Space::field(int field_dim)
{
    if (field_dim < 2)
        throw InvalidDimension("field dimension must be >= 2, got " + std::to_string(field_dim));
    return Space(Kind::field, field_dim);
}

int Space::dim() const
{
    switch (m_kind)
    {
    case Kind::atom:
        return HilbertLayout::atom_dim;
    case Kind::field:
        return m_field_dim;
    case Kind::joint:
        return HilbertLayout::atom_dim * m_field_dim;
    }
    return 0;
}

HilbertLayout Space::layout() const
{
    if (m_kind != Kind::joint)
        throw LayoutMismatch(std::string("a ") + to_string(m_kind) + " operator has no joint layout");
    return HilbertLayout(m_field_dim);
}

const char* to_string(Space::Kind kind)
{
    switch (kind)
    {
    case Space::Kind::atom:
        return "atom";
    case Space::Kind::field:
        return "field";
    case Space::Kind::joint:
        return "joint";
    }
    return "?";
}

Operator::Operator(Space space, Matrix entries) : m_space(space), m_entries(std::move(entries))
{
    if (m_entries.rows() != m_entries.cols())
        throw InvalidDimension("operator must be square, got " +
                               dims(static_cast<int>(m_entries.rows()), static_cast<int>(m_entries.cols())));
    if (m_entries.rows() != m_space.dim())
        throw InvalidDimension("operator dimension does not match its space: " +
                               dims(static_cast<int>(m_entries.rows()), m_space.dim()));
}

Operator& Operator::operator+=(const Operator& other)
{
    require_same_space(m_space, other.m_space, "operator +");
    m_entries += other.m_entries;
    return *this;
}

Operator& Operator::operator-=(const Operator& other)
{
    require_same_space(m_space, other.m_space, "operator -");
    m_entries -= other.m_entries;
    return *this;
}

Operator& Operator::operator*=(cplx s)
{
    m_entries *= s;
    return *this;
}

Operator operator*(const Operator& a, const Operator& b)
{
    require_same_space(a.m_space, b.m_space, "operator *");
    return Operator(a.m_space, a.m_entries * b.m_entries);
}

DensityMatrix DensityMatrix::checked(Space space, Matrix entries)
{
    Operator op(space, std::move(entries));
    const Matrix& m = op.matrix();
    const double herm = hermiticity_error(m);
    if (herm > hermiticity_tol)
        throw NotAState("matrix is not Hermitian (max |rho - rho^dag| = " + std::to_string(herm) + ")");
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > trace_tol)
        throw NotAState("trace must be 1, got " + std::to_string(tr));
    const Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -eigenvalue_clamp)
        throw NotAState("negative eigenvalue " + std::to_string(min_eig));
    return DensityMatrix(std::move(op), tr, min_eig);
}

DensityMatrix DensityMatrix::unchecked(Space space, Matrix entries)
{
    Operator op(space, std::move(entries));
    const double tr = op.matrix().trace().real();
    return DensityMatrix(std::move(op), tr, std::nullopt);
}

double DensityMatrix::purity() const
{
    // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho.
    return matrix().squaredNorm();
}

Operator annihilation_op(int field_dim)
{
    const Space space = Space::field(field_dim);
    Matrix a = Matrix::Zero(field_dim, field_dim);
    for (int n = 1; n < field_dim; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(space, std::move(a));
}

Operator creation_op(int field_dim)
{
    return annihilation_op(field_dim).adjoint();
}

Operator number_op(int field_dim)
{
    Matrix n = Matrix::Zero(field_dim, field_dim);
    for (int k = 0; k < field_dim; ++k)
        n(k, k) = static_cast<double>(k);
    return Operator(Space::field(field_dim), std::move(n));
}

Operator identity_op(const Space& space)
{
    return Operator(space, Matrix::Identity(space.dim(), space.dim()));
}

Operator atomic_transition_op(int lower, int upper)
{
    if (lower < 1 || upper > 3 || lower >= upper)
        throw InvalidTransition("transition requires 1 <= lower < upper <= 3, got (" +
                                std::to_string(lower) + ", " + std::to_string(upper) + ")");
    Matrix s = Matrix::Zero(3, 3);
    s(lower - 1, upper - 1) = 1.0;
    return Operator(Space::atom(), std::move(s));
}

Operator atomic_projector(int level)
{
    if (level < 1 || level > 3)
        throw InvalidTransition("atomic level must be 1, 2 or 3, got " + std::to_string(level));
    Matrix p = Matrix::Zero(3, 3);
    p(level - 1, level - 1) = 1.0;
    return Operator(Space::atom(), std::move(p));
}

Operator embed(const Operator& op, Subsystem side, const HilbertLayout& layout)
{
    const int n = layout.field_dim();
    const Matrix& m = op.matrix();
    Matrix out = Matrix::Zero(layout.joint_dim(), layout.joint_dim());
    if (side == Subsystem::atom)
    {
        if (op.space().kind() != Space::Kind::atom)
            throw LayoutMismatch("embed(atom) expects an atom operator");
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (m(i, j) != cplx(0.0))
                    out.block(i * n, j * n, n, n).diagonal().setConstant(m(i, j));
    }
    else
    {
        if (op.space().kind() != Space::Kind::field || op.space().field_dim() != n)
            throw LayoutMismatch("embed(field) expects a field operator of dimension " + std::to_string(n));
        for (int i = 0; i < 3; ++i)
            out.block(i * n, i * n, n, n) = m;
    }
    return Operator(Space::joint(layout), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep)
{
    if (rho.space().kind() != Space::Kind::joint)
        throw LayoutMismatch("partial_trace needs a joint-space state");
    const int n = rho.space().field_dim();
    const Matrix& m = rho.matrix();
    if (keep == Subsystem::field)
    {
        Matrix out = m.block(0, 0, n, n) + m.block(n, n, n, n) + m.block(2 * n, 2 * n, n, n);
        return DensityMatrix::unchecked(Space::field(n), std::move(out));
    }
    Matrix out(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = m.block(i * n, j * n, n, n).trace();
    return DensityMatrix::unchecked(Space::atom(), std::move(out));
}

FieldState build_field_state(const FieldStateSpec& spec, int field_dim, double max_tail_mass)
{
    const Space space = Space::field(field_dim);
    Matrix rho = Matrix::Zero(field_dim, field_dim);
    double tail = 0.0;

    auto set_diagonal_from_logs = [&](auto&& log_p) {
        double kept = 0.0;
        for (int n = 0; n < field_dim; ++n)
        {
            const double p = std::exp(log_p(n));
            rho(n, n) = p;
            kept += p;
        }
        rho /= kept;
    };

    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, field_states::Vacuum>)
            {
                rho(0, 0) = 1.0;
            }
            else if constexpr (std::is_same_v<T, field_states::Fock>)
            {
                if (s.n < 0 || s.n >= field_dim)
                    throw InvalidDimension("fock n = " + std::to_string(s.n) + " needs field_dim > n, got " +
                                           std::to_string(field_dim));
                rho(s.n, s.n) = 1.0;
            }
            else if constexpr (std::is_same_v<T, field_states::Coherent>)
            {
                const double mean = std::norm(s.amplitude);
                tail = poisson_tail(mean, field_dim);
                check_tail(tail, max_tail_mass, field_dim);
                Eigen::VectorXcd c = Eigen::VectorXcd::Zero(field_dim);
                if (mean == 0.0)
                {
                    c(0) = 1.0;
                }
                else
                {
                    const double log_r = std::log(std::abs(s.amplitude));
                    const double phase = std::arg(s.amplitude);
                    for (int n = 0; n < field_dim; ++n)
                        c(n) = std::polar(std::exp(-0.5 * mean + n * log_r - 0.5 * std::lgamma(n + 1.0)), n * phase);
                    c.normalize();
                }
                rho = c * c.adjoint();
            }
            else if constexpr (std::is_same_v<T, field_states::PoissonMixed>)
            {
                if (!(s.mean >= 0.0))
                    throw InvalidArgument("poisson_mixed mean must be >= 0");
                if (s.mean == 0.0)
                {
                    rho(0, 0) = 1.0;
                    return;
                }
                tail = poisson_tail(s.mean, field_dim);
                check_tail(tail, max_tail_mass, field_dim);
                const double log_mean = std::log(s.mean);
                set_diagonal_from_logs([&](int n) { return -s.mean + n * log_mean - std::lgamma(n + 1.0); });
            }
            else if constexpr (std::is_same_v<T, field_states::Thermal>)
            {
                if (!(s.mean >= 0.0))
                    throw InvalidArgument("thermal mean must be >= 0");
                if (s.mean == 0.0)
                {
                    rho(0, 0) = 1.0;
                    return;
                }
                const double q = s.mean / (1.0 + s.mean);
                tail = std::pow(q, field_dim);
                check_tail(tail, max_tail_mass, field_dim);
                const double log_q = std::log(q);
                const double log_norm = std::log1p(-q);
                set_diagonal_from_logs([&](int n) { return log_norm + n * log_q; });
            }
        },
        spec);

    return FieldState{DensityMatrix::checked(space, std::move(rho)), tail};
}

DensityMatrix build_atom_state(const AtomStateSpec& spec)
{
    if (const auto* lvl = std::get_if<atom_states::Level>(&spec))
    {
        if (lvl->level < 1 || lvl->level > 3)
            throw InvalidArgument("atomic level must be 1, 2 or 3, got " + std::to_string(lvl->level));
        return DensityMatrix::checked(atomic_projector(lvl->level));
    }
    return DensityMatrix::checked(Space::atom(), std::get<atom_states::General>(spec).rho);
}

DensityMatrix tensor_product(const DensityMatrix& atom, const DensityMatrix& field)
{
    if (atom.space().kind() != Space::Kind::atom || field.space().kind() != Space::Kind::field)
        throw LayoutMismatch("tensor_product expects (atom, field) states");
    const HilbertLayout layout(field.space().field_dim());
    const int n = layout.field_dim();
    Matrix out(layout.joint_dim(), layout.joint_dim());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.block(i * n, j * n, n, n) = atom.matrix()(i, j) * field.matrix();
    return DensityMatrix::unchecked(Space::joint(layout), std::move(out));
}

DensityMatrix build_joint_state(const AtomStateSpec& atom, const FieldStateSpec& field,
                                const HilbertLayout& layout, double max_tail_mass)
{
    const DensityMatrix rho_a = build_atom_state(atom);
    const FieldState rho_f = build_field_state(field, layout.field_dim(), max_tail_mass);
    return tensor_product(rho_a, rho_f.rho);
}

SpectrumSummary spectrum_summary(const Matrix& rho)
{
    const Matrix h = 0.5 * (rho + rho.adjoint());
    const Eigen::Index dim = h.rows();

    // Exact zeros split h into independent blocks; diagonalize each one.
    std::vector<Eigen::Index> root(static_cast<std::size_t>(dim));
    std::iota(root.begin(), root.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index a) {
        while (root[a] != a)
            a = root[a] = root[root[a]];
        return a;
    };
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (h(i, j) != cplx(0.0))
                root[find(i)] = find(j);
    std::vector<std::vector<Eigen::Index>> blocks(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i)
        blocks[find(i)].push_back(i);

    double s = 0.0;
    double min_ev = std::numeric_limits<double>::infinity();
    auto accumulate = [&](double ev) {
        if (ev > 0.0)
            s -= ev * std::log(ev);
        min_ev = std::min(min_ev, ev);
    };
    for (const auto& block : blocks)
    {
        if (block.size() == 1)
        {
            accumulate(h(block[0], block[0]).real());
            continue;
        }
        if (block.empty())
            continue;
        const auto m = static_cast<Eigen::Index>(block.size());
        Matrix sub(m, m);
        for (Eigen::Index b = 0; b < m; ++b)
            for (Eigen::Index a = 0; a < m; ++a)
                sub(a, b) = h(block[a], block[b]);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
        for (Eigen::Index k = 0; k < m; ++k)
            accumulate(es.eigenvalues()(k));
    }
    return {s, min_ev};
}

double von_neumann_entropy(const Matrix& rho)
{
    const SpectrumSummary sum = spectrum_summary(rho);
    if (sum.min_eigenvalue < -negativity_failure)
        throw NotAState("entropy of a matrix with eigenvalue " + std::to_string(sum.min_eigenvalue));
    return sum.entropy;
}

double von_neumann_entropy(const DensityMatrix& rho)
{
    return von_neumann_entropy(rho.matrix());
}

cplx expectation(const DensityMatrix& rho, const Operator& obs)
{
    require_same_space(rho.space(), obs.space(), "expectation");
    // Tr[rho A] without forming the product.
    return (rho.matrix().transpose().cwiseProduct(obs.matrix())).sum();
}

} // namespace ampsim
