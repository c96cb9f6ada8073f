#ifndef AMPSIM_HILBERT_HPP
#define AMPSIM_HILBERT_HPP

#include <optional>
#include <variant>

#include "ampsim/types.hpp"

namespace ampsim
{

enum class Subsystem
{
    atom,
    field
};

/*
 * Tensor layout of the three-level atom and a truncated field mode.
 *
 * Fock states |0>..|N-1> are kept, and the joint basis is atom-major:
 * joint index = (level - 1) * N + n, so a joint operator is a 3x3 grid of
 * N x N blocks with block (i, j) = <i| . |j> on the atom. Every module
 * relies on this ordering.
 */
class HilbertLayout
{
public:
    static constexpr int atom_dim = 3;

    explicit HilbertLayout(int field_dim);

    int field_dim() const { return m_field_dim; }
    int joint_dim() const { return atom_dim * m_field_dim; }

    // level is 1-based (|1>, |2>, |3>), fock is 0-based.
    int index(int level, int fock) const { return (level - 1) * m_field_dim + fock; }
    int block_offset(int level) const { return (level - 1) * m_field_dim; }

    bool operator==(const HilbertLayout&) const = default;

private:
    int m_field_dim;
};

// The space an operator acts on: the bare atom, the bare field, or the joint system.
class Space
{
public:
    enum class Kind
    {
        atom,
        field,
        joint
    };

    static Space atom() { return Space(Kind::atom, 0); }
    static Space field(int field_dim);
    static Space joint(const HilbertLayout& layout) { return Space(Kind::joint, layout.field_dim()); }

    Kind kind() const { return m_kind; }
    int field_dim() const { return m_field_dim; }
    int dim() const;
    HilbertLayout layout() const;

    bool operator==(const Space&) const = default;

private:
    Space(Kind kind, int field_dim) : m_kind(kind), m_field_dim(field_dim) {}

    Kind m_kind;
    int m_field_dim;
};

const char* to_string(Space::Kind kind);

class Operator
{
public:
    Operator(Space space, Matrix entries);

    const Space& space() const { return m_space; }
    const Matrix& matrix() const { return m_entries; }
    int dim() const { return static_cast<int>(m_entries.rows()); }

    Operator adjoint() const { return Operator(m_space, m_entries.adjoint()); }

    Operator& operator+=(const Operator& other);
    Operator& operator-=(const Operator& other);
    Operator& operator*=(cplx s);

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(Operator a, cplx s) { return a *= s; }
    friend Operator operator*(cplx s, Operator a) { return a *= s; }
    friend Operator operator*(const Operator& a, const Operator& b);

private:
    Space m_space;
    Matrix m_entries;
};

// Tolerances of the density-matrix invariants.
inline constexpr double hermiticity_tol = 1e-12;
inline constexpr double trace_tol = 1e-10;
inline constexpr double eigenvalue_clamp = 1e-10;
inline constexpr double negativity_failure = 1e-8;

/*
 * Hermitian, unit-trace, positive semidefinite operator.
 *
 * checked() runs every invariant (including a full eigen-decomposition) and
 * records the minimum eigenvalue; unchecked() only records the trace and is
 * meant for hot loops whose health is monitored elsewhere.
 */
class DensityMatrix
{
public:
    static DensityMatrix checked(Space space, Matrix entries);
    static DensityMatrix checked(Operator op) { return checked(op.space(), op.matrix()); }
    static DensityMatrix unchecked(Space space, Matrix entries);

    const Operator& op() const { return m_op; }
    const Space& space() const { return m_op.space(); }
    const Matrix& matrix() const { return m_op.matrix(); }
    int dim() const { return m_op.dim(); }

    double trace() const { return m_trace; }
    std::optional<double> min_eigenvalue() const { return m_min_eigenvalue; }
    double purity() const;

private:
    DensityMatrix(Operator op, double trace, std::optional<double> min_eig)
        : m_op(std::move(op)), m_trace(trace), m_min_eigenvalue(min_eig) {}

    Operator m_op;
    double m_trace;
    std::optional<double> m_min_eigenvalue;
};

namespace field_states
{
struct Vacuum
{
};
struct Fock
{
    int n;
};
struct Coherent
{
    cplx amplitude;
};
// Diagonal state with Poisson photon statistics and no phase coherence.
struct PoissonMixed
{
    double mean;
};
struct Thermal
{
    double mean;
};
} // namespace field_states

using FieldStateSpec = std::variant<field_states::Vacuum, field_states::Fock, field_states::Coherent,
                                    field_states::PoissonMixed, field_states::Thermal>;

namespace atom_states
{
struct Level
{
    int level; // 1-based
};
struct General
{
    Eigen::Matrix3cd rho;
};
} // namespace atom_states

using AtomStateSpec = std::variant<atom_states::Level, atom_states::General>;

struct FieldState
{
    DensityMatrix rho;
    // Probability above the truncation, removed by renormalization.
    double discarded_mass;
};

inline constexpr double default_max_tail_mass = 1e-6;

Operator annihilation_op(int field_dim);
Operator creation_op(int field_dim);
Operator number_op(int field_dim);
Operator identity_op(const Space& space);

// |lower><upper| on the atom, levels 1-based.
Operator atomic_transition_op(int lower, int upper);
Operator atomic_projector(int level);

Operator embed(const Operator& op, Subsystem side, const HilbertLayout& layout);

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep);

FieldState build_field_state(const FieldStateSpec& spec, int field_dim,
                             double max_tail_mass = default_max_tail_mass);
DensityMatrix build_atom_state(const AtomStateSpec& spec);
DensityMatrix build_joint_state(const AtomStateSpec& atom, const FieldStateSpec& field,
                                const HilbertLayout& layout,
                                double max_tail_mass = default_max_tail_mass);
DensityMatrix tensor_product(const DensityMatrix& atom, const DensityMatrix& field);

// Entropy in nats.
double von_neumann_entropy(const DensityMatrix& rho);
double von_neumann_entropy(const Matrix& rho);

struct SpectrumSummary
{
    double entropy;
    double min_eigenvalue;
};
SpectrumSummary spectrum_summary(const Matrix& rho);

cplx expectation(const DensityMatrix& rho, const Operator& obs);

} // namespace ampsim

#endif
