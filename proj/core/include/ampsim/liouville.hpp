#ifndef AMPSIM_LIOUVILLE_HPP
#define AMPSIM_LIOUVILLE_HPP

#include <vector>

#include "ampsim/hilbert.hpp"

namespace ampsim
{

enum class Frame
{
    lab,
    interaction
};

enum class Bath
{
    hot,
    cold
};

const char* to_string(Frame frame);
const char* to_string(Bath bath);

/*
 * Physical parameters of the three-level amplifier, hbar = k_B = 1 and all
 * frequencies angular. The hot bath drives 1<->3, the cold bath 2<->3 and the
 * field couples 1<->2 by emitting interaction_order photons per transition.
 */
struct AmplifierModel
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
    int interaction_order = 2;
    Frame frame = Frame::interaction;
    HilbertLayout layout{2};

    // omega_f == (omega2 - omega1) / interaction_order.
    bool resonant() const;
    double resonance_frequency() const { return (omega2 - omega1) / interaction_order; }

    // Throws InvalidModel or UnsupportedConfiguration.
    void validate() const;
};

struct BathChannel
{
    Bath which;
    int lower;
    int upper;
    double rate;
    double nbar;
    // sigma_{lower,upper} (x) 1_f
    Operator lowering;
};

BathChannel bath_channel(const AmplifierModel& model, Bath which);

// Bose occupation 1/(exp(gap/T) - 1).
double planck_occupation(double gap, double temperature);

Operator atomic_hamiltonian(const AmplifierModel& model);
Operator field_hamiltonian(const AmplifierModel& model);
// lambda (sigma12 (x) a^dag^k + h.c.) with k the interaction order.
Operator interaction_hamiltonian(const AmplifierModel& model);
// Full lab-frame H, or H_Int alone in the interaction frame.
Operator build_hamiltonian(const AmplifierModel& model);

SparseMatrix atomic_hamiltonian_sparse(const AmplifierModel& model);
SparseMatrix field_hamiltonian_sparse(const AmplifierModel& model);
SparseMatrix interaction_hamiltonian_sparse(const AmplifierModel& model);
SparseMatrix generator_hamiltonian_sparse(const AmplifierModel& model);

Operator apply_dissipator(const DensityMatrix& rho, const BathChannel& channel);
Operator master_rhs(const DensityMatrix& rho, const AmplifierModel& model);

// out += scale * D[rho] for one thermal channel acting on levels lower<->upper,
// using block operations on the atom-major layout.
void add_dissipator(const Matrix& rho, int field_dim, int lower, int upper, double rate, double nbar,
                    double scale, Matrix& out);

/*
 * Master-equation generator with the Hamiltonian prebuilt as a sparse matrix.
 * apply() evaluates -i[H, rho] + D_hot[rho] + D_cold[rho] in O((3N)^2)
 * work for the sparse structure of the amplifier Hamiltonians.
 */
class MasterEquation
{
public:
    struct Coupling
    {
        Eigen::Index row, col;
        double value;
    };
    // rate * rho_{from,from} block added to the {to,to} block (0-based atom levels).
    struct Jump
    {
        Eigen::Index from, to;
        double rate;
    };

    explicit MasterEquation(const AmplifierModel& model);

    const AmplifierModel& model() const { return m_model; }
    const SparseMatrix& hamiltonian() const { return m_h; }

    void apply(const Matrix& rho, Matrix& out) const;
    Matrix apply(const Matrix& rho) const;

    // Largest |eigenvalue| of the generator bounded by the Hamiltonian spectral
    // span plus the total dissipative rate. Bounds explicit step sizes.
    double spectral_radius_bound() const { return m_radius_bound; }

    // Structural pieces of the generator: out = F o rho - i [V, rho] + jumps,
    // with F the elementwise diagonal factor and V the real symmetric couplings (row < col).
    const Matrix& diagonal_factor() const { return m_diagonal_factor; }
    const std::vector<Coupling>& couplings() const { return m_couplings; }
    const std::vector<Jump>& jumps() const { return m_jumps; }

private:
    AmplifierModel m_model;
    SparseMatrix m_h;
    Eigen::VectorXd m_energy;
    Eigen::VectorXd m_decay;
    // -i (E_i - E_j) - (decay_i + decay_j)
    Matrix m_diagonal_factor;
    std::vector<Coupling> m_couplings;
    std::vector<Jump> m_jumps;
    double m_radius_bound;
};

/*
 * The generator restricted to the smallest set of matrix entries that
 * contains the support of a seed matrix and is mapped into itself by the
 * generator. Entries outside the set stay exactly zero for all times, so
 * evolving the packed vector is equivalent to evolving the full matrix.
 *
 * With L(a, n) = n + k [a = 2] the generator conserves L_i - L_j, so a state
 * that is diagonal in the joint basis only ever populates O(N) entries.
 */
class ReducedGenerator
{
public:
    using Vector = Eigen::VectorXcd;

    ReducedGenerator(const MasterEquation& eq, const Matrix& seed);

    Eigen::Index size() const { return static_cast<Eigen::Index>(m_rows.size()); }
    Eigen::Index dim() const { return m_dim; }

    Vector gather(const Matrix& rho) const;
    // Writes the packed entries into rho (resized to dim x dim); everything else is zeroed.
    void scatter(const Vector& y, Matrix& rho) const;

    void apply(const Vector& y, Vector& out) const;
    // y_(i,j) <- (y_(i,j) + conj(y_(j,i)))/2
    void symmetrize(Vector& y) const;

private:
    Eigen::Index m_dim;
    std::vector<Eigen::Index> m_rows;
    std::vector<Eigen::Index> m_cols;
    std::vector<Eigen::Index> m_mirror;
    // CSR form of the restricted generator.
    std::vector<Eigen::Index> m_offsets;
    std::vector<Eigen::Index> m_sources;
    std::vector<cplx> m_coeffs;
};

} // namespace ampsim

#endif
