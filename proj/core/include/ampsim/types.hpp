#ifndef AMPSIM_TYPES_HPP
#define AMPSIM_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace ampsim
{

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr cplx I{0.0, 1.0};

// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
    using Error::Error;
};

class InvalidDimension : public Error
{
public:
    using Error::Error;
};

class InvalidTransition : public Error
{
public:
    using Error::Error;
};

// Operands live on incompatible spaces (atom vs field vs joint, or different N).
class LayoutMismatch : public Error
{
public:
    using Error::Error;
};

// A finite Fock truncation discards more probability than allowed.
class TruncationTooSmall : public Error
{
public:
    TruncationTooSmall(const std::string& what, double tail_mass)
        : Error(what), m_tail_mass(tail_mass) {}
    double tail_mass() const { return m_tail_mass; }

private:
    double m_tail_mass;
};

// Matrix fails the density-matrix invariants (hermiticity, unit trace, positivity).
class NotAState : public Error
{
public:
    using Error::Error;
};

class InvalidModel : public Error
{
public:
    using Error::Error;
};

class UnsupportedConfiguration : public Error
{
public:
    using Error::Error;
};

class GridMismatch : public Error
{
public:
    using Error::Error;
};

class GridCoverage : public Error
{
public:
    using Error::Error;
};

class DegenerateNullSpace : public Error
{
public:
    DegenerateNullSpace(const std::string& what, int dimension)
        : Error(what), m_dimension(dimension) {}
    int dimension() const { return m_dimension; }

private:
    int m_dimension;
};

} // namespace ampsim

#endif
