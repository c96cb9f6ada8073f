#ifndef AMPSIM_PHASESPACE_HPP
#define AMPSIM_PHASESPACE_HPP

#include <iosfwd>

#include "ampsim/hilbert.hpp"

namespace ampsim
{

/*
 * Rectangular grid in the complex alpha plane, Re alpha along columns and
 * Im alpha along rows. Endpoints are included; cell area is the product of
 * the two spacings. Phase-space (x, p) maps to alpha = (x + i p)/sqrt(2).
 */
struct GridSpec
{
    double re_min = -6.0;
    double re_max = 6.0;
    double im_min = -6.0;
    double im_max = 6.0;
    int n_re = 201;
    int n_im = 201;

    static GridSpec square(double radius, int points);

    double re(int j) const;
    double im(int i) const;
    double cell_area() const;
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

struct PhaseSpaceGrid
{
    GridSpec spec;
    // values(i, j) at alpha = re(j) + i im(i)
    Eigen::MatrixXd values;

    double cell_area() const { return spec.cell_area(); }
    // Riemann sum of values * cell_area.
    double integral() const;
    double max_abs() const { return values.cwiseAbs().maxCoeff(); }
};

enum class CoveragePolicy
{
    ignore,
    // Throw GridCoverage when the quadrature sum misses 1 by more than 1%.
    require
};

inline constexpr double coverage_tol = 0.01;

// Q(alpha) = (1/pi) <alpha| rho |alpha>
double q_function_at(const DensityMatrix& rho_f, cplx alpha);
PhaseSpaceGrid q_function(const DensityMatrix& rho_f, const GridSpec& spec,
                          CoveragePolicy policy = CoveragePolicy::ignore);

/*
 * W(alpha) = (2/pi) sum_{m,n} rho_mn w_nm(alpha) with, for m >= n,
 *   w_nm = (-1)^n sqrt(n!/m!) (2 alpha*)^(m-n) exp(-2|alpha|^2) L_n^(m-n)(4|alpha|^2)
 * and w_mn = conj(w_nm).
 */
double wigner_at(const DensityMatrix& rho_f, cplx alpha);
PhaseSpaceGrid wigner_function(const DensityMatrix& rho_f, const GridSpec& spec,
                               CoveragePolicy policy = CoveragePolicy::ignore);

// L_n^(k)(x) by upward recurrence in n.
double generalized_laguerre(int n, double k, double x);

// sum_n (-1)^n rho_nn, which equals (pi/2) W(0).
double parity_expectation(const DensityMatrix& rho_f);

struct NegativityMetrics
{
    double min_value;
    cplx min_location;
    double negative_volume;
};

NegativityMetrics negativity_metrics(const PhaseSpaceGrid& grid);

enum class GridNorm
{
    max_abs,
    integrated_abs
};

double grid_distance(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b, GridNorm norm);

// Value at the grid point nearest to alpha.
double grid_value_near(const PhaseSpaceGrid& grid, cplx alpha);

// "# re_min,re_max,n_re", "# im_min,im_max,n_im", then n_im rows of n_re values.
void write_grid_csv(std::ostream& os, const PhaseSpaceGrid& grid);
PhaseSpaceGrid read_grid_csv(std::istream& is);

} // namespace ampsim

#endif
