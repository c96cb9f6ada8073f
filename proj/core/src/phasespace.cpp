#include "ampsim/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace ampsim
{

namespace
{

constexpr double inv_pi = std::numbers::inv_pi;
constexpr double rescale_limit = 1e150;

void require_field(const DensityMatrix& rho, const char* what)
{
    if (rho.space().kind() != Space::Kind::field)
        throw LayoutMismatch(std::string(what) + " needs a field-only state; partial-trace the joint state first");
}

bool is_diagonal(const Matrix& m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != j && m(i, j) != cplx(0.0))
                return false;
    return true;
}

std::vector<double> log_factorials(int n)
{
    std::vector<double> lf(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        lf[k] = std::lgamma(k + 1.0);
    return lf;
}

// Shared per-state data for repeated point evaluation.
struct FieldEvaluator
{
    const Matrix& rho;
    int dim;
    bool diagonal;
    std::vector<double> lf;

    explicit FieldEvaluator(const Matrix& r)
        : rho(r), dim(static_cast<int>(r.rows())), diagonal(is_diagonal(r)), lf(log_factorials(dim))
    {
    }

    double q(cplx alpha) const
    {
        const double r = std::abs(alpha);
        if (r == 0.0)
            return inv_pi * rho(0, 0).real();
        const double log_r = std::log(r);
        const double theta = std::arg(alpha);
        // u_n = <n|alpha> = exp(-r^2/2) alpha^n / sqrt(n!)
        Eigen::VectorXcd u(dim);
        for (int n = 0; n < dim; ++n)
            u(n) = std::polar(std::exp(-0.5 * r * r + n * log_r - 0.5 * lf[n]), n * theta);
        if (diagonal)
        {
            double acc = 0.0;
            for (int n = 0; n < dim; ++n)
                acc += rho(n, n).real() * std::norm(u(n));
            return inv_pi * acc;
        }
        return inv_pi * u.dot(rho * u).real();
    }

    double w(cplx alpha) const
    {
        const double r2 = std::norm(alpha);
        const double x = 4.0 * r2;
        const double r = std::sqrt(r2);
        const double theta = std::arg(alpha);
        const int max_d = diagonal ? 0 : dim - 1;

        double total = 0.0;
        for (int d = 0; d <= max_d; ++d)
        {
            if (d > 0 && r == 0.0)
                break;
            // g_n = sqrt(n! d! / (n+d)!) L_n^(d)(x), g_0 = 1.
            double g_prev = 0.0;
            double g = 1.0;
            double log_scale = 0.0;
            cplx s = 0.0;
            for (int n = 0; n + d < dim; ++n)
            {
                const cplx rho_mn = rho(n + d, n);
                if (rho_mn != cplx(0.0))
                    s += (n % 2 == 0 ? 1.0 : -1.0) * g * rho_mn;
                const double g_next = ((2.0 * n + 1.0 + d - x) * g - std::sqrt(double(n) * (n + d)) * g_prev) /
                                      std::sqrt((n + 1.0) * (n + 1.0 + d));
                g_prev = g;
                g = g_next;
                if (std::abs(g) > rescale_limit)
                {
                    g /= rescale_limit;
                    g_prev /= rescale_limit;
                    s /= rescale_limit;
                    log_scale += std::log(rescale_limit);
                }
            }
            if (s == cplx(0.0))
                continue;
            // P_d = (2 alpha*)^d exp(-2 r^2) / sqrt(d!)
            const double log_mag = (d > 0 ? d * std::log(2.0 * r) : 0.0) - 2.0 * r2 - 0.5 * lf[d] + log_scale;
            const cplx p = std::polar(std::exp(log_mag), -d * theta);
            total += (d == 0 ? 1.0 : 2.0) * (s * p).real();
        }
        return 2.0 * inv_pi * total;
    }
};

template <typename F>
PhaseSpaceGrid evaluate_grid(const GridSpec& spec, F&& f)
{
    spec.validate();
    PhaseSpaceGrid grid{spec, Eigen::MatrixXd(spec.n_im, spec.n_re)};
    for (int i = 0; i < spec.n_im; ++i)
        for (int j = 0; j < spec.n_re; ++j)
            grid.values(i, j) = f(cplx(spec.re(j), spec.im(i)));
    return grid;
}

void check_coverage(const PhaseSpaceGrid& grid, CoveragePolicy policy, const char* what)
{
    if (policy == CoveragePolicy::ignore)
        return;
    const double total = grid.integral();
    if (std::abs(total - 1.0) > coverage_tol)
        throw GridCoverage(fmt::format("{} grid integrates to {} (tolerance {}); enlarge or refine the grid", what,
                                       total, coverage_tol));
}

std::string number(double v)
{
    return fmt::format("{}", v);
}

} // namespace

GridSpec GridSpec::square(double radius, int points)
{
    return GridSpec{-radius, radius, -radius, radius, points, points};
}

double GridSpec::re(int j) const
{
    return n_re == 1 ? re_min : re_min + (re_max - re_min) * j / (n_re - 1);
}

double GridSpec::im(int i) const
{
    return n_im == 1 ? im_min : im_min + (im_max - im_min) * i / (n_im - 1);
}

double GridSpec::cell_area() const
{
    const double dre = n_re > 1 ? (re_max - re_min) / (n_re - 1) : 0.0;
    const double dim = n_im > 1 ? (im_max - im_min) / (n_im - 1) : 0.0;
    return dre * dim;
}

void GridSpec::validate() const
{
    if (n_re < 1 || n_im < 1)
        throw InvalidArgument("grid needs at least one point per axis");
    if (!(re_max >= re_min) || !(im_max >= im_min))
        throw InvalidArgument("grid bounds must satisfy min <= max");
}

double PhaseSpaceGrid::integral() const
{
    return values.sum() * cell_area();
}

double q_function_at(const DensityMatrix& rho_f, cplx alpha)
{
    require_field(rho_f, "q_function");
    return FieldEvaluator(rho_f.matrix()).q(alpha);
}

PhaseSpaceGrid q_function(const DensityMatrix& rho_f, const GridSpec& spec, CoveragePolicy policy)
{
    require_field(rho_f, "q_function");
    const FieldEvaluator ev(rho_f.matrix());
    PhaseSpaceGrid grid = evaluate_grid(spec, [&](cplx a) { return ev.q(a); });
    check_coverage(grid, policy, "Q");
    return grid;
}

double wigner_at(const DensityMatrix& rho_f, cplx alpha)
{
    require_field(rho_f, "wigner_function");
    return FieldEvaluator(rho_f.matrix()).w(alpha);
}

PhaseSpaceGrid wigner_function(const DensityMatrix& rho_f, const GridSpec& spec, CoveragePolicy policy)
{
    require_field(rho_f, "wigner_function");
    const FieldEvaluator ev(rho_f.matrix());
    PhaseSpaceGrid grid = evaluate_grid(spec, [&](cplx a) { return ev.w(a); });
    check_coverage(grid, policy, "W");
    return grid;
}

double generalized_laguerre(int n, double k, double x)
{
    if (n < 0)
        throw InvalidArgument("Laguerre degree must be >= 0");
    double prev = 1.0;
    if (n == 0)
        return prev;
    double cur = 1.0 + k - x;
    for (int j = 1; j < n; ++j)
    {
        const double next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

double parity_expectation(const DensityMatrix& rho_f)
{
    require_field(rho_f, "parity_expectation");
    const Matrix& m = rho_f.matrix();
    double p = 0.0;
    for (Eigen::Index n = 0; n < m.rows(); ++n)
        p += (n % 2 == 0 ? 1.0 : -1.0) * m(n, n).real();
    return p;
}

NegativityMetrics negativity_metrics(const PhaseSpaceGrid& grid)
{
    Eigen::Index imin = 0, jmin = 0;
    const double min_value = grid.values.minCoeff(&imin, &jmin);
    const double negative = (-grid.values.array()).max(0.0).sum() * grid.cell_area();
    return {min_value, cplx(grid.spec.re(static_cast<int>(jmin)), grid.spec.im(static_cast<int>(imin))), negative};
}

double grid_distance(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b, GridNorm norm)
{
    if (!(a.spec == b.spec))
        throw GridMismatch("grid_distance needs identical grid specs");
    const Eigen::MatrixXd diff = (a.values - b.values).cwiseAbs();
    return norm == GridNorm::max_abs ? diff.maxCoeff() : diff.sum() * a.cell_area();
}

double grid_value_near(const PhaseSpaceGrid& grid, cplx alpha)
{
    const GridSpec& s = grid.spec;
    auto nearest = [](double v, double lo, double hi, int n) {
        if (n == 1)
            return 0;
        const long k = std::lround((v - lo) / (hi - lo) * (n - 1));
        return static_cast<int>(std::clamp<long>(k, 0, n - 1));
    };
    return grid.values(nearest(alpha.imag(), s.im_min, s.im_max, s.n_im),
                       nearest(alpha.real(), s.re_min, s.re_max, s.n_re));
}

void write_grid_csv(std::ostream& os, const PhaseSpaceGrid& grid)
{
    const GridSpec& s = grid.spec;
    os << "# " << number(s.re_min) << ',' << number(s.re_max) << ',' << s.n_re << '\n';
    os << "# " << number(s.im_min) << ',' << number(s.im_max) << ',' << s.n_im << '\n';
    for (int i = 0; i < s.n_im; ++i)
    {
        for (int j = 0; j < s.n_re; ++j)
        {
            if (j > 0)
                os << ',';
            os << number(grid.values(i, j));
        }
        os << '\n';
    }
}

PhaseSpaceGrid read_grid_csv(std::istream& is)
{
    auto header = [&](double& lo, double& hi, int& n) {
        std::string line;
        if (!std::getline(is, line) || line.size() < 2 || line[0] != '#')
            throw InvalidArgument("grid CSV: missing '#' header line");
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line.substr(1));
        if (!(ss >> lo >> hi >> n))
            throw InvalidArgument("grid CSV: malformed header '" + line + "'");
    };
    GridSpec spec;
    header(spec.re_min, spec.re_max, spec.n_re);
    header(spec.im_min, spec.im_max, spec.n_im);
    spec.validate();
    PhaseSpaceGrid grid{spec, Eigen::MatrixXd(spec.n_im, spec.n_re)};
    std::string line;
    for (int i = 0; i < spec.n_im; ++i)
    {
        if (!std::getline(is, line))
            throw InvalidArgument("grid CSV: expected " + std::to_string(spec.n_im) + " rows");
        std::istringstream row(line);
        std::string cell;
        for (int j = 0; j < spec.n_re; ++j)
        {
            if (!std::getline(row, cell, ','))
                throw InvalidArgument("grid CSV: short row " + std::to_string(i));
            grid.values(i, j) = std::stod(cell);
        }
    }
    return grid;
}

} // namespace ampsim
