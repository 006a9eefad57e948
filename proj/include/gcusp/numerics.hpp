#pragma once

// Quadrature grids, finite-difference stencils and a deterministic parallel loop.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace gcusp {

using cplx = std::complex<double>;

/// Nodes with quadrature weights.
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// 20-point Gauss-Legendre panels between consecutive break points.
QuadratureGrid gauss_legendre_panels(const std::vector<double>& breaks);

/// Gauss-Legendre panels of equal width not exceeding max_width on [a, b].
QuadratureGrid gauss_legendre_uniform(double a, double b, double max_width);

/// Composite Simpson rule on n (odd, >= 3) equally spaced nodes.
QuadratureGrid simpson_uniform(double a, double b, std::size_t n);

/// Weights of the m-th derivative at x0 from nodes x[0..n-1] (Fornberg).
std::vector<double> fd_weights(double x0, const double* x, int n, int m);

/// m-th derivative (m = 1, 2) of sampled values with 5-point stencils,
/// centred in the interior and one-sided at the ends.
std::vector<cplx> differentiate(const std::vector<double>& x, const std::vector<cplx>& f, int m);

/// Integral of the local cubic interpolant over each interval [x_i, x_{i+1}].
std::vector<cplx> interval_integrals(const std::vector<double>& x, const std::vector<cplx>& f);

/// F_i = integral of f from x_0 to x_i using local cubic interpolation
/// (fourth order on smooth data, any strictly increasing grid with >= 4 points).
std::vector<cplx> cumulative_integral(const std::vector<double>& x, const std::vector<cplx>& f);

/// Worker count: GCUSP_THREADS if set, else the hardware concurrency.
unsigned worker_count();

/// Calls body(i) for i in [0, n) on worker_count() threads. Each index is
/// processed independently, so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gcusp
