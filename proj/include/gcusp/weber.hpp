#pragma once

// Weber transform of order b on [1, inf), its inverse against the spectral
// measure lambda / (J_b^2 + Y_b^2) d lambda, and the radial Bessel operator
// B_b = -d^2/dx^2 - (1/x) d/dx + b^2/x^2.

#include <functional>
#include <string>
#include <vector>

#include "gcusp/numerics.hpp"

namespace gcusp {

/// Samples of a function of x >= 1 with quadrature weights on its grid.
struct RadialFunction {
    std::vector<double> x;
    std::vector<cplx> values;
    std::vector<double> weights;
    /// Caller accepts that the function is cut off at the grid ends.
    bool truncated = false;
    /// Non-fatal accuracy remark from the producing operation.
    std::string warning;
};

/// Samples of a function of lambda >= 0 with quadrature weights.
struct SpectralFunction {
    std::vector<double> lambda;
    std::vector<cplx> values;
    std::vector<double> weights;
};

RadialFunction sample_radial(const QuadratureGrid& grid, const std::function<cplx(double)>& f);
SpectralFunction sample_spectral(const QuadratureGrid& grid, const std::function<cplx(double)>& g);

/// Gauss panels on [x_min, x_max] resolving oscillations up to frequency lambda_max.
QuadratureGrid radial_grid(double x_min, double x_max, double lambda_max);

/// Gauss panels on [lambda_min, lambda_max]: geometric below 1, then equal
/// panels resolving oscillations up to frequency x_max - 1.
QuadratureGrid spectral_grid(double lambda_min, double lambda_max, double x_max);

/// lambda / (J_b(lambda)^2 + Y_b(lambda)^2).
double spectral_density(double b, double lambda);

/// Forward transform evaluated on the given lambda nodes; the result carries
/// the lambda quadrature weights of `lambda_grid`.
SpectralFunction weber_forward(const RadialFunction& f, double b, const QuadratureGrid& lambda_grid);

/// Inverse transform evaluated on the given x nodes.
RadialFunction weber_inverse(const SpectralFunction& g, double b, const QuadratureGrid& x_grid);

/// B_b f with 5-point stencils on the grid of f.
RadialFunction apply_bessel_operator(const RadialFunction& f, double b);

/// B_b f computed as the inverse transform of lambda^2 times the forward transform.
RadialFunction apply_bessel_operator_spectral(const RadialFunction& f, double b,
                                              const QuadratureGrid& lambda_grid);

/// Inner products in L^2(x dx) and L^2(d mu_b).
cplx radial_inner(const RadialFunction& f, const RadialFunction& g);
cplx spectral_inner(const SpectralFunction& f, const SpectralFunction& g, double b);

}  // namespace gcusp
