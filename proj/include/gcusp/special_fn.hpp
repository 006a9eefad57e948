#pragma once

// Bessel, Hankel and cylinder functions of real order. Hankel functions are
// evaluated on the logarithmic cover: a cover point is a complex number z
// and the argument is w = exp(z/2) * x with arg w = Im z / 2, never reduced.

#include <complex>

namespace gcusp {

using cplx = std::complex<double>;

/// Value with an absolute error estimate.
struct Evaluated {
    cplx value;
    double error_estimate = 0.0;
    /// Set when the estimate exceeds 1e-10 relative to the value.
    bool degraded = false;
};

/// Both Hankel functions at one cover point.
struct HankelPair {
    cplx h1;
    cplx h2;
    double error_estimate = 0.0;
    /// Connection-formula half turns applied (signed).
    int half_turns = 0;
};

/// Radius beyond which the Hankel asymptotic expansion is used directly.
double switch_radius(double b);

/// Hankel expansion coefficient a_k(b).
double hankel_coefficient(double b, int k);

/// J_b(w) on the principal branch.
cplx bessel_j(double b, cplx w);

/// Y_b(w) on the principal branch.
cplx bessel_y(double b, cplx w);

/// J_b(x), Y_b(x) for real x > 0.
struct RealJY {
    double j;
    double y;
};
RealJY bessel_jy(double b, double x);

/// H^(1), H^(2) at w = exp(log_abs + i*arg) on the logarithmic cover.
HankelPair hankel_pair_at(double b, double log_abs, double arg);

/// H^(1), H^(2) at exp(z/2) * x.
HankelPair hankel_pair(double b, cplx z, double x);

/// H^(kind)_b(exp(z/2) * x) with an error estimate; kind is 1 or 2.
Evaluated hankel_eval(int kind, double b, cplx z, double x);

/// H^(kind)_b(exp(z/2) * x).
cplx hankel(int kind, double b, cplx z, double x);

/// d/dw H^(kind)_b(w) at w = exp(z/2) * x.
cplx hankel_derivative(int kind, double b, cplx z, double x);

/// Truncated Hankel expansion with terms k = 0..k_max. A negative k_max
/// truncates at the smallest term. Valid for |arg w| < pi.
Evaluated hankel_asymptotic(int kind, double b, cplx w, int k_max = 12);

/// Cover extensions of J and Y at exp(z/2) * x.
cplx bessel_j_cover(double b, cplx z, double x);
cplx bessel_y_cover(double b, cplx z, double x);

/// G_b(lambda, x) = Y_b(lambda) J_b(lambda x) - J_b(lambda) Y_b(lambda x).
double cylinder_g(double b, double lambda, double x);

/// G_b(exp(z/2), x); even in exp(z/2), hence single valued in exp(z).
cplx cylinder_g_cover(double b, cplx z, double x);

/// d/dx [ w^b H^(kind)_b(w) ] with w = exp(z/2) * x.
cplx hankel_weight_deriv(int kind, double b, cplx z, double x);

}  // namespace gcusp
