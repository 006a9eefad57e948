#pragma once

// Resolvent of the radial cusp operator on the fibre-harmonic sector, its
// continuation to the logarithmic cover of the spectral parameter u = exp(z),
// the pole set {z : H^(1)_b(exp(z/2)) = 0}, weighted norms and the
// limiting-absorption check.

#include <optional>
#include <vector>

#include "gcusp/contour.hpp"
#include "gcusp/errors.hpp"
#include "gcusp/weber.hpp"

namespace gcusp {

struct GeometryConstants {
    double gamma;
    double b;
};

/// gamma_p = a (n - 2p - 1), b_p = (gamma_p + 1) / 2.
GeometryConstants geometry_constants(double a, int n, int p);

struct CuspGeometry {
    double a = 1.0;
    int n = 2;
    int p = 0;
    std::vector<double> mu;  // nonzero cross-section eigenvalues, ascending
    int m_p = 0;             // dim H^p(N)
    int m_pm1 = 0;           // dim H^{p-1}(N)

    double gamma(int q) const { return a * double(n - 2 * q - 1); }
    double b(int q) const { return 0.5 * (gamma(q) + 1.0); }
    /// Throws InputError on a violated field invariant.
    void validate() const;
};

/// Order of the Bessel operator and power of x conjugating it in one sector.
struct ResolventSector {
    double order;
    double weight;
};

/// Sector of forms without dx: order b_p, weight b_p.
ResolventSector alpha_sector(const CuspGeometry& g);
/// Sector of forms with dx: order b_{p-1} - 1, weight b_{p-1}; needs p >= 1.
ResolventSector beta_sector(const CuspGeometry& g);

using PoleReport = ZeroReport;

/// Evaluation at a pole. Carries the nearest located pole when one was found.
class ResolventPoleError : public PoleError {
public:
    ResolventPoleError(const std::string& what, std::optional<PoleReport> nearest)
        : PoleError(what), nearest(std::move(nearest)) {}
    std::optional<PoleReport> nearest;
};

/// r_b(u, x, t) = pi sqrt(x t) / (2 H^(1)_b(l)) G_b(l, min(x,t)) H^(1)_b(l max(x,t)),
/// l = exp(z/2), u = exp(z).
cplx resolvent_kernel(double b, cplx z, double x, double t);

/// Out = x^c (B_order - u)^{-1} (t^{-c} f), u = exp(z), continued in z.
/// Out solves -y'' + ((2c-1)/x) y' + ((order^2 - c^2)/x^2) y - u y = f,
/// y(1) = 0, outgoing at infinity. f is taken as zero outside its grid.
/// In kernel form the integrand is -x^{c-1/2} t^{1/2-c} r_order(u, x, t) f(t).
RadialFunction apply_cusp_resolvent(const RadialFunction& f, double order, cplx z, double weight);
inline RadialFunction apply_cusp_resolvent(const RadialFunction& f, double b, cplx z) {
    return apply_cusp_resolvent(f, b, z, b);
}
inline RadialFunction apply_cusp_resolvent(const RadialFunction& f, const ResolventSector& s, cplx z) {
    return apply_cusp_resolvent(f, s.order, z, s.weight);
}

/// Same operator through the Weber transform; defined for 0 < Im z < 2 pi only.
RadialFunction apply_cusp_resolvent_spectral(const RadialFunction& f, double order, cplx z, double weight,
                                             const QuadratureGrid& lambda_grid);

/// -y'' + ((2c-1)/x) y' + ((order^2 - c^2)/x^2) y - u y with 5-point stencils.
RadialFunction apply_conjugated_operator(const RadialFunction& y, double order, double weight, cplx u);

struct PoleSearch {
    std::vector<PoleReport> poles;  // sorted by Re z, then Im z
    int winding = 0;
};

/// Zeros of H^(1)_b(exp(z/2)) in a rectangle of the z-plane; residual = |H^(1)_b|.
PoleSearch find_resolvent_poles(double b, const Rect& region, const ZeroSearchOptions& opt = {});

/// Winding mismatch after refinement; `partial` holds what was found.
class IncompletePoleSearchError : public IncompleteSearchError {
public:
    IncompletePoleSearchError(const std::string& what, PoleSearch partial)
        : IncompleteSearchError(what), partial(std::move(partial)) {}
    PoleSearch partial;
};

struct AbsorptionStep {
    double eps;
    cplx jump;  // (S(u0 + i eps) - S(u0 - i eps)) / (2 pi i)
};

struct AbsorptionReport {
    std::vector<AbsorptionStep> steps;
    cplx limit;            // extrapolated to eps = 0
    double density;        // G_b(l,x) G_b(l,t) / (2 (J_b(l)^2 + Y_b(l)^2)), l = sqrt(u0)
    double deviation;      // |limit - density|
    double reflection_defect;  // max |r_b(u-) - conj r_b(u+)| over the ladder
};

/// S = -r_b / sqrt(x t) is the kernel of (B_b - u)^{-1} against t dt.
/// u0 + i eps lies at Im z = arg, u0 - i eps at Im z = 2 pi - arg (same sheet).
AbsorptionReport limiting_absorption_check(double b, double u0, double x, double t,
                                           const std::vector<double>& eps_ladder);

enum class WeightSign { plus, minus };

/// log of ( integral |exp(-+x^2/2) f|^2 x^{-gamma} dx )^{1/2} on the grid of f.
double weighted_log_norm(const RadialFunction& f, WeightSign sign, double gamma);
/// exp(weighted_log_norm); throws RegimeError if that overflows.
double weighted_norm(const RadialFunction& f, WeightSign sign, double gamma);

}  // namespace gcusp
