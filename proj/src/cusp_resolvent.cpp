#include "gcusp/cusp_resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gcusp/special_fn.hpp"

namespace gcusp {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleThreshold = 1e-12;

// Zeros of s coincide with those of H^(1)_b(w), w = exp(z/2); the factor
// exp(-i w) sqrt(w) removes the exponential growth along the search contours.
cplx scaled_h1(double b, cplx z) {
    const cplx w = std::exp(0.5 * z);
    return hankel(1, b, z, 1.0) * std::exp(cplx(0, -1) * w) * std::exp(0.25 * z);
}

cplx scaled_h1_deriv(double b, cplx z) {
    const cplx w = std::exp(0.5 * z);
    const cplx h = hankel(1, b, z, 1.0);
    const cplx dh = hankel_derivative(1, b, z, 1.0);
    return std::exp(cplx(0, -1) * w) * std::exp(0.25 * z) * (0.5 * w * dh + h * (cplx(0, -0.5) * w + 0.25));
}

cplx scaled_h2(double b, cplx z) {
    const cplx w = std::exp(0.5 * z);
    return hankel(2, b, z, 1.0) * std::exp(cplx(0, 1) * w) * std::exp(0.25 * z);
}

void check_finite(cplx z, const char* what) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InputError(what);
}

[[noreturn]] void throw_pole(double b, cplx z) {
    std::optional<PoleReport> nearest;
    try {
        PoleReport r = newton_refine([b](cplx s) { return scaled_h1(b, s); },
                                     [b](cplx s) { return scaled_h1_deriv(b, s); }, z);
        if (std::abs(r.z - z) < 1.0) {
            r.residual = std::abs(hankel(1, b, r.z, 1.0));
            r.winding = 1;
            nearest = r;
        }
    } catch (const Error&) {
    }
    throw ResolventPoleError("resolvent evaluated at a pole", nearest);
}

void check_pole(double b, cplx z) {
    const double s1 = std::abs(scaled_h1(b, z));
    const double s2 = std::abs(scaled_h2(b, z));
    if (!(s1 > kPoleThreshold * (s1 + s2))) throw_pole(b, z);
}

}  // namespace

GeometryConstants geometry_constants(double a, int n, int p) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InputError("warp exponent must be positive");
    if (n < 2) throw InputError("dimension must be at least 2");
    if (p < 0 || p > n) throw InputError("form degree out of range");
    const double gamma = a * double(n - 2 * p - 1);
    return {gamma, 0.5 * (gamma + 1.0)};
}

void CuspGeometry::validate() const {
    geometry_constants(a, n, p);
    if (m_p < 0 || m_pm1 < 0) throw InputError("cohomology dimensions must be nonnegative");
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) throw InputError("cross-section eigenvalues must be positive");
        if (i > 0 && mu[i] < mu[i - 1]) throw InputError("cross-section eigenvalues must be ascending");
    }
}

ResolventSector alpha_sector(const CuspGeometry& g) {
    g.validate();
    return {g.b(g.p), g.b(g.p)};
}

ResolventSector beta_sector(const CuspGeometry& g) {
    g.validate();
    if (g.p < 1) throw InputError("the dx sector needs form degree >= 1");
    const double b = g.b(g.p - 1);
    return {b - 1.0, b};
}

cplx resolvent_kernel(double b, cplx z, double x, double t) {
    check_finite(z, "non-finite spectral parameter");
    if (!(x >= 1.0) || !(t >= 1.0) || !std::isfinite(x) || !std::isfinite(t))
        throw DomainError("kernel arguments must lie in [1, inf)");
    check_pole(b, z);
    const double lo = std::min(x, t), hi = std::max(x, t);
    const cplx h1 = hankel(1, b, z, 1.0);
    return kPi * std::sqrt(x * t) / (2.0 * h1) * cylinder_g_cover(b, z, lo) * hankel(1, b, z, hi);
}

RadialFunction apply_cusp_resolvent(const RadialFunction& f, double order, cplx z, double weight) {
    check_finite(z, "non-finite spectral parameter");
    const std::size_t n = f.x.size();
    if (f.values.size() != n) throw InputError("grid and values differ in length");
    if (n < 4) throw InputError("need at least four grid points");
    if (!(f.x.front() >= 1.0)) throw DomainError("grid must lie in [1, inf)");
    check_pole(order, z);

    RadialFunction out;
    out.x = f.x;
    out.weights = f.weights;
    out.truncated = f.truncated;
    out.values.assign(n, 0.0);
    if (std::all_of(f.values.begin(), f.values.end(), [](cplx v) { return v == 0.0; })) return out;

    std::vector<cplx> g(n), h(n), gf(n), hf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = f.x[i];
        g[i] = cylinder_g_cover(order, z, x);
        h[i] = hankel(1, order, z, x);
        const cplx v = std::pow(x, 1.0 - weight) * f.values[i];
        gf[i] = g[i] * v;
        hf[i] = h[i] * v;
    }
    const auto gp = interval_integrals(f.x, gf);
    const auto hp = interval_integrals(f.x, hf);
    // A_i = int_{x_0}^{x_i} G t^{1-c} f,  B_i = int_{x_i}^{end} H t^{1-c} f, summed from the far end
    std::vector<cplx> A(n, 0.0), B(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) A[i + 1] = A[i] + gp[i];
    for (std::size_t i = n - 1; i-- > 0;) B[i] = B[i + 1] + hp[i];
    const cplx pref = -kPi / (2.0 * hankel(1, order, z, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = pref * std::pow(f.x[i], weight) * (h[i] * A[i] + g[i] * B[i]);
        if (!std::isfinite(std::abs(out.values[i]))) throw RegimeError("resolvent overflow on this grid");
    }
    return out;
}

RadialFunction apply_cusp_resolvent_spectral(const RadialFunction& f, double order, cplx z, double weight,
                                             const QuadratureGrid& lambda_grid) {
    check_finite(z, "non-finite spectral parameter");
    if (!(z.imag() > 0.0 && z.imag() < 2.0 * kPi))
        throw RegimeError("the spectral representation holds on the physical sheet only");
    RadialFunction g = f;
    for (std::size_t i = 0; i < g.x.size(); ++i) g.values[i] *= std::pow(g.x[i], -weight);
    SpectralFunction s = weber_forward(g, order, lambda_grid);
    const cplx u = std::exp(z);
    for (std::size_t k = 0; k < s.lambda.size(); ++k) s.values[k] /= s.lambda[k] * s.lambda[k] - u;
    QuadratureGrid xg{f.x, f.weights};
    RadialFunction out = weber_inverse(s, order, xg);
    for (std::size_t i = 0; i < out.x.size(); ++i) out.values[i] *= std::pow(out.x[i], weight);
    out.truncated = f.truncated;
    return out;
}

RadialFunction apply_conjugated_operator(const RadialFunction& y, double order, double weight, cplx u) {
    const auto d1 = differentiate(y.x, y.values, 1);
    const auto d2 = differentiate(y.x, y.values, 2);
    RadialFunction out = y;
    out.warning.clear();
    for (std::size_t i = 0; i < y.x.size(); ++i) {
        const double x = y.x[i];
        out.values[i] = -d2[i] + (2.0 * weight - 1.0) / x * d1[i] +
                        (order * order - weight * weight) / (x * x) * y.values[i] - u * y.values[i];
    }
    return out;
}

PoleSearch find_resolvent_poles(double b, const Rect& region, const ZeroSearchOptions& opt) {
    if (!std::isfinite(b)) throw InputError("non-finite order");
    const auto res = find_zeros([b](cplx z) { return scaled_h1(b, z); },
                                [b](cplx z) { return scaled_h1_deriv(b, z); }, region, opt);
    PoleSearch out;
    out.winding = res.winding;
    for (auto p : res.zeros) {
        if (!region.contains(p.z)) continue;
        p.residual = std::abs(hankel(1, b, p.z, 1.0));
        out.poles.push_back(p);
    }
    int count = 0;
    for (const auto& p : out.poles) count += p.multiplicity;
    if (!res.complete || count != out.winding)
        throw IncompletePoleSearchError("pole count differs from the winding number", out);
    return out;
}

AbsorptionReport limiting_absorption_check(double b, double u0, double x, double t,
                                           const std::vector<double>& eps_ladder) {
    if (!(u0 > 0.0)) throw DomainError("spectral point must be positive");
    if (eps_ladder.size() < 2) throw InputError("need at least two ladder steps");
    for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
        if (!(eps_ladder[i] > 0.0)) throw InputError("ladder steps must be positive");
        if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1])) throw InputError("ladder must be decreasing");
    }
    AbsorptionReport rep;
    rep.reflection_defect = 0.0;
    const double norm = -1.0 / std::sqrt(x * t);
    for (double eps : eps_ladder) {
        const double mod = std::hypot(u0, eps);
        const double th = std::atan2(eps, u0);
        const cplx zp(std::log(mod), th), zm(std::log(mod), 2.0 * kPi - th);
        const cplx rp = resolvent_kernel(b, zp, x, t), rm = resolvent_kernel(b, zm, x, t);
        rep.reflection_defect = std::max(rep.reflection_defect, std::abs(rm - std::conj(rp)));
        rep.steps.push_back({eps, norm * (rp - rm) / cplx(0, 2.0 * kPi)});
    }
    // Neville extrapolation to eps = 0 through all ladder points
    std::vector<cplx> p;
    for (const auto& s : rep.steps) p.push_back(s.jump);
    const std::size_t m = p.size();
    for (std::size_t k = 1; k < m; ++k)
        for (std::size_t i = 0; i + k < m; ++i) {
            const double ei = rep.steps[i].eps, ek = rep.steps[i + k].eps;
            p[i] = (ei * p[i + 1] - ek * p[i]) / (ei - ek);
        }
    rep.limit = p[0];
    const double l = std::sqrt(u0);
    const RealJY jy = bessel_jy(b, l);
    rep.density = cylinder_g(b, l, x) * cylinder_g(b, l, t) / (2.0 * (jy.j * jy.j + jy.y * jy.y));
    rep.deviation = std::abs(rep.limit - rep.density);
    return rep;
}

double weighted_log_norm(const RadialFunction& f, WeightSign sign, double gamma) {
    const std::size_t n = f.x.size();
    if (f.values.size() != n || f.weights.size() != n) throw InputError("grid, values and weights differ in length");
    const double s = sign == WeightSign::plus ? -1.0 : 1.0;
    std::vector<double> terms;
    terms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(f.values[i]);
        if (!std::isfinite(a)) throw InputError("non-finite sample");
        if (a == 0.0 || f.weights[i] <= 0.0) continue;
        const double x = f.x[i];
        terms.push_back(2.0 * std::log(a) + s * x * x - gamma * std::log(x) + std::log(f.weights[i]));
    }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    const double top = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double v : terms) acc += std::exp(v - top);
    return 0.5 * (top + std::log(acc));
}

double weighted_norm(const RadialFunction& f, WeightSign sign, double gamma) {
    const double l = weighted_log_norm(f, sign, gamma);
    const double v = std::exp(l);
    if (!std::isfinite(v)) throw RegimeError("weighted norm overflows; use the log form");
    return v;
}

}  // namespace gcusp
