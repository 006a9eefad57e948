#include "gcusp/weber.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gcusp/errors.hpp"
#include "gcusp/special_fn.hpp"

namespace gcusp {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEdgeTolerance = 1e-10;
constexpr double kSupportTolerance = 1e-6;

void check_radial(const RadialFunction& f) {
    if (f.x.empty()) throw InputError("empty radial grid");
    if (f.values.size() != f.x.size() || f.weights.size() != f.x.size())
        throw InputError("radial grid, values and weights differ in length");
    if (f.x.front() < 1.0 - 1e-12) throw InputError("radial grid must start at or after x = 1");
    for (std::size_t i = 1; i < f.x.size(); ++i)
        if (!(f.x[i] > f.x[i - 1])) throw InputError("radial grid must be strictly increasing");
    for (const cplx& v : f.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InputError("non-finite radial value");
}

void check_spectral(const SpectralFunction& g) {
    if (g.lambda.empty()) throw InputError("empty spectral grid");
    if (g.values.size() != g.lambda.size() || g.weights.size() != g.lambda.size())
        throw InputError("spectral grid, values and weights differ in length");
    if (g.lambda.front() < 0.0) throw InputError("spectral grid must be non-negative");
    for (std::size_t i = 1; i < g.lambda.size(); ++i)
        if (!(g.lambda[i] > g.lambda[i - 1])) throw InputError("spectral grid must be strictly increasing");
}

// G_b(lambda, x) as lambda -> 0.
double g_at_zero(double b, double x) {
    const double nu = std::fabs(b);
    if (nu == 0.0) return -2.0 / kPi * std::log(x);
    return -(std::pow(x, nu) - std::pow(x, -nu)) / (kPi * nu);
}

}  // namespace

RadialFunction sample_radial(const QuadratureGrid& grid, const std::function<cplx(double)>& f) {
    RadialFunction r;
    r.x = grid.nodes;
    r.weights = grid.weights;
    r.values.resize(grid.nodes.size());
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) r.values[i] = f(grid.nodes[i]);
    return r;
}

SpectralFunction sample_spectral(const QuadratureGrid& grid, const std::function<cplx(double)>& g) {
    SpectralFunction s;
    s.lambda = grid.nodes;
    s.weights = grid.weights;
    s.values.resize(grid.nodes.size());
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) s.values[i] = g(grid.nodes[i]);
    return s;
}

QuadratureGrid radial_grid(double x_min, double x_max, double lambda_max) {
    if (!(x_max > x_min) || x_min < 1.0) throw InputError("radial grid needs 1 <= x_min < x_max");
    const double width = std::min(1.0, 2.0 * kPi / std::max(lambda_max, 1e-12));
    return gauss_legendre_uniform(x_min, x_max, width);
}

QuadratureGrid spectral_grid(double lambda_min, double lambda_max, double x_max) {
    if (!(lambda_max > lambda_min) || lambda_min < 0.0) throw InputError("bad spectral interval");
    std::vector<double> breaks{lambda_min};
    if (lambda_min > 0.0) {
        double l = lambda_min;
        while (l * 4.0 < std::min(1.0, lambda_max)) {
            l *= 4.0;
            breaks.push_back(l);
        }
    }
    const double start = breaks.back();
    const double width = std::min(1.0, 2.0 * kPi / std::max(x_max, 1.0));
    const auto n = static_cast<std::size_t>(std::ceil((lambda_max - start) / width));
    for (std::size_t i = 1; i <= n; ++i) breaks.push_back(start + (lambda_max - start) * double(i) / double(n));
    breaks.back() = lambda_max;
    return gauss_legendre_panels(breaks);
}

double spectral_density(double b, double lambda) {
    if (!std::isfinite(lambda)) throw InputError("non-finite spectral parameter");
    if (lambda <= 0.0) throw DomainError("spectral density needs lambda > 0");
    const RealJY r = bessel_jy(b, lambda);
    return lambda / (r.j * r.j + r.y * r.y);
}

SpectralFunction weber_forward(const RadialFunction& f, double b, const QuadratureGrid& lambda_grid) {
    check_radial(f);
    if (lambda_grid.nodes.empty()) throw InputError("empty spectral grid");
    if (!f.truncated) {
        double peak = 0.0;
        for (const cplx& v : f.values) peak = std::max(peak, std::abs(v));
        if (std::abs(f.values.front()) > kSupportTolerance * peak ||
            std::abs(f.values.back()) > kSupportTolerance * peak)
            throw InputError("function is not compactly supported inside its grid");
    }
    const double nu = std::fabs(b);
    SpectralFunction out;
    out.lambda = lambda_grid.nodes;
    out.weights = lambda_grid.weights;
    out.values.assign(out.lambda.size(), 0.0);
    std::vector<cplx> fx(f.x.size());
    for (std::size_t j = 0; j < f.x.size(); ++j) fx[j] = f.values[j] * f.x[j] * f.weights[j];
    parallel_for(out.lambda.size(), [&](std::size_t k) {
        const double lam = out.lambda[k];
        cplx acc = 0.0;
        if (lam == 0.0) {
            for (std::size_t j = 0; j < f.x.size(); ++j) acc += fx[j] * g_at_zero(nu, f.x[j]);
        } else {
            const RealJY p = bessel_jy(nu, lam);
            for (std::size_t j = 0; j < f.x.size(); ++j) {
                if (fx[j] == cplx(0.0)) continue;
                const RealJY q = bessel_jy(nu, lam * f.x[j]);
                acc += fx[j] * (p.y * q.j - p.j * q.y);
            }
        }
        out.values[k] = acc;
    });
    return out;
}

RadialFunction weber_inverse(const SpectralFunction& g, double b, const QuadratureGrid& x_grid) {
    check_spectral(g);
    if (x_grid.nodes.empty()) throw InputError("empty radial grid");
    const double nu = std::fabs(b);
    const std::size_t nl = g.lambda.size();
    std::vector<cplx> gw(nl, 0.0);
    std::vector<RealJY> p(nl, RealJY{0.0, 0.0});
    for (std::size_t k = 0; k < nl; ++k) {
        const double lam = g.lambda[k];
        if (lam == 0.0 || g.values[k] == cplx(0.0)) continue;
        p[k] = bessel_jy(nu, lam);
        gw[k] = g.values[k] * g.weights[k] * lam / (p[k].j * p[k].j + p[k].y * p[k].y);
    }
    RadialFunction out;
    out.x = x_grid.nodes;
    out.weights = x_grid.weights;
    out.values.assign(out.x.size(), 0.0);
    out.truncated = true;
    double peak = 0.0;
    for (const cplx& v : g.values) peak = std::max(peak, std::abs(v));
    if (g.lambda.front() < 1e-3 && std::abs(g.values.front()) > kEdgeTolerance * peak)
        out.warning = "spectral support touches lambda = 0; quadrature order reduced there";
    parallel_for(out.x.size(), [&](std::size_t i) {
        const double x = out.x[i];
        cplx acc = 0.0;
        for (std::size_t k = 0; k < nl; ++k) {
            if (gw[k] == cplx(0.0)) continue;
            const RealJY q = bessel_jy(nu, g.lambda[k] * x);
            acc += gw[k] * (p[k].y * q.j - p[k].j * q.y);
        }
        out.values[i] = acc;
    });
    return out;
}

RadialFunction apply_bessel_operator(const RadialFunction& f, double b) {
    check_radial(f);
    if (f.x.size() < 5) throw AccuracyError("need at least five samples");
    std::size_t changes = 0;
    for (std::size_t i = 1; i < f.values.size(); ++i) {
        if ((f.values[i].real() > 0) != (f.values[i - 1].real() > 0)) ++changes;
        if ((f.values[i].imag() > 0) != (f.values[i - 1].imag() > 0)) ++changes;
    }
    if (changes > 0 && 2.0 * double(f.x.size()) / double(changes) < 5.0)
        throw AccuracyError("grid has fewer than five points per oscillation");
    const auto d1 = differentiate(f.x, f.values, 1);
    const auto d2 = differentiate(f.x, f.values, 2);
    RadialFunction out = f;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        const double x = f.x[i];
        out.values[i] = -d2[i] - d1[i] / x + (b * b / (x * x)) * f.values[i];
    }
    return out;
}

RadialFunction apply_bessel_operator_spectral(const RadialFunction& f, double b,
                                              const QuadratureGrid& lambda_grid) {
    SpectralFunction w = weber_forward(f, b, lambda_grid);
    for (std::size_t k = 0; k < w.lambda.size(); ++k) w.values[k] *= w.lambda[k] * w.lambda[k];
    RadialFunction out = weber_inverse(w, b, QuadratureGrid{f.x, f.weights});
    out.truncated = f.truncated;
    return out;
}

cplx radial_inner(const RadialFunction& f, const RadialFunction& g) {
    check_radial(f);
    check_radial(g);
    if (f.x != g.x) throw InputError("inner product needs a common grid");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < f.x.size(); ++i) acc += f.weights[i] * f.x[i] * f.values[i] * std::conj(g.values[i]);
    return acc;
}

cplx spectral_inner(const SpectralFunction& f, const SpectralFunction& g, double b) {
    check_spectral(f);
    check_spectral(g);
    if (f.lambda != g.lambda) throw InputError("inner product needs a common grid");
    cplx acc = 0.0;
    for (std::size_t k = 0; k < f.lambda.size(); ++k) {
        if (f.lambda[k] == 0.0) continue;
        acc += f.weights[k] * spectral_density(b, f.lambda[k]) * f.values[k] * std::conj(g.values[k]);
    }
    return acc;
}

}  // namespace gcusp
