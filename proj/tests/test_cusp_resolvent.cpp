#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gcusp/cusp_resolvent.hpp"
#include "gcusp/numerics.hpp"
#include "gcusp/special_fn.hpp"
#include "oracles/cusp_resolvent_oracle.hpp"

using namespace gcusp;

namespace {

constexpr double kPi = std::numbers::pi;

double c3_bump(double x, double c, double r) {
    const double s = (x - c) / r;
    return std::abs(s) < 1.0 ? std::pow(1.0 - s * s, 4) : 0.0;
}

RadialFunction uniform_bump(double h, double x_max) {
    const auto n = static_cast<std::size_t>(std::lround((x_max - 1.0) / h)) + 1;
    RadialFunction f;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 1.0 + h * double(i);
        f.x.push_back(x);
        f.values.push_back(c3_bump(x, 3.0, 1.0) * cplx(1.0, 0.5));
        f.weights.push_back(h);
    }
    return f;
}

double max_diff(const RadialFunction& a, const RadialFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

double max_abs(const RadialFunction& a) {
    double m = 0.0;
    for (auto v : a.values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("geometry constants") {
    auto g = geometry_constants(1.0, 2, 0);
    CHECK(g.gamma == 1.0);
    CHECK(g.b == 1.0);
    for (double a : {0.3, 1.0, 2.7}) {
        for (int n : {3, 5, 7}) {
            g = geometry_constants(a, n, (n - 1) / 2);
            CHECK(g.gamma == 0.0);
            CHECK(g.b == 0.5);
        }
    }
    CuspGeometry c{0.7, 5, 1, {1.0, 2.0}, 0, 1};
    CHECK(c.b(1) + c.b(5 - 1 - 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(geometry_constants(1.0, 3, 4), InputError);
    CHECK_THROWS_AS(geometry_constants(1.0, 3, -1), InputError);
    CHECK_THROWS_AS(geometry_constants(0.0, 3, 1), InputError);
    CuspGeometry bad = c;
    bad.mu = {2.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad.mu = {0.0};
    CHECK_THROWS_AS(bad.validate(), InputError);

    const auto al = alpha_sector(c), be = beta_sector(c);
    CHECK(al.order == c.b(1));
    CHECK(al.weight == c.b(1));
    CHECK(be.order == doctest::Approx(c.b(0) - 1.0));
    CHECK(be.weight == c.b(0));
    CuspGeometry p0{1.0, 3, 0, {}, 1, 0};
    CHECK_THROWS_AS(beta_sector(p0), InputError);
}

TEST_CASE("kernel matches reference values") {
    for (const auto& row : oracle::kKernel) {
        const cplx v = resolvent_kernel(row.b, row.z, row.x, row.t);
        CHECK(std::abs(v - row.r) <= 1e-10 * std::abs(row.r));
    }
}

TEST_CASE("kernel symmetry and Dirichlet condition") {
    const cplx z(0.3, 1.2);
    const cplx a = resolvent_kernel(1.0, z, 2.0, 5.0), b = resolvent_kernel(1.0, z, 5.0, 2.0);
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    for (double t : {1.5, 3.0, 10.0}) CHECK(std::abs(resolvent_kernel(1.0, z, 1.0, t)) < 1e-14);
    CHECK_THROWS_AS(resolvent_kernel(1.0, z, 0.5, 2.0), DomainError);
}

TEST_CASE("kernel derivative jump equals one") {
    // d/dx r jumps by +1 across x = t for every z away from poles
    const double h = 1e-3;
    for (auto [b, z, t] : {std::tuple{1.0, cplx(0.5, 0.9), 2.5}, std::tuple{0.75, cplx(0.2, -1.0), 1.8},
                           std::tuple{2.5, cplx(-0.4, 3.5), 3.0}}) {
        double right[5], left[5];
        for (int k = 0; k < 5; ++k) {
            right[k] = t + h * k;
            left[k] = t - h * k;
        }
        const auto wr = fd_weights(t, right, 5, 1);
        const auto wl = fd_weights(t, left, 5, 1);
        cplx dr = 0.0, dl = 0.0;
        for (int k = 0; k < 5; ++k) {
            dr += wr[k] * resolvent_kernel(b, z, right[k], t);
            dl += wl[k] * resolvent_kernel(b, z, left[k], t);
        }
        CHECK(std::abs(dr - dl - 1.0) < 1e-8);
    }
}

TEST_CASE("meromorphy: Cauchy-Riemann residual") {
    const double h = 1e-4;
    for (auto [b, z] : {std::pair{1.0, cplx(0.5, 0.9)}, std::pair{1.0, cplx(0.2, -2.0)},
                        std::pair{2.5, cplx(1.3, -3.0)}, std::pair{0.0, cplx(-1.0, -7.0)}}) {
        auto r = [b = b](cplx s) { return resolvent_kernel(b, s, 1.4, 2.2); };
        const cplx dbar = 0.5 * ((r(z + h) - r(z - h)) / (2 * h) + cplx(0, 1) * (r(z + cplx(0, h)) - r(z - cplx(0, h))) / (2 * h));
        const cplx dz = (r(z + h) - r(z - h)) / (2 * h);
        CHECK(std::abs(dbar) <= 1e-7 * std::max(1.0, std::abs(dz)));
    }
}

TEST_CASE("kernel factorizes below the diagonal") {
    for (auto [b, z] : {std::pair{1.0, cplx(0.5, 0.9)}, std::pair{0.75, cplx(0.2, -1.0)}}) {
        const double xs[] = {1.1, 1.3, 1.5, 1.7};
        const double ts[] = {2.0, 2.5, 3.0, 3.5, 4.0};
        Eigen::MatrixXcd m(4, 5);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 5; ++j) m(i, j) = resolvent_kernel(b, z, xs[i], ts[j]);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        const auto s = svd.singularValues();
        CHECK(s(1) <= 1e-10 * s(0));
    }
}

TEST_CASE("simple poles") {
    for (const auto& row : oracle::kPoles) {
        const cplx z0 = find_resolvent_poles(row.b, Rect{row.z.real() - 0.05, row.z.real() + 0.05,
                                                         row.z.imag() - 0.05, row.z.imag() + 0.05})
                            .poles.at(0)
                            .z;
        const double d = 1e-4;
        std::vector<cplx> limits;
        for (double ang : {0.0, 0.25 * kPi, 0.5 * kPi, 0.75 * kPi}) {
            const cplx e = std::polar(d, ang);
            // the average over +e and -e cancels the first-order term
            const cplx l = 0.5 * (e * resolvent_kernel(row.b, z0 + e, 1.3, 2.1) -
                                  e * resolvent_kernel(row.b, z0 - e, 1.3, 2.1));
            limits.push_back(l);
        }
        for (const auto& l : limits) CHECK(std::abs(l - limits[0]) <= 1e-6 * std::abs(limits[0]));
        CHECK(std::abs(limits[0]) > 0.0);
    }
}

TEST_CASE("evaluation at a pole reports the pole") {
    const cplx z0(std::log(3.0), -2.0 * kPi / 3.0);
    try {
        resolvent_kernel(2.5, z0, 1.5, 2.0);
        FAIL("expected a pole error");
    } catch (const ResolventPoleError& e) {
        REQUIRE(e.nearest.has_value());
        CHECK(std::abs(e.nearest->z - z0) < 1e-12);
        CHECK(e.nearest->residual <= 1e-10);
    }
    RadialFunction f = uniform_bump(0.05, 5.0);
    CHECK_THROWS_AS(apply_cusp_resolvent(f, 2.5, z0), PoleError);
}

TEST_CASE("resolvent of zero is zero") {
    RadialFunction f = uniform_bump(0.05, 5.0);
    std::fill(f.values.begin(), f.values.end(), 0.0);
    const auto y = apply_cusp_resolvent(f, 1.0, cplx(0.5, 0.9));
    CHECK(max_abs(y) == 0.0);
}

TEST_CASE("differential residual converges") {
    for (auto [order, weight, z] : {std::tuple{1.0, 1.0, cplx(0.5, 0.9)}, std::tuple{0.3, 1.3, cplx(0.2, -1.5)},
                                    std::tuple{2.5, 2.5, cplx(-0.3, 4.0)}}) {
        std::vector<double> err;
        for (double h : {0.02, 0.01, 0.005}) {
            const auto f = uniform_bump(h, 7.0);
            const auto y = apply_cusp_resolvent(f, order, z, weight);
            const auto r = apply_conjugated_operator(y, order, weight, std::exp(z));
            err.push_back(max_diff(r, f) / max_abs(f));
        }
        const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
        MESSAGE("order ", order, " residuals ", err[0], " ", err[1], " ", err[2]);
        CHECK(p1 >= 1.8);
        CHECK(p2 >= 1.8);
        CHECK(err[2] < 1e-4);
    }
}

TEST_CASE("kernel form agrees with the spectral representation") {
    const QuadratureGrid xg = radial_grid(1.0, 6.0, 25.0);
    RadialFunction f = sample_radial(xg, [](double x) { return c3_bump(x, 3.0, 1.5) * cplx(1.0, -0.3); });
    const QuadratureGrid lg = spectral_grid(0.0, 100.0, 6.0);
    for (auto [order, weight, z] : {std::tuple{1.0, 1.0, cplx(0.5, 0.9)}, std::tuple{0.3, 1.3, cplx(0.2, 2.0)},
                                    std::tuple{0.0, 0.0, cplx(1.0, 5.5)}, std::tuple{2.5, 2.5, cplx(-1.0, 3.1)}}) {
        const auto a = apply_cusp_resolvent(f, order, z, weight);
        const auto b = apply_cusp_resolvent_spectral(f, order, z, weight, lg);
        const double rel = max_diff(a, b) / max_abs(b);
        MESSAGE("order ", order, " z ", z, " relative difference ", rel);
        CHECK(rel <= 1e-5);
    }
    CHECK_THROWS_AS(apply_cusp_resolvent_spectral(f, 1.0, cplx(0.5, -0.9), 1.0, lg), RegimeError);
}

TEST_CASE("limiting absorption") {
    const std::vector<double> ladder{1e-2, 1e-3, 1e-4};
    for (const auto& row : oracle::kDensity) {
        const auto rep = limiting_absorption_check(row.b, row.u0, row.x, row.t, ladder);
        CHECK(std::abs(rep.density - row.density) < 1e-12);
        CHECK(rep.deviation <= 1e-6);
        CHECK(rep.reflection_defect <= 1e-10);
        // the jump is purely imaginary times -1/(2 pi i): real for real data
        for (const auto& s : rep.steps) CHECK(std::abs(s.jump.imag()) <= 1e-12);
    }
    const auto at1 = limiting_absorption_check(1.0, 2.0, 1.0, 2.5, ladder);
    CHECK(std::abs(at1.limit) < 1e-12);
    CHECK_THROWS_AS(limiting_absorption_check(1.0, 2.0, 1.5, 2.5, {1e-3, 1e-2}), InputError);
    CHECK_THROWS_AS(limiting_absorption_check(1.0, -2.0, 1.5, 2.5, ladder), DomainError);
}

TEST_CASE("physical sheet is pole free") {
    for (double b : {0.0, 1.0, 2.5}) {
        const auto res = find_resolvent_poles(b, Rect{-2.0, 6.0, 0.1, 2.0 * kPi - 0.1});
        CHECK(res.poles.empty());
        CHECK(res.winding == 0);
    }
}

TEST_CASE("half-integer order one half has no poles") {
    for (const auto& q : oracle::kPoleRects) {
        const auto res = find_resolvent_poles(0.5, Rect{q.re0, q.re1, q.im0, q.im1});
        CHECK(res.poles.empty());
    }
}

TEST_CASE("pole atlas") {
    for (double b : oracle::kPoleOrders) {
        for (int k = 0; k < 2; ++k) {
            const auto& q = oracle::kPoleRects[k];
            const auto res = find_resolvent_poles(b, Rect{q.re0, q.re1, q.im0, q.im1});
            std::vector<cplx> expect;
            for (const auto& row : oracle::kPoles)
                if (row.b == b && row.rect == k) expect.push_back(row.z);
            REQUIRE(res.poles.size() == expect.size());
            CHECK(res.winding == int(expect.size()));
            for (std::size_t i = 0; i < expect.size(); ++i) {
                CHECK(std::abs(res.poles[i].z - expect[i]) <= 1e-8);
                CHECK(res.poles[i].residual <= 1e-10);
                CHECK(res.poles[i].multiplicity == 1);
                CHECK(res.poles[i].winding >= 1);
                const double im_w = std::exp(0.5 * res.poles[i].z.real()) * std::sin(0.5 * res.poles[i].z.imag());
                // below the real axis on the first lower sheet; not beyond it
                if (k == 0) CHECK(im_w < 0.0);
            }
        }
    }
}

TEST_CASE("deeper sheets carry poles above the real axis") {
    const auto res = find_resolvent_poles(1.7, Rect{-2.0, 4.0, -12.3, -6.35});
    REQUIRE(res.poles.size() == 1);
    const cplx w = std::exp(0.5 * res.poles[0].z);
    CHECK(w.imag() > 0.0);
}

TEST_CASE("weighted norms") {
    RadialFunction f = sample_radial(radial_grid(1.0, 40.0, 5.0), [](double x) { return cplx(std::sin(x)); });
    RadialFunction zero = f;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    CHECK(weighted_norm(zero, WeightSign::plus, 1.0) == 0.0);
    CHECK(weighted_norm(zero, WeightSign::minus, 1.0) == 0.0);

    // e^{-x^2/2} e^{+x^2/2} f has the unweighted norm
    RadialFunction g = f;
    for (std::size_t i = 0; i < g.x.size(); ++i) g.values[i] *= std::exp(-0.25 * g.x[i] * g.x[i]);
    RadialFunction gm = g;
    for (std::size_t i = 0; i < gm.x.size(); ++i) gm.values[i] *= std::exp(-0.5 * gm.x[i] * gm.x[i]);
    double plain = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) plain += g.weights[i] * std::norm(g.values[i]) * std::pow(g.x[i], -0.4);
    CHECK(weighted_norm(gm, WeightSign::minus, 0.4) == doctest::Approx(std::sqrt(plain)).epsilon(1e-12));

    // the minus weight overflows in linear space at x = 40 but not in log space
    const double l = weighted_log_norm(f, WeightSign::minus, 1.0);
    CHECK(std::isfinite(l));
    CHECK(l > 700.0);
    CHECK_THROWS_AS(weighted_norm(f, WeightSign::minus, 1.0), RegimeError);
}

TEST_CASE("resolvent bounded from H+ to H- across the real axis") {
    const QuadratureGrid xg = radial_grid(1.0, 8.0, 25.0);
    const RadialFunction f = sample_radial(xg, [](double x) { return c3_bump(x, 3.0, 1.5); });
    const double gamma = 1.0;
    const double fn = weighted_log_norm(f, WeightSign::plus, gamma);
    std::vector<double> k;
    for (int i = 0; i <= 20; ++i) {
        const cplx z(0.5, 1.0 - 0.1 * i);  // crosses Im z = 0 into the next sheet
        const auto y = apply_cusp_resolvent(f, 1.0, z);
        k.push_back(weighted_log_norm(y, WeightSign::minus, gamma) - fn);
    }
    for (std::size_t i = 0; i < k.size(); ++i) CHECK(std::isfinite(k[i]));
    // log K varies smoothly along the line
    for (std::size_t i = 1; i + 1 < k.size(); ++i) CHECK(std::abs(k[i + 1] - 2.0 * k[i] + k[i - 1]) < 0.1);
}
