#include "gcusp/special_fn.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "extended_math.hpp"
#include "gcusp/errors.hpp"

namespace gcusp {
namespace {

using detail::Cx;
using detail::quad;
using detail::RealConstants;
using detail::r_abs;
using detail::r_cos;
using detail::r_sin;
using detail::r_tgamma;
using detail::s_abs;
using detail::s_exp;
using detail::s_log;

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesRadius = 12.0;
constexpr double kQuadImag = 5.0;
constexpr double kQuadNearInteger = 1e-3;
constexpr double kIntegerSnap = 1e-14;
constexpr double kDegradedRel = 1e-10;
const cplx kI(0.0, 1.0);

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InputError(std::string("non-finite ") + what);
}

void require_finite(cplx v, const char* what) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw InputError(std::string("non-finite ") + what);
}

struct SinCosPi {
    double s;
    double c;
};

// sin(pi x), cos(pi x) with exact values at multiples of 1/2.
SinCosPi sincospi(double x) {
    double r = std::fmod(x, 2.0);
    if (r < 0) r += 2.0;
    if (r == 0.0) return {0.0, 1.0};
    if (r == 0.5) return {1.0, 0.0};
    if (r == 1.0) return {0.0, -1.0};
    if (r == 1.5) return {-1.0, 0.0};
    return {std::sin(kPi * r), std::cos(kPi * r)};
}

// Order snapped to the nearest integer when closer than kIntegerSnap.
double snap_order(double nu) {
    const double n = std::round(nu);
    return std::fabs(nu - n) < kIntegerSnap ? n : nu;
}

bool is_integer(double nu) { return nu == std::round(nu); }

// ---------------------------------------------------------------------------
// Ascending series, templated on the working real type R and scalar S.

template <class R, class S>
struct SeriesValue {
    S value;
    R magnitude;  // largest intermediate term, for error estimates
};

template <class R, class S>
SeriesValue<R, S> j_series(R nu, S half) {
    const R eps = RealConstants<R>::epsilon;
    const S q = -(half * half);
    const R h2 = s_abs(half) * s_abs(half);
    S term = S(R(1));
    S sum = term;
    R big = R(1);
    for (int k = 1; k < 4000; ++k) {
        const R kk = R(k);
        term = term * q / (kk * (kk + nu));
        sum += term;
        const R t = s_abs(term);
        if (t > big) big = t;
        if (kk * r_abs(kk + nu) > h2 && (t <= eps * s_abs(sum) || t <= eps * eps * big)) break;
    }
    const S lead = s_exp(s_log(half) * nu) / r_tgamma(nu + R(1));
    return {lead * sum, big * s_abs(lead)};
}

template <class R, class S>
struct SeriesJY {
    S j;
    S y;
    R magnitude;
};

template <class R, class S>
SeriesJY<R, S> jy_integer_series(int n, S half) {
    using C = RealConstants<R>;
    const R eps = C::epsilon;
    const R pi = C::pi;
    const R g2 = R(2) * C::euler_gamma;
    const S s = half * half;
    const S q = -s;
    const R h2 = s_abs(half) * s_abs(half);

    S hn = S(R(1));
    R fact_n = R(1);
    R harm_nk = R(0);
    for (int i = 1; i <= n; ++i) {
        hn = hn * half;
        fact_n *= R(i);
        harm_nk += R(1) / R(i);
    }
    R harm_k = R(0);
    S u = S(R(1) / fact_n);
    S jsum = u;
    S psum = u * (harm_k + harm_nk - g2);
    R big = s_abs(u) * (R(1) + r_abs(harm_nk - g2));
    for (int k = 1; k < 4000; ++k) {
        const R kk = R(k);
        u = u * q / (kk * R(n + k));
        harm_k += R(1) / kk;
        harm_nk += R(1) / R(n + k);
        jsum += u;
        const S pt = u * (harm_k + harm_nk - g2);
        psum += pt;
        const R t = s_abs(u) * (R(1) + r_abs(harm_k + harm_nk - g2));
        if (t > big) big = t;
        if (kk * R(n + k) > h2 && (t <= eps * (s_abs(jsum) + s_abs(psum)) || t <= eps * eps * big))
            break;
    }
    const S j = hn * jsum;
    S first = S(R(0));
    R first_mag = R(0);
    if (n > 0) {
        R t = R(1);
        for (int i = 2; i < n; ++i) t *= R(i);
        S ft = S(t);
        S fsum = ft;
        R fbig = t;
        for (int k = 1; k < n; ++k) {
            ft = ft * s / (R(k) * R(n - k));
            fsum += ft;
            if (s_abs(ft) > fbig) fbig = s_abs(ft);
        }
        first = -(fsum / hn) / pi;
        first_mag = fbig / s_abs(hn) / pi;
    }
    const S lg = s_log(half);
    const S y = first + (R(2) / pi) * (lg * j) - (hn * psum) / pi;
    const R jmag = big * s_abs(hn);
    R mag = first_mag;
    if (jmag * (R(1) + s_abs(lg)) > mag) mag = jmag * (R(1) + s_abs(lg));
    return {j, y, mag};
}

template <class R, class S>
SeriesJY<R, S> jy_noninteger_series(R nu, S half) {
    const R pi = RealConstants<R>::pi;
    const auto jp = j_series<R, S>(nu, half);
    const auto jm = j_series<R, S>(-nu, half);
    const R sn = r_sin(pi * nu);
    const R cn = r_cos(pi * nu);
    const S y = (jp.value * cn - jm.value) / sn;
    R mag = (jp.magnitude + jm.magnitude) / r_abs(sn);
    return {jp.value, y, mag};
}

template <class R, class S>
SeriesJY<R, S> jy_series(double nu, S half) {
    if (is_integer(nu)) return jy_integer_series<R, S>(static_cast<int>(nu), half);
    return jy_noninteger_series<R, S>(R(nu), half);
}

// ---------------------------------------------------------------------------
// Four cylinder functions at a point v with Re v >= 0 (up to rounding), nu >= 0.

struct Cylinders {
    cplx j, y, h1, h2;
    double err = 0.0;  // absolute, relative to the largest of |h1|, |h2|
};

template <class R>
Cylinders series_cylinders(double nu, cplx v) {
    const Cx<R> half = Cx<R>(v) * R(0.5);
    const auto r = jy_series<R, Cx<R>>(nu, half);
    const Cx<R> h1 = r.j + detail::times_i(r.y);
    const Cx<R> h2 = r.j - detail::times_i(r.y);
    Cylinders out{r.j.to_double(), r.y.to_double(), h1.to_double(), h2.to_double()};
    out.err = 16.0 * static_cast<double>(RealConstants<R>::epsilon * r.magnitude) +
              std::numeric_limits<double>::epsilon() * std::max(std::abs(out.h1), std::abs(out.h2));
    return out;
}

struct AsymSums {
    cplx s1, s2;
    double err;  // magnitude of the first omitted term
};

AsymSums asymptotic_sums(double nu, cplx v, int k_max) {
    const double four_nu2 = 4.0 * nu * nu;
    const cplx p_step = kI / v;
    const double inv_abs = 1.0 / std::abs(v);
    cplx s1 = 1.0, s2 = 1.0;
    cplx p1 = 1.0, p2 = 1.0;
    double a = 1.0;
    double prev = 1.0;
    double pw = 1.0;
    double err = 0.0;
    const int cap = k_max < 0 ? 400 : k_max;
    for (int k = 1;; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= (four_nu2 - odd * odd) / (8.0 * k);
        pw *= inv_abs;
        p1 *= p_step;
        p2 *= -p_step;
        const double mag = std::fabs(a) * pw;
        if (a == 0.0) {
            err = 0.0;
            break;
        }
        if (k > cap) {
            err = mag;
            break;
        }
        if (k_max < 0 && (mag >= prev || mag < 1e-18 * std::abs(s1))) {
            err = mag;
            break;
        }
        s1 += a * p1;
        s2 += a * p2;
        prev = mag;
    }
    return {s1, s2, err};
}

// Hankel pair from the asymptotic expansion at a principal-branch point.
Cylinders asymptotic_cylinders(double nu, cplx v, int k_max) {
    const auto sums = asymptotic_sums(nu, v, k_max);
    const cplx pref = std::sqrt(2.0 / (kPi * v));
    const cplx chi = v - (nu * 0.5 + 0.25) * kPi;
    const cplx e1 = std::exp(kI * chi);
    const cplx e2 = std::exp(-kI * chi);
    Cylinders out;
    out.h1 = pref * e1 * sums.s1;
    out.h2 = pref * e2 * sums.s2;
    out.j = 0.5 * (out.h1 + out.h2);
    out.y = (out.h1 - out.h2) / (2.0 * kI);
    out.err = std::abs(pref) * std::max(std::abs(e1), std::abs(e2)) *
              (sums.err + 4.0 * std::numeric_limits<double>::epsilon());
    return out;
}

Cylinders recurrence_cylinders(double nu, cplx v) {
    const double base = nu - std::floor(nu);
    const int steps = static_cast<int>(std::floor(nu));
    Cylinders prev = asymptotic_cylinders(base, v, -1);
    Cylinders cur = asymptotic_cylinders(base + 1.0, v, -1);
    const double rel = prev.err / std::max(std::abs(prev.h1), std::abs(prev.h2)) +
                       cur.err / std::max(std::abs(cur.h1), std::abs(cur.h2));
    for (int k = 1; k < steps; ++k) {
        const cplx f = 2.0 * (base + k) / v;
        Cylinders next;
        next.h1 = f * cur.h1 - prev.h1;
        next.h2 = f * cur.h2 - prev.h2;
        prev = cur;
        cur = next;
    }
    cur.j = 0.5 * (cur.h1 + cur.h2);
    cur.y = (cur.h1 - cur.h2) / (2.0 * kI);
    cur.err = rel * (steps + 1) * std::max(std::abs(cur.h1), std::abs(cur.h2));
    return cur;
}

Cylinders base_cylinders(double nu, cplx v) {
    nu = snap_order(nu);
    const double r = std::abs(v);
    if (r == 0.0) throw DomainError("Bessel argument is zero");
    if (r <= kSeriesRadius) {
        const bool near_int =
            !is_integer(nu) && std::fabs(nu - std::round(nu)) < kQuadNearInteger;
        if (std::fabs(v.imag()) > kQuadImag || near_int) return series_cylinders<quad>(nu, v);
        return series_cylinders<long double>(nu, v);
    }
    if (r >= switch_radius(nu)) return asymptotic_cylinders(nu, v, -1);
    return recurrence_cylinders(nu, v);
}

// J and Y from the Hankel expansion at real x; err is relative to the envelope.
RealJY real_asymptotic(double nu, double x, double* err) {
    const double four_nu2 = 4.0 * nu * nu;
    const double inv = 1.0 / x;
    double p = 1.0, q = 0.0;
    double a = 1.0, pw = 1.0, prev = 1.0, omitted = 0.0;
    for (int k = 1; k < 400; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= (four_nu2 - odd * odd) / (8.0 * k);
        pw *= inv;
        const double t = a * pw;
        const double mag = std::fabs(t);
        if (a == 0.0) break;
        if (mag >= prev || mag < 1e-18) {
            omitted = mag;
            break;
        }
        // i^k: 1, i, -1, -i
        switch (k & 3) {
            case 1: q += t; break;
            case 2: p -= t; break;
            case 3: q -= t; break;
            default: p += t; break;
        }
        prev = mag;
    }
    const double pref = std::sqrt(2.0 / (kPi * x));
    const double chi = x - (0.5 * nu + 0.25) * kPi;
    const double c = std::cos(chi), s = std::sin(chi);
    if (err) *err = omitted + 4.0 * std::numeric_limits<double>::epsilon();
    return {pref * (p * c - q * s), pref * (p * s + q * c)};
}

// Real-argument variant of base_cylinders (x > 0), returning J and Y only.
RealJY base_real(double nu, double x, double* err) {
    nu = snap_order(nu);
    if (x <= kSeriesRadius) {
        if (!is_integer(nu) && std::fabs(nu - std::round(nu)) < kQuadNearInteger) {
            const auto r = jy_series<quad, quad>(nu, quad(0.5) * quad(x));
            if (err) *err = 16.0 * static_cast<double>(RealConstants<quad>::epsilon * r.magnitude);
            return {static_cast<double>(r.j), static_cast<double>(r.y)};
        }
        const auto r = jy_series<long double, long double>(nu, 0.5L * x);
        if (err) *err = 16.0 * static_cast<double>(RealConstants<long double>::epsilon * r.magnitude);
        return {static_cast<double>(r.j), static_cast<double>(r.y)};
    }
    if (x >= switch_radius(nu)) return real_asymptotic(nu, x, err);
    const double base = nu - std::floor(nu);
    const int steps = static_cast<int>(std::floor(nu));
    double e0 = 0.0, e1 = 0.0;
    RealJY prev = real_asymptotic(base, x, &e0);
    RealJY cur = real_asymptotic(base + 1.0, x, &e1);
    for (int k = 1; k < steps; ++k) {
        const double f = 2.0 * (base + k) / x;
        const RealJY next{f * cur.j - prev.j, f * cur.y - prev.y};
        prev = cur;
        cur = next;
    }
    if (err) *err = (e0 + e1) * (steps + 1) * std::hypot(cur.j, cur.y);
    return cur;
}

// Applies one connection half turn per unit of m to (h1, h2).
void connect(double nu, int m, cplx& h1, cplx& h2) {
    const auto sc = sincospi(nu);
    const cplx e(sc.c, sc.s);
    const cplx ec = std::conj(e);
    for (int k = 0; k < m; ++k) {
        const cplx n1 = -ec * h2;
        const cplx n2 = e * h1 + 2.0 * sc.c * h2;
        h1 = n1;
        h2 = n2;
    }
    for (int k = 0; k < -m; ++k) {
        const cplx n1 = 2.0 * sc.c * h1 + ec * h2;
        const cplx n2 = -e * h1;
        h1 = n1;
        h2 = n2;
    }
}

// Reduction of an argument to (-pi/2, pi/2] by half turns.
int half_turns_for(double arg) { return static_cast<int>(std::ceil(arg / kPi - 0.5)); }

// J, Y of order b (any sign) at a point with Re v >= 0.
struct JY {
    cplx j, y;
};

JY reflected_jy(double b, const Cylinders& c) {
    if (b >= 0.0) return {c.j, c.y};
    const auto sc = sincospi(-snap_order(b));
    return {sc.c * c.j - sc.s * c.y, sc.s * c.j + sc.c * c.y};
}

JY jy_right(double b, cplx v) { return reflected_jy(b, base_cylinders(std::fabs(b), v)); }

// sin(m pi b) cot(pi b), continuous through integer b.
double connection_factor(double b, int m) {
    if (m == 0) return 0.0;
    const auto sc = sincospi(snap_order(b));
    double um1 = 0.0, u = 1.0;  // U_{-1}, U_0 at cos(pi b)
    for (int k = 1; k < std::abs(m); ++k) {
        const double next = 2.0 * sc.c * u - um1;
        um1 = u;
        u = next;
    }
    return (m > 0 ? 1.0 : -1.0) * sc.c * u;
}

void check_kind(int kind) {
    if (kind != 1 && kind != 2) throw InputError("Hankel kind must be 1 or 2");
}

struct CoverArg {
    double log_abs;
    double arg;
};

CoverArg cover_arg(cplx z, double x) {
    require_finite(z, "cover point");
    require_finite(x, "radial coordinate");
    if (x <= 0.0) throw DomainError("radial coordinate must be positive");
    return {0.5 * z.real() + std::log(x), 0.5 * z.imag()};
}

}  // namespace

double switch_radius(double b) { return std::max(kSeriesRadius, 2.0 * b * b); }

double hankel_coefficient(double b, int k) {
    if (k < 0) throw InputError("coefficient index must be non-negative");
    double a = 1.0;
    for (int j = 1; j <= k; ++j) {
        const double odd = 2.0 * j - 1.0;
        a *= (4.0 * b * b - odd * odd) / (8.0 * j);
    }
    return a;
}

cplx bessel_j(double b, cplx w) {
    require_finite(b, "order");
    require_finite(w, "argument");
    if (w == cplx(0.0)) {
        if (b < 0.0) throw DomainError("J_b(0) is singular for b < 0");
        return b == 0.0 ? 1.0 : 0.0;
    }
    const double a = std::arg(w);
    const int m = a > kPi / 2 ? 1 : (a <= -kPi / 2 ? -1 : 0);
    const cplx v = m == 0 ? w : -w;
    const JY r = jy_right(b, v);
    if (m == 0) return r.j;
    const auto sc = sincospi(b);
    return cplx(sc.c, m * sc.s) * r.j;
}

cplx bessel_y(double b, cplx w) {
    require_finite(b, "order");
    require_finite(w, "argument");
    if (w == cplx(0.0)) throw DomainError("Y_b(0) is singular");
    const double a = std::arg(w);
    const int m = a > kPi / 2 ? 1 : (a <= -kPi / 2 ? -1 : 0);
    const cplx v = m == 0 ? w : -w;
    const JY r = jy_right(b, v);
    if (m == 0) return r.y;
    const auto sc = sincospi(b);
    return cplx(sc.c, -m * sc.s) * r.y + 2.0 * kI * (m * sc.c) * r.j;
}

RealJY bessel_jy(double b, double x) {
    require_finite(b, "order");
    require_finite(x, "argument");
    if (x <= 0.0) throw DomainError("real Bessel argument must be positive");
    const RealJY r = base_real(std::fabs(b), x, nullptr);
    if (b >= 0.0) return r;
    const auto sc = sincospi(-snap_order(b));
    return {sc.c * r.j - sc.s * r.y, sc.s * r.j + sc.c * r.y};
}

HankelPair hankel_pair_at(double b, double log_abs, double arg) {
    require_finite(b, "order");
    require_finite(log_abs, "log modulus");
    require_finite(arg, "argument");
    const int m = half_turns_for(arg);
    const double theta = arg - m * kPi;
    const cplx v = std::polar(std::exp(log_abs), theta);
    const double nu = snap_order(std::fabs(b));
    const Cylinders c = base_cylinders(nu, v);
    HankelPair out{c.h1, c.h2, c.err, m};
    connect(nu, m, out.h1, out.h2);
    out.error_estimate = c.err * std::pow(3.0, std::abs(m));
    if (b < 0.0) {
        const auto sc = sincospi(nu);
        out.h1 *= cplx(sc.c, sc.s);
        out.h2 *= cplx(sc.c, -sc.s);
    }
    return out;
}

HankelPair hankel_pair(double b, cplx z, double x) {
    const CoverArg ca = cover_arg(z, x);
    return hankel_pair_at(b, ca.log_abs, ca.arg);
}

Evaluated hankel_eval(int kind, double b, cplx z, double x) {
    check_kind(kind);
    const HankelPair p = hankel_pair(b, z, x);
    Evaluated e{kind == 1 ? p.h1 : p.h2, p.error_estimate, false};
    e.degraded = e.error_estimate > kDegradedRel * std::abs(e.value);
    return e;
}

cplx hankel(int kind, double b, cplx z, double x) { return hankel_eval(kind, b, z, x).value; }

cplx hankel_derivative(int kind, double b, cplx z, double x) {
    check_kind(kind);
    const CoverArg ca = cover_arg(z, x);
    const HankelPair p = hankel_pair_at(b, ca.log_abs, ca.arg);
    const HankelPair q = hankel_pair_at(b - 1.0, ca.log_abs, ca.arg);
    const cplx w = std::polar(std::exp(ca.log_abs), ca.arg);
    return kind == 1 ? q.h1 - (b / w) * p.h1 : q.h2 - (b / w) * p.h2;
}

Evaluated hankel_asymptotic(int kind, double b, cplx w, int k_max) {
    check_kind(kind);
    require_finite(b, "order");
    require_finite(w, "argument");
    if (w == cplx(0.0)) throw DomainError("asymptotic expansion at zero");
    const auto sums = asymptotic_sums(b, w, k_max);
    const cplx pref = std::sqrt(2.0 / (kPi * w));
    const cplx chi = w - (b * 0.5 + 0.25) * kPi;
    const cplx e = kind == 1 ? std::exp(kI * chi) : std::exp(-kI * chi);
    Evaluated out;
    out.value = pref * e * (kind == 1 ? sums.s1 : sums.s2);
    out.error_estimate = std::abs(pref * e) * sums.err;
    out.degraded = out.error_estimate > kDegradedRel * std::abs(out.value);
    return out;
}

cplx bessel_j_cover(double b, cplx z, double x) {
    require_finite(b, "order");
    const CoverArg ca = cover_arg(z, x);
    const int m = half_turns_for(ca.arg);
    const cplx v = std::polar(std::exp(ca.log_abs), ca.arg - m * kPi);
    const JY r = jy_right(b, v);
    return std::exp(kI * (m * kPi * b)) * r.j;
}

cplx bessel_y_cover(double b, cplx z, double x) {
    require_finite(b, "order");
    const CoverArg ca = cover_arg(z, x);
    const int m = half_turns_for(ca.arg);
    const cplx v = std::polar(std::exp(ca.log_abs), ca.arg - m * kPi);
    const JY r = jy_right(b, v);
    return std::exp(-kI * (m * kPi * b)) * r.y + 2.0 * kI * connection_factor(b, m) * r.j;
}

double cylinder_g(double b, double lambda, double x) {
    require_finite(b, "order");
    require_finite(lambda, "spectral parameter");
    require_finite(x, "radial coordinate");
    if (lambda <= 0.0) throw DomainError("cylinder function needs lambda > 0");
    if (x <= 0.0) throw DomainError("radial coordinate must be positive");
    if (x == 1.0) return 0.0;
    const RealJY p = bessel_jy(std::fabs(b), lambda);
    const RealJY q = bessel_jy(std::fabs(b), lambda * x);
    return p.y * q.j - p.j * q.y;
}

cplx cylinder_g_cover(double b, cplx z, double x) {
    require_finite(b, "order");
    const CoverArg ca = cover_arg(z, x);
    if (x == 1.0) return 0.0;
    cplx lam = std::polar(std::exp(0.5 * z.real()), 0.5 * z.imag());
    if (lam.real() < 0.0) lam = -lam;
    const double nu = std::fabs(b);
    const Cylinders p = base_cylinders(nu, lam);
    const Cylinders q = base_cylinders(nu, lam * x);
    (void)ca;
    const cplx a1 = p.y * q.j, a2 = p.j * q.y;
    const cplx b1 = p.h1 * q.h2, b2 = p.h2 * q.h1;
    const double mag_jy = std::max(std::abs(a1), std::abs(a2));
    const double mag_h = std::max(std::abs(b1), std::abs(b2));
    if (mag_jy <= mag_h) return a1 - a2;
    return (b1 - b2) / (2.0 * kI);
}

cplx hankel_weight_deriv(int kind, double b, cplx z, double x) {
    check_kind(kind);
    const CoverArg ca = cover_arg(z, x);
    const HankelPair q = hankel_pair_at(b - 1.0, ca.log_abs, ca.arg);
    const cplx wb = std::exp(b * cplx(ca.log_abs, ca.arg));
    const cplx lam = std::exp(0.5 * z);
    return lam * wb * (kind == 1 ? q.h1 : q.h2);
}

}  // namespace gcusp
