#pragma once

// Real and complex arithmetic in extended precision (80-bit long double and
// binary128 via libquadmath). Only the handful of operations needed by the
// ascending Bessel series are provided.

#include <quadmath.h>

#include <cmath>
#include <complex>

namespace gcusp::detail {

using quad = __float128;

inline long double r_exp(long double x) { return std::exp(x); }
inline long double r_log(long double x) { return std::log(x); }
inline long double r_sin(long double x) { return std::sin(x); }
inline long double r_cos(long double x) { return std::cos(x); }
inline long double r_sqrt(long double x) { return std::sqrt(x); }
inline long double r_abs(long double x) { return std::fabs(x); }
inline long double r_atan2(long double y, long double x) { return std::atan2(y, x); }
inline long double r_tgamma(long double x) { return std::tgamma(x); }
inline long double r_hypot(long double x, long double y) { return std::hypot(x, y); }

inline quad r_exp(quad x) { return expq(x); }
inline quad r_log(quad x) { return logq(x); }
inline quad r_sin(quad x) { return sinq(x); }
inline quad r_cos(quad x) { return cosq(x); }
inline quad r_sqrt(quad x) { return sqrtq(x); }
inline quad r_abs(quad x) { return fabsq(x); }
inline quad r_atan2(quad y, quad x) { return atan2q(y, x); }
inline quad r_tgamma(quad x) { return tgammaq(x); }
inline quad r_hypot(quad x, quad y) { return hypotq(x, y); }

template <class R>
struct RealConstants;

template <>
struct RealConstants<long double> {
    static constexpr long double pi = 3.141592653589793238462643383279502884L;
    static constexpr long double euler_gamma = 0.577215664901532860606512090082402431L;
    static constexpr long double epsilon = 1.0842021724855044e-19L;
};

template <>
struct RealConstants<quad> {
    static constexpr quad pi = 3.141592653589793238462643383279502884Q;
    static constexpr quad euler_gamma = 0.577215664901532860606512090082402431Q;
    static constexpr quad epsilon = 1.925929944387235853055977942584927319e-34Q;
};

/// Minimal complex number over an extended real type.
template <class R>
struct Cx {
    R re{0};
    R im{0};

    Cx() = default;
    Cx(R r, R i = R(0)) : re(r), im(i) {}
    explicit Cx(std::complex<double> z) : re(R(z.real())), im(R(z.imag())) {}

    std::complex<double> to_double() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }
};

template <class R>
inline Cx<R> operator+(Cx<R> a, Cx<R> b) { return {a.re + b.re, a.im + b.im}; }
template <class R>
inline Cx<R> operator-(Cx<R> a, Cx<R> b) { return {a.re - b.re, a.im - b.im}; }
template <class R>
inline Cx<R> operator-(Cx<R> a) { return {-a.re, -a.im}; }
template <class R>
inline Cx<R> operator*(Cx<R> a, Cx<R> b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class R>
inline Cx<R> operator*(Cx<R> a, R s) { return {a.re * s, a.im * s}; }
template <class R>
inline Cx<R> operator*(R s, Cx<R> a) { return {a.re * s, a.im * s}; }
template <class R>
inline Cx<R> operator/(Cx<R> a, R s) { return {a.re / s, a.im / s}; }
template <class R>
inline Cx<R> operator/(Cx<R> a, Cx<R> b) {
    // Smith's algorithm
    if (r_abs(b.re) >= r_abs(b.im)) {
        R r = b.im / b.re;
        R d = b.re + b.im * r;
        return {(a.re + a.im * r) / d, (a.im - a.re * r) / d};
    }
    R r = b.re / b.im;
    R d = b.re * r + b.im;
    return {(a.re * r + a.im) / d, (a.im * r - a.re) / d};
}
template <class R>
inline Cx<R>& operator+=(Cx<R>& a, Cx<R> b) { a = a + b; return a; }

template <class R>
inline R s_abs(Cx<R> a) { return r_hypot(a.re, a.im); }
template <class R>
inline Cx<R> s_exp(Cx<R> a) {
    R m = r_exp(a.re);
    return {m * r_cos(a.im), m * r_sin(a.im)};
}
template <class R>
inline Cx<R> s_log(Cx<R> a) { return {r_log(s_abs(a)), r_atan2(a.im, a.re)}; }

inline long double s_abs(long double a) { return r_abs(a); }
inline quad s_abs(quad a) { return r_abs(a); }
inline long double s_exp(long double a) { return r_exp(a); }
inline quad s_exp(quad a) { return r_exp(a); }
inline long double s_log(long double a) { return r_log(a); }
inline quad s_log(quad a) { return r_log(a); }

/// i·s for a complex scalar; used only on complex paths.
template <class R>
inline Cx<R> times_i(Cx<R> a) { return {-a.im, a.re}; }

inline std::complex<double> to_double(long double x) { return {static_cast<double>(x), 0.0}; }
inline std::complex<double> to_double(quad x) { return {static_cast<double>(x), 0.0}; }
template <class R>
inline std::complex<double> to_double(Cx<R> x) { return x.to_double(); }

}  // namespace gcusp::detail
