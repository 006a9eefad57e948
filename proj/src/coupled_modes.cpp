#include "gcusp/coupled_modes.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

namespace gcusp {
namespace {

using State = std::array<cplx, 4>;

double t_of_x(double a, double x) { return std::pow(x, a + 1.0) / (a + 1.0); }
double x_of_t(double a, double t) { return std::pow((a + 1.0) * t, 1.0 / (a + 1.0)); }

double state_norm(const State& y) {
    double s = 0.0;
    for (const auto& v : y) s += std::norm(v);
    return std::sqrt(s);
}

// Integrates Y' = F Y through the x samples, renormalizing after each step;
// returns the accumulated log |Y| at every sample.
std::vector<double> integrate_log_norm(const ModeSystem& ms, cplx z, State y, const std::vector<double>& xs) {
    namespace ode = boost::numeric::odeint;
    auto rhs = [&](const State& s, State& ds, double x) {
        const Potentials p = effective_potentials(ms, x, z);
        ds[0] = s[2];
        ds[1] = s[3];
        ds[2] = p.P * s[0] + p.q * s[1];
        ds[3] = p.q * s[0] + p.R * s[1];
    };
    auto stepper = ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<State, double, State, double>());
    std::vector<double> out(xs.size());
    double acc = std::log(state_norm(y));
    for (auto& v : y) v /= std::exp(acc);
    out[0] = acc;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double dx = xs[i] - xs[i - 1];
        ode::integrate_adaptive(stepper, rhs, y, xs[i - 1], xs[i], 0.05 * dx);
        const double n = state_norm(y);
        if (!(n > 0.0) || !std::isfinite(n)) throw RegimeError("mode integration overflow");
        acc += std::log(n);
        for (auto& v : y) v /= n;
        out[i] = acc;
    }
    return out;
}

double fit_slope(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1) continue;
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
        ++n;
    }
    if (n < 3) throw InputError("too few samples in the fit window");
    return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace

void ModeSystem::validate() const {
    geometry.validate();
    if (!(nu > 0.0) || !std::isfinite(nu)) throw InputError("nu must be positive");
    if (!(x_max > 1.0) || !std::isfinite(x_max)) throw InputError("x_max must exceed 1");
    if (!(h > 0.0) || h > 0.25 * (x_max - 1.0)) throw InputError("bad finite-difference step");
}

namespace {

Potentials potentials_at(const ModeSystem& ms, double x, cplx u) {
    if (!(x >= 1.0) || !std::isfinite(x)) throw DomainError("x must lie in [1, inf)");
    const double a = ms.geometry.a;
    const double gp = ms.geometry.gamma(ms.geometry.p), gq = ms.geometry.gamma(ms.geometry.p - 1);
    const double conf = std::pow(x, 2.0 * a) * ms.nu * ms.nu;
    Potentials p;
    p.P = conf + gp * (gp + 2.0) / (4.0 * x * x) - u;
    p.R = conf + gq * (gq - 2.0) / (4.0 * x * x) - u;
    p.q = ms.sector == ModeSector::V ? 2.0 * a * ms.nu * std::pow(x, a - 1.0) : 0.0;
    return p;
}

}  // namespace

Potentials effective_potentials(const ModeSystem& ms, double x, cplx z) { return potentials_at(ms, x, std::exp(z)); }

Matrix4 f_matrix(const Potentials& p) {
    Matrix4 f = Matrix4::Zero();
    f(0, 2) = 1.0;
    f(1, 3) = 1.0;
    f(2, 0) = p.P;
    f(2, 1) = p.q;
    f(3, 0) = p.q;
    f(3, 1) = p.R;
    return f;
}

std::array<cplx, 4> f_matrix_eigenvalues(cplx P, cplx R, double q) {
    const cplx d = std::sqrt((P - R) * (P - R) + 4.0 * q * q);
    const cplx r1 = std::sqrt(0.5 * (P + R + d)), r2 = std::sqrt(0.5 * (P + R - d));
    return {r1, -r1, r2, -r2};
}

Matrix4 diagonalizer(const Potentials& p) {
    const auto l = f_matrix_eigenvalues(p.P, p.R, p.q);
    Matrix4 s;
    if (p.q != 0.0) {
        for (int j = 0; j < 4; ++j) {
            const cplx c = (l[j] * l[j] - p.P) / p.q;
            s.col(j) << 1.0, c, l[j], l[j] * c;
        }
        return s;
    }
    // decoupled: the first pair belongs to whichever channel its square matches
    const bool first_is_w = std::abs(l[0] * l[0] - p.P) <= std::abs(l[0] * l[0] - p.R);
    for (int j = 0; j < 4; ++j) {
        const bool w = (j < 2) == first_is_w;
        if (w) s.col(j) << 1.0, 0.0, l[j], 0.0;
        else s.col(j) << 0.0, 1.0, 0.0, l[j];
    }
    return s;
}

double diagonalizer_remainder(const ModeSystem& ms, double x, cplx z) {
    const double d = 1e-5 * x;
    const Matrix4 s = diagonalizer(effective_potentials(ms, x, z));
    const Matrix4 ds = (diagonalizer(effective_potentials(ms, x + d, z)) -
                        diagonalizer(effective_potentials(ms, std::max(1.0, x - d), z))) /
                       (x + d - std::max(1.0, x - d));
    return (s.inverse() * ds).norm() / std::pow(x, ms.geometry.a);
}

double BandMatrix::operator()(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (j - i > kd) return 0.0;
    return ab[static_cast<std::size_t>(kd + i - j) + static_cast<std::size_t>(j) * (kd + 1)];
}

Eigen::MatrixXd BandMatrix::dense() const {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = (*this)(i, j);
    return m;
}

BandMatrix assemble_mode_operator(const ModeSystem& ms) {
    ms.validate();
    const int cells = std::max(4, static_cast<int>(std::lround((ms.x_max - 1.0) / ms.h)));
    const double h = (ms.x_max - 1.0) / cells;
    const int nodes = cells - 1;
    BandMatrix m;
    m.n = 2 * nodes;
    m.ab.assign(static_cast<std::size_t>(m.kd + 1) * m.n, 0.0);
    auto set = [&](int i, int j, double v) {
        m.ab[static_cast<std::size_t>(m.kd + i - j) + static_cast<std::size_t>(j) * (m.kd + 1)] = v;
    };
    const double off = -1.0 / (h * h);
    for (int k = 0; k < nodes; ++k) {
        const double x = 1.0 + h * (k + 1);
        const Potentials p = potentials_at(ms, x, 0.0);
        const int w = 2 * k, v = 2 * k + 1;
        set(w, w, 2.0 / (h * h) + p.P.real());
        set(v, v, 2.0 / (h * h) + p.R.real());
        set(w, v, p.q);
        if (k + 1 < nodes) {
            set(w, w + 2, off);
            set(v, v + 2, off);
        }
    }
    return m;
}

namespace {

// Number of eigenvalues below sigma: negative pivots of the banded LDL^T of A - sigma I.
int count_below(const BandMatrix& m, double sigma, std::vector<double>& d, std::vector<double>& l) {
    const int n = m.n, kd = m.kd;
    // l(i, k) = L[i][i - 1 - k] for k < kd
    int neg = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - kd); j < i; ++j) {
            double v = m(j, i);
            for (int k = std::max(0, i - kd); k < j; ++k) v -= l[i * kd + (i - 1 - k)] * l[j * kd + (j - 1 - k)] * d[k];
            l[i * kd + (i - 1 - j)] = v / d[j];
        }
        double v = m(i, i) - sigma;
        for (int k = std::max(0, i - kd); k < i; ++k) {
            const double lik = l[i * kd + (i - 1 - k)];
            v -= lik * lik * d[k];
        }
        if (v == 0.0) v = -1e-300;
        d[i] = v;
        if (v < 0.0) ++neg;
    }
    return neg;
}

}  // namespace

std::vector<double> band_eigenvalues(const BandMatrix& m, int count) {
    if (count < 0) throw InputError("negative eigenvalue count");
    if (count == 0) return {};
    if (count > m.n) throw InputError("more eigenvalues requested than unknowns");
    // Gershgorin bounds
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < m.n; ++i) {
        double r = 0.0;
        for (int j = std::max(0, i - m.kd); j <= std::min(m.n - 1, i + m.kd); ++j)
            if (j != i) r += std::abs(m(i, j));
        lo = std::min(lo, m(i, i) - r);
        hi = std::max(hi, m(i, i) + r);
    }
    std::vector<double> d(m.n), l(static_cast<std::size_t>(m.n) * m.kd, 0.0), out(count);
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
    double a = lo;
    for (int k = 0; k < count; ++k) {
        // k-th eigenvalue (0-based): smallest sigma with count_below(sigma) > k
        double b = hi;
        while (b - a > tol + 1e-15 * std::abs(a)) {
            const double mid = 0.5 * (a + b);
            if (count_below(m, mid, d, l) > k) b = mid;
            else a = mid;
        }
        out[k] = 0.5 * (a + b);
    }
    return out;
}

double confinement_radius(double a, double nu, double lambda_max) {
    if (lambda_max <= 0.0) return 2.0;
    return std::max(2.0, std::pow(10.0 * lambda_max / (nu * nu), 1.0 / (2.0 * a)));
}

std::vector<ModeEigenvalue> discrete_spectrum(const ModeSystem& ms, int count) {
    ms.validate();
    if (count < 0) throw InputError("negative eigenvalue count");
    if (count == 0) return {};
    ModeSystem fine = ms;
    fine.h = 0.5 * ms.h;
    const auto coarse_ev = band_eigenvalues(assemble_mode_operator(ms), count);
    const auto fine_ev = band_eigenvalues(assemble_mode_operator(fine), count);
    const double conf = ms.nu * ms.nu * std::pow(ms.x_max, 2.0 * ms.geometry.a);
    std::vector<ModeEigenvalue> out;
    for (int i = 0; i < count; ++i) {
        const double ext = (4.0 * fine_ev[i] - coarse_ev[i]) / 3.0;
        out.push_back({ext, std::abs(ext - fine_ev[i]), conf >= 10.0 * ext});
    }
    return out;
}

PerronReport perron_decay_check(const ModeSystem& ms, cplx z, double t_max) {
    ms.validate();
    const double a = ms.geometry.a, nu = ms.nu;
    PerronReport rep;
    rep.t_max = t_max > 0.0 ? t_max : 400.0 / nu;
    const double t1 = t_of_x(a, 1.0);
    if (rep.t_max <= 10.0 * t1) throw InputError("fit window too short");
    rep.t_min = 0.1 * rep.t_max;
    const int samples = 600;

    // growing solution from Dirichlet data at x = 1
    std::vector<double> xs_up(samples + 1), ts_up(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        ts_up[i] = t1 + (rep.t_max - t1) * double(i) / samples;
        xs_up[i] = x_of_t(a, ts_up[i]);
    }
    xs_up[0] = 1.0;
    const auto up = integrate_log_norm(ms, z, State{0.0, 0.0, 1.0, 1.0}, xs_up);
    rep.growth_rate = fit_slope(ts_up, up, rep.t_min, rep.t_max);

    // decaying solution, started on the decaying eigenvectors beyond the window
    const double t_start = 1.25 * rep.t_max;
    const int down_samples = samples + samples / 4;
    std::vector<double> xs_dn(down_samples + 1), ts_dn(down_samples + 1);
    for (int i = 0; i <= down_samples; ++i) {
        ts_dn[i] = t_start - (t_start - t1) * double(i) / down_samples;
        xs_dn[i] = x_of_t(a, ts_dn[i]);
    }
    xs_dn.back() = 1.0;
    const Matrix4 s = diagonalizer(effective_potentials(ms, xs_dn[0], z));
    const Eigen::Matrix<cplx, 4, 1> c = s.col(1) / s.col(1).norm() + s.col(3) / s.col(3).norm();
    const auto dn = integrate_log_norm(ms, z, State{c(0), c(1), c(2), c(3)}, xs_dn);
    rep.decay_rate = fit_slope(ts_dn, dn, rep.t_min, rep.t_max);

    rep.decay_deviation = std::abs(rep.decay_rate + nu) / nu;
    rep.growth_deviation = std::abs(rep.growth_rate - nu) / nu;

    const double x_end = x_of_t(a, rep.t_max);
    const Potentials pe = effective_potentials(ms, x_end, z);
    const auto l = f_matrix_eigenvalues(pe.P, pe.R, pe.q);
    const double lead = nu * std::pow(x_end, a);
    for (int j = 0; j < 4; ++j) {
        const double sign = j % 2 == 0 ? 1.0 : -1.0;
        rep.eigen_ratio_defect = std::max(rep.eigen_ratio_defect, std::abs(l[j].real() / (sign * lead) - 1.0));
    }

    // tail bound on the decaying solution normalized at x = 1
    const double eps = 0.05 * nu;
    const double base = dn.back();
    double best = -1e300;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < ts_dn.size(); ++i) {
        if (ts_dn[i] > rep.t_max) continue;
        rep.t.push_back(ts_dn[i]);
        rep.log_norm.push_back(dn[i] - base);
        const double v = dn[i] - base + (nu - eps * (a + 1.0)) * ts_dn[i];
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    std::reverse(rep.t.begin(), rep.t.end());
    std::reverse(rep.log_norm.begin(), rep.log_norm.end());
    rep.tail_constant = std::exp(best);
    rep.tail_bounded = ts_dn[arg] < 0.9 * rep.t_max;
    if (rep.decay_deviation > 0.02 || rep.growth_deviation > 0.02)
        rep.warning = "fitted rates deviate from +-nu by more than 2%";
    return rep;
}

}  // namespace gcusp
