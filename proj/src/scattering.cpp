#include "gcusp/scattering.hpp"

#include <algorithm>
#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <memory>
#include <numbers>

#include "gcusp/special_fn.hpp"

namespace gcusp {
namespace {

namespace ode = boost::numeric::odeint;
using State = std::vector<cplx>;
constexpr double kPi = std::numbers::pi;
constexpr double kMaxAmplification = 1e6;

class Warp {
public:
    explicit Warp(const ModelManifold& mm) : a_(mm.geometry.a) {
        if (mm.warp.kind != WarpSpec::Kind::spline) return;
        auto x = mm.warp.knots;
        auto y = mm.warp.values;
        const std::size_t n = x.size();
        std::vector<double> d(n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (i == 0) {
                d[i] = (y[1] - y[0]) / (x[1] - x[0]);
            } else {
                const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
                d[i] = (h0 * h0 * (y[i + 1] - y[i]) + h1 * h1 * (y[i] - y[i - 1])) / (h0 * h1 * (h0 + h1));
            }
        }
        d[n - 1] = -a_;
        spline_ = std::make_shared<boost::math::interpolators::cubic_hermite<std::vector<double>>>(
            std::move(x), std::move(y), std::move(d));
    }
    double operator()(double x) const {
        if (x >= 1.0 || !spline_) return std::pow(x, -a_);
        return (*spline_)(x);
    }

private:
    double a_;
    std::shared_ptr<boost::math::interpolators::cubic_hermite<std::vector<double>>> spline_;
};

struct Setup {
    ScatteringSector sector = ScatteringSector::alpha;
    double order = 0, weight = 0;
    double exponent = 0;  // rho = f^exponent
    int m = 0, k = 0;     // harmonic channels, mode channels (0 or 1)
    double mu1 = 0.0;
};

Setup make_setup(const ModelManifold& mm, ScatteringSector s) {
    mm.validate();
    const auto& g = mm.geometry;
    const SectorOrder so = sector_order(g, s);
    Setup st{s, so.order, so.weight, 0.0, mm.channels(s), 0, 0.0};
    st.exponent = s == ScatteringSector::alpha ? double(g.n - 1 - 2 * g.p) : double(g.n + 1 - 2 * g.p);
    if (s == ScatteringSector::alpha && mm.include_first_mode) {
        st.k = 1;
        st.mu1 = g.mu.front();
    }
    if (st.m < 1) throw InputError("sector has no harmonic channels");
    return st;
}

void check_z(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InputError("non-finite spectral parameter");
}

template <class Rhs>
void propagate(Rhs&& rhs, State& y, double from, double to, double tol) {
    if (from == to) return;
    auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<State, double, State, double>());
    ode::integrate_adaptive(stepper, rhs, y, from, to, 0.01 * (to - from));
}

// Coefficient functions of p' = k s, s' = G p for one channel of the bare cusp.
struct CuspCoeffs {
    double k, rho;
};
CuspCoeffs cusp_coeffs(const Setup& st, double a, double x) {
    const double rho = std::pow(x, -a * st.exponent);
    return {st.sector == ScatteringSector::alpha ? 1.0 / rho : rho, rho};
}

cplx cusp_g(const Setup& st, const CuspCoeffs& c, cplx u, double extra) {
    return st.sector == ScatteringSector::alpha ? c.rho * (extra - u) : (extra - u) / c.rho;
}

// Hankel basis (p, s) at x for kind 1, 2.
struct BasisValue {
    cplx p, s;
};
BasisValue basis_at(const Setup& st, int kind, cplx z, double x) {
    const cplx l = std::exp(0.5 * z);
    if (st.sector == ScatteringSector::alpha) {
        const double b = st.order;
        return {std::pow(x, b) * hankel(kind, b, z, x), std::pow(x, 1.0 - b) * l * hankel(kind, b - 1.0, z, x)};
    }
    const double c = st.weight;
    return {std::pow(x, 1.0 - c) * hankel(kind, c - 1.0, z, x), -l * std::pow(x, c) * hankel(kind, c, z, x)};
}

struct Matching {
    Setup st;
    double x_match = 1.0;
    Eigen::MatrixXcd left_init;  // 2N x N at x0
    Eigen::MatrixXcd left_one;   // 2N x N at x = 1 (rows p_0..p_{N-1}, s_0..s_{N-1})
    Eigen::MatrixXcd A, B;       // m x N
    Eigen::MatrixXcd M;          // N x N
    Eigen::MatrixXd scale;       // magnitude of the Wronskian terms of each entry of M
    cplx mode_p = 1.0, mode_s = 0.0;  // decaying mode solution at x = 1, p normalized to 1
};

double amplification(cplx z, double x) {
    const double il = std::abs(std::exp(0.5 * z).imag());
    return std::exp(2.0 * il * (x - 1.0));
}

// Decaying solution of the mode channel on the cusp, integrated inwards with
// renormalization. Returns (p, s) at x = 1 and log|p| at the requested samples
// relative to x = 1.
struct ModeSolution {
    cplx p1, s1;
    std::vector<double> log_abs;
};
ModeSolution mode_solution(const ModelManifold& mm, const Setup& st, cplx z, const std::vector<double>& samples,
                           double tol) {
    const double a = mm.geometry.a, nu = std::sqrt(st.mu1);
    double top = 1.0;
    for (double s : samples) top = std::max(top, s);
    // extend beyond the last sample until the growing solution is damped by e^{-45}
    const double t_top = nu * std::pow(top, a + 1.0) / (a + 1.0);
    const double x_far = std::pow((t_top + 45.0) * (a + 1.0) / nu, 1.0 / (a + 1.0));
    const cplx u = std::exp(z);
    auto rhs = [&](const State& y, State& dy, double x) {
        const CuspCoeffs c = cusp_coeffs(st, a, x);
        dy[0] = c.k * y[1];
        dy[1] = cusp_g(st, c, u, st.mu1 * std::pow(x, 2.0 * a)) * y[0];
    };
    const CuspCoeffs cf = cusp_coeffs(st, a, x_far);
    State y{1.0, -cf.rho * std::sqrt(st.mu1 * std::pow(x_far, 2.0 * a) - u)};
    // stops: x_far, descending samples, 1
    std::vector<double> stops{x_far};
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return samples[i] > samples[j]; });
    double log_scale = 0.0, x = x_far;
    std::vector<double> log_at(samples.size());
    auto advance = [&](double to) {
        // renormalize every unit of t to keep the state finite
        while (x > to) {
            const double t = nu * std::pow(x, a + 1.0) / (a + 1.0);
            const double tn = std::max(t - 20.0, 0.0);
            double next = tn > 0.0 ? std::pow(tn * (a + 1.0) / nu, 1.0 / (a + 1.0)) : to;
            next = std::max(next, to);
            propagate(rhs, y, x, next, tol);
            x = next;
            const double n = std::max(std::abs(y[0]), std::abs(y[1]));
            log_scale += std::log(n);
            y[0] /= n;
            y[1] /= n;
        }
    };
    for (std::size_t i : order) {
        advance(samples[i]);
        log_at[i] = log_scale + std::log(std::abs(y[0]));
    }
    advance(1.0);
    ModeSolution out;
    out.p1 = y[0];
    out.s1 = y[1];
    const double ref = log_scale + std::log(std::abs(y[0]));
    out.s1 /= out.p1;
    out.p1 = 1.0;
    out.log_abs.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out.log_abs[i] = log_at[i] - ref;
    return out;
}

// Coefficient matrix G(x) of the interior system (N x N) and k(x).
double interior_g(const ModelManifold& mm, const Setup& st, const Warp& warp, cplx u, double x, Eigen::MatrixXcd& g) {
    const int n = st.m + st.k;
    const double f = warp(x);
    const double rho = std::pow(f, st.exponent);
    const bool alpha = st.sector == ScatteringSector::alpha;
    const CouplingSpec& cs = alpha ? mm.coupling_alpha : mm.coupling_beta;
    g.setZero();
    if (!cs.empty() && x >= cs.lo && x <= cs.hi) {
        const double t = (x - cs.lo) / (cs.hi - cs.lo);
        double tk = 16.0 * t * t * (1.0 - t) * (1.0 - t);
        for (const auto& c : cs.coeffs) {
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) g(i, l) += tk * c(i, l);
            tk *= t;
        }
    }
    for (int i = 0; i < n; ++i) g(i, i) -= u;
    if (st.k == 1) g(n - 1, n - 1) += st.mu1 / (f * f);
    g *= alpha ? rho : 1.0 / rho;
    return alpha ? 1.0 / rho : rho;
}

// Propagate a 2N x ncol block of solutions across [from, to] within the interior.
void propagate_interior(const ModelManifold& mm, const Setup& st, const Warp& warp, cplx u, Eigen::MatrixXcd& Y,
                        double from, double to, double tol) {
    const int n = st.m + st.k;
    const int cols = int(Y.cols());
    State y(std::size_t(2 * n * cols));
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < 2 * n; ++i) y[std::size_t(j * 2 * n + i)] = Y(i, j);
    Eigen::MatrixXcd g(n, n);
    auto rhs = [&](const State& v, State& dv, double x) {
        const double k = interior_g(mm, st, warp, u, x, g);
        for (int j = 0; j < cols; ++j) {
            const cplx* p = &v[std::size_t(j * 2 * n)];
            const cplx* s = p + n;
            cplx* dp = &dv[std::size_t(j * 2 * n)];
            cplx* ds = dp + n;
            for (int i = 0; i < n; ++i) {
                dp[i] = k * s[i];
                cplx acc = 0.0;
                for (int l = 0; l < n; ++l) acc += g(i, l) * p[l];
                ds[i] = acc;
            }
        }
    };
    // integrate piecewise between points where the coefficients lose smoothness
    std::vector<double> cuts{to};
    const CouplingSpec& cs = st.sector == ScatteringSector::alpha ? mm.coupling_alpha : mm.coupling_beta;
    std::vector<double> kinks;
    if (!cs.empty()) kinks = {cs.lo, cs.hi};
    if (mm.warp.kind == WarpSpec::Kind::spline) kinks.insert(kinks.end(), mm.warp.knots.begin(), mm.warp.knots.end());
    for (double k : kinks)
        if (k > from && k < to) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    double x = from;
    for (double c : cuts) {
        propagate(rhs, y, x, c, tol);
        x = c;
    }
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < 2 * n; ++i) Y(i, j) = y[std::size_t(j * 2 * n + i)];
}

// Transfer matrix of one harmonic cusp channel across [1, X].
Eigen::Matrix2cd cusp_transfer(const ModelManifold& mm, const Setup& st, cplx u, double X, double tol) {
    if (X == 1.0) return Eigen::Matrix2cd::Identity();
    const double a = mm.geometry.a;
    State y{1.0, 0.0, 0.0, 1.0};
    auto rhs = [&](const State& v, State& dv, double x) {
        const CuspCoeffs c = cusp_coeffs(st, a, x);
        const cplx g = cusp_g(st, c, u, 0.0);
        dv[0] = c.k * v[1];
        dv[1] = g * v[0];
        dv[2] = c.k * v[3];
        dv[3] = g * v[2];
    };
    propagate(rhs, y, 1.0, X, tol);
    Eigen::Matrix2cd t;
    t << y[0], y[2], y[1], y[3];
    return t;
}

double resolve_x_match(cplx z, const ScatteringOptions& opt) {
    if (opt.x_match == 0.0) return default_matching_radius(z);
    if (!(opt.x_match >= 1.0) || !std::isfinite(opt.x_match)) throw InputError("matching radius must be >= 1");
    if (amplification(z, opt.x_match) > kMaxAmplification)
        throw MatchingError("matching radius amplifies the integration error beyond tolerance");
    return opt.x_match;
}

Matching build_matching(const ModelManifold& mm, cplx z, ScatteringSector sector, const ScatteringOptions& opt) {
    check_z(z);
    Matching mt;
    mt.st = make_setup(mm, sector);
    const Setup& st = mt.st;
    const int n = st.m + st.k;
    const cplx u = std::exp(z);
    mt.x_match = resolve_x_match(z, opt);

    mt.left_init = Eigen::MatrixXcd::Zero(2 * n, n);
    for (int j = 0; j < n; ++j) mt.left_init(mm.inner_bc == InnerBC::dirichlet ? n + j : j, j) = 1.0;
    mt.left_one = mt.left_init;
    const Warp warp(mm);
    if (mm.x0 < 1.0) propagate_interior(mm, st, warp, u, mt.left_one, mm.x0, 1.0, opt.tol);

    const Eigen::Matrix2cd T = cusp_transfer(mm, st, u, mt.x_match, opt.tol);
    const BasisValue h1 = basis_at(st, 1, z, mt.x_match), h2 = basis_at(st, 2, z, mt.x_match);
    const cplx w21 = h2.p * h1.s - h2.s * h1.p;
    mt.A.resize(st.m, n);
    mt.B.resize(st.m, n);
    mt.scale = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < st.m; ++i)
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector2cd v = T * Eigen::Vector2cd(mt.left_one(i, j), mt.left_one(n + i, j));
            mt.A(i, j) = (v(0) * h1.s - v(1) * h1.p) / w21;
            mt.B(i, j) = -(v(0) * h2.s - v(1) * h2.p) / w21;
            mt.scale(i, j) = (std::abs(v(0) * h1.s) + std::abs(v(1) * h1.p)) / std::abs(w21);
        }
    mt.M.resize(n, n);
    mt.M.topRows(st.m) = mt.A;
    if (st.k == 1) {
        const ModeSolution ms = mode_solution(mm, st, z, {}, opt.tol);
        mt.mode_p = ms.p1;
        mt.mode_s = ms.s1;
        for (int j = 0; j < n; ++j) {
            mt.M(n - 1, j) = mt.left_one(n - 1, j) * ms.s1 - mt.left_one(2 * n - 1, j) * ms.p1;
            mt.scale(n - 1, j) = std::abs(mt.left_one(n - 1, j) * ms.s1) + std::abs(mt.left_one(2 * n - 1, j) * ms.p1);
        }
    }
    return mt;
}

double pole_threshold(const ScatteringOptions& opt) { return 10.0 * opt.tol; }

// sigma_min of M after row and column equilibration by the term magnitudes.
double matching_condition(const Matching& mt) {
    Eigen::MatrixXcd r = mt.M;
    Eigen::MatrixXd w = mt.scale;
    for (int i = 0; i < r.rows(); ++i) {
        const double m = w.row(i).maxCoeff();
        if (m > 0.0) r.row(i) /= m, w.row(i) /= m;
    }
    for (int j = 0; j < r.cols(); ++j) {
        const double m = w.col(j).maxCoeff();
        if (m > 0.0) r.col(j) /= m;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r);
    return svd.singularValues()(r.rows() - 1);
}

double op_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

// Smooth step: 1 for s <= lo, 0 for s >= hi.
double smooth_step(double s, double lo, double hi) {
    if (s <= lo) return 1.0;
    if (s >= hi) return 0.0;
    const double t = (s - lo) / (hi - lo);
    const double f0 = std::exp(-1.0 / (1.0 - t)), f1 = std::exp(-1.0 / t);
    return f0 / (f0 + f1);
}

}  // namespace

Eigen::MatrixXd CouplingSpec::at(double x, int dim) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
    if (coeffs.empty() || !(x >= lo && x <= hi)) return out;
    const double t = (x - lo) / (hi - lo);
    const double w = 16.0 * t * t * (1.0 - t) * (1.0 - t);
    double tk = 1.0;
    for (const auto& c : coeffs) {
        out += tk * c;
        tk *= t;
    }
    return w * out;
}

int ModelManifold::channels(ScatteringSector s) const {
    return s == ScatteringSector::alpha ? geometry.m_p : (geometry.p >= 1 ? geometry.m_pm1 : 0);
}

void ModelManifold::validate() const {
    geometry.validate();
    if (!(x0 > 0.0 && x0 <= 1.0)) throw InputError("inner radius must lie in (0, 1]");
    if (warp.kind == WarpSpec::Kind::spline) {
        const auto& k = warp.knots;
        const auto& v = warp.values;
        if (k.size() < 2 || k.size() != v.size()) throw InputError("warp spline needs matching knots and values");
        for (std::size_t i = 1; i < k.size(); ++i)
            if (!(k[i] > k[i - 1])) throw InputError("warp knots must increase");
        if (std::abs(k.front() - x0) > 1e-12 || k.back() != 1.0) throw InputError("warp knots must span [x0, 1]");
        for (double f : v)
            if (!(f > 0.0) || !std::isfinite(f)) throw InputError("warp must be positive");
        if (v.back() != 1.0) throw InputError("warp must equal 1 at x = 1");
    }
    if (include_first_mode && geometry.mu.empty()) throw InputError("the first mode needs a cross-section eigenvalue");
    auto check = [&](const CouplingSpec& c, int dim) {
        if (c.empty()) return;
        if (!(c.lo >= x0 - 1e-12 && c.hi <= 1.0 && c.lo < c.hi)) throw InputError("coupling support must lie in [x0, 1]");
        for (const auto& a : c.coeffs) {
            if (a.rows() != dim || a.cols() != dim) throw InputError("coupling has the wrong size");
            if (!a.allFinite() || (a - a.transpose()).cwiseAbs().maxCoeff() != 0.0)
                throw InputError("coupling must be real symmetric");
        }
    };
    check(coupling_alpha, geometry.m_p + (include_first_mode ? 1 : 0));
    check(coupling_beta, geometry.p >= 1 ? geometry.m_pm1 : 0);
}

double ModelManifold::warp_at(double x) const { return Warp(*this)(x); }

double ModelManifold::density(ScatteringSector s, double x) const {
    const double e = s == ScatteringSector::alpha ? double(geometry.n - 1 - 2 * geometry.p)
                                                  : double(geometry.n + 1 - 2 * geometry.p);
    return std::pow(warp_at(x), e);
}

SectorOrder sector_order(const CuspGeometry& g, ScatteringSector s) {
    const ResolventSector r = s == ScatteringSector::alpha ? alpha_sector(g) : beta_sector(g);
    return {r.order, r.weight};
}

double default_matching_radius(cplx z) {
    const cplx l = std::exp(0.5 * z);
    double x = 30.0 / std::abs(l);
    const double il = std::abs(l.imag());
    if (il > 0.0) x = std::min(x, 1.0 + std::log(1e4) / (2.0 * il));
    return std::max(x, 1.0);
}

ScatteringMatrix scattering_matrix(const ModelManifold& mm, cplx z, ScatteringSector sector,
                                   const ScatteringOptions& opt) {
    const Matching mt = build_matching(mm, z, sector, opt);
    const int m = mt.st.m, n = m + mt.st.k;
    ScatteringMatrix out;
    out.z = z;
    out.p = mm.geometry.p;
    out.sector = sector;
    out.x_match = mt.x_match;
    out.matching = mt.M;
    out.condition = matching_condition(mt);
    if (!(out.condition > pole_threshold(opt))) throw ScatteringPoleError("scattering matrix evaluated at a resonance");
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, m);
    rhs.topRows(m).setIdentity();
    const Eigen::MatrixXcd c = mt.M.fullPivLu().solve(rhs);
    out.C = mt.B * c;
    if (mt.st.k == 1) out.mode_amplitude = mt.left_one.row(n - 1) * c / mt.mode_p;
    if (!out.C.allFinite()) throw ScatteringPoleError("non-finite scattering matrix");
    return out;
}

EigenformExpansion solve_generalized_eigenform(const ModelManifold& mm, cplx z, int column, ScatteringSector sector,
                                               const ScatteringOptions& opt) {
    const int m = mm.channels(sector);
    if (column < 0 || column >= m) throw InputError("column out of range");
    const ScatteringMatrix sm = scattering_matrix(mm, z, sector, opt);
    EigenformExpansion e;
    e.column = column;
    e.incoming = Eigen::VectorXcd::Unit(m, column);
    e.outgoing = sm.C.col(column);
    e.x_match = sm.x_match;
    if (sm.mode_amplitude.size() > 0) e.mode_amplitude = sm.mode_amplitude(column);
    return e;
}

ScatteringCache::ScatteringCache(ModelManifold mm, ScatteringOptions opt) : mm_(std::move(mm)), opt_(opt) {
    mm_.validate();
}

ScatteringMatrix ScatteringCache::get(cplx z, ScatteringSector sector) {
    const auto key = std::make_tuple(z.real(), z.imag(), int(sector));
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    ScatteringMatrix sm = scattering_matrix(mm_, z, sector, opt_);
    std::lock_guard<std::mutex> lock(mu_);
    cache_[key] = sm;
    return sm;
}

std::size_t ScatteringCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
}

cplx bare_cusp_coefficient(double order, cplx z, double r) {
    check_z(z);
    const cplx h1 = hankel(1, order, z, r);
    if (std::abs(h1) == 0.0) throw PoleError("bare cusp coefficient at a resonance");
    return -hankel(2, order, z, r) / h1;
}

Eigen::MatrixXcd dynamical_matrix(const ModelManifold& mm, cplx z, const ScatteringOptions& opt) {
    mm.validate();
    const int ma = mm.channels(ScatteringSector::alpha), mb = mm.channels(ScatteringSector::beta);
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(ma + mb, ma + mb);
    int at = 0;
    for (auto sec : {ScatteringSector::alpha, ScatteringSector::beta}) {
        const int m = mm.channels(sec);
        if (m == 0) continue;
        const double order = sector_order(mm.geometry, sec).order;
        const cplx f = -hankel(1, order, z, 1.0) / hankel(2, order, z, 1.0);
        s.block(at, at, m, m) = f * scattering_matrix(mm, z, sec, opt).C;
        at += m;
    }
    return s;
}

UnitarityReport check_unitarity(const ModelManifold& mm, cplx z, ScatteringSector sector,
                                const ScatteringOptions& opt) {
    const Eigen::MatrixXcd cz = scattering_matrix(mm, z, sector, opt).C;
    const Eigen::MatrixXcd cb = scattering_matrix(mm, std::conj(z), sector, opt).C;
    const auto id = Eigen::MatrixXcd::Identity(cz.rows(), cz.cols());
    UnitarityReport r;
    r.unitarity = op_norm(cb.adjoint() * cz - id);
    r.conjugation = op_norm(cb.conjugate() * cz - id);
    r.symmetry = op_norm(cz - cz.transpose());
    return r;
}

FunctionalEquationReport check_functional_equation(const ModelManifold& mm, cplx z, ScatteringSector sector,
                                                   const ScatteringOptions& opt) {
    const double b = sector_order(mm.geometry, sector).order;
    const Eigen::MatrixXcd c0 = scattering_matrix(mm, z, sector, opt).C;
    const Eigen::MatrixXcd c1 = scattering_matrix(mm, z - cplx(0, 2.0 * kPi), sector, opt).C;
    const auto id = Eigen::MatrixXcd::Identity(c0.rows(), c0.cols());
    const cplx ph = std::exp(cplx(0, 2.0 * kPi * b));
    FunctionalEquationReport r;
    r.defect = op_norm(((1.0 + ph) * id - c0) * c1 - ph * id);
    if (std::abs(ph + 1.0) < 1e-12) r.cylinder_defect = op_norm(c0 * c1 - id);
    return r;
}

ModelManifold hodge_dual(const ModelManifold& mm, const Eigen::MatrixXd& star) {
    mm.validate();
    const auto& g = mm.geometry;
    if (2 * g.p > g.n - 1) throw InputError("Hodge commutation needs p <= (n-1)/2");
    if (mm.include_first_mode) throw InputError("Hodge commutation acts on harmonic channels only");
    if (star.rows() != g.m_p || star.cols() != g.m_p) throw InputError("star must be m_p square");
    if ((star.transpose() * star - Eigen::MatrixXd::Identity(g.m_p, g.m_p)).cwiseAbs().maxCoeff() > 1e-12)
        throw InputError("star must be orthogonal");
    ModelManifold d = mm;
    d.geometry.p = g.n - g.p;
    d.geometry.m_pm1 = g.m_p;
    d.geometry.m_p = g.p >= 1 ? g.m_pm1 : 0;
    d.coupling_alpha = CouplingSpec{};
    d.coupling_beta = mm.coupling_alpha;
    for (auto& a : d.coupling_beta.coeffs) {
        const Eigen::MatrixXd r = star * a * star.transpose();
        a = 0.5 * (r + r.transpose());
    }
    return d;
}

double check_hodge_commutation(const ModelManifold& mm, const ModelManifold& dual, const Eigen::MatrixXd& star,
                               cplx z, const ScatteringOptions& opt) {
    const auto& g = mm.geometry;
    if (2 * g.p > g.n - 1) throw InputError("Hodge commutation needs p <= (n-1)/2");
    if (dual.geometry.p != g.n - g.p || dual.geometry.n != g.n) throw InputError("dual model has the wrong degree");
    if (star.rows() != g.m_p || star.cols() != g.m_p) throw InputError("star must be m_p square");
    const Eigen::MatrixXcd c = scattering_matrix(mm, z, ScatteringSector::alpha, opt).C;
    const Eigen::MatrixXcd cd = scattering_matrix(dual, z, ScatteringSector::beta, opt).C;
    const cplx ph = std::exp(cplx(0, 2.0 * kPi * g.b(g.p)));
    const Eigen::MatrixXcd s = star.cast<cplx>();
    return op_norm(s * c - ph * cd * s);
}

cplx matching_determinant(const ModelManifold& mm, cplx z, ScatteringSector sector, const ScatteringOptions& opt) {
    const Matching mt = build_matching(mm, z, sector, opt);
    const cplx l = std::exp(0.5 * z);
    return mt.M.determinant() * std::exp(double(mt.st.m) * (0.25 * z - cplx(0, 1) * l));
}

PoleSearch find_resonances(const ModelManifold& mm, const Rect& region, ScatteringSector sector,
                           const ZeroSearchOptions& zopt, const ScatteringOptions& opt) {
    mm.validate();
    auto f = [&](cplx z) { return matching_determinant(mm, z, sector, opt); };
    auto df = [&](cplx z) {
        const double h = 1e-3;
        const cplx ih(0, h);
        return (f(z + h) - f(z - h) - cplx(0, 1) * (f(z + ih) - f(z - ih))) / (4.0 * h);
    };
    const auto res = find_zeros(f, df, region, zopt);
    PoleSearch out;
    out.winding = res.winding;
    for (auto p : res.zeros) {
        if (!region.contains(p.z)) continue;
        p.residual = std::abs(f(p.z));
        out.poles.push_back(p);
    }
    int count = 0;
    for (const auto& p : out.poles) count += p.multiplicity;
    if (!res.complete || count != out.winding)
        throw IncompletePoleSearchError("resonance count differs from the winding number", out);
    return out;
}

ResidueReport resonance_residue(const ModelManifold& mm, cplx z0, double radius, int nodes, ScatteringSector sector,
                                const ScatteringOptions& opt) {
    if (!(radius > 0.0) || nodes < 8) throw InputError("need a positive radius and at least 8 nodes");
    const int m = mm.channels(sector);
    std::vector<Eigen::MatrixXcd> cs(static_cast<std::size_t>(nodes));
    // a fixed matching radius keeps every node on the same discretization
    ScatteringOptions o = opt;
    if (o.x_match == 0.0) o.x_match = default_matching_radius(z0);
    parallel_for(std::size_t(nodes), [&](std::size_t k) {
        const cplx dz = radius * std::exp(cplx(0, 2.0 * kPi * double(k) / nodes));
        cs[k] = scattering_matrix(mm, z0 + dz, sector, o).C;
    });
    ResidueReport r;
    r.residue = Eigen::MatrixXcd::Zero(m, m);
    Eigen::MatrixXcd second = Eigen::MatrixXcd::Zero(m, m);
    for (int k = 0; k < nodes; ++k) {
        const cplx dz = radius * std::exp(cplx(0, 2.0 * kPi * double(k) / nodes));
        r.residue += cs[std::size_t(k)] * dz;
        second += cs[std::size_t(k)] * dz * dz;
    }
    r.residue /= double(nodes);
    second /= double(nodes);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r.residue);
    r.singular_values = svd.singularValues();
    r.rank_ratio = m > 1 && r.singular_values(0) > 0.0 ? r.singular_values(1) / r.singular_values(0) : 0.0;
    r.simple = second.norm() <= 1e-6 * radius * r.residue.norm();
    return r;
}

TailReport tail_decay_check(const ModelManifold& mm, cplx z, const ScatteringOptions& opt) {
    if (!mm.include_first_mode) throw InputError("tail check needs the first non-harmonic mode");
    const ScatteringMatrix sm = scattering_matrix(mm, z, ScatteringSector::alpha, opt);
    const Setup st = make_setup(mm, ScatteringSector::alpha);
    const double a = mm.geometry.a, nu = std::sqrt(st.mu1);
    TailReport r;
    r.required = 0.95 * nu / (a + 1.0);
    r.amplitude = sm.mode_amplitude(0);
    // window ends where the model envelope reaches e^{-300}
    const double x300 = std::pow(300.0 * (a + 1.0) / nu, 1.0 / (a + 1.0));
    r.x_hi = std::max(2.0, std::min(sm.x_match, x300));
    r.x_lo = 0.5 * r.x_hi;
    if (r.amplitude == 0.0) {
        r.below_noise = true;
        r.passed = true;
        return r;
    }
    const int n = 64;
    for (int i = 0; i < n; ++i) r.x.push_back(r.x_lo + (r.x_hi - r.x_lo) * i / (n - 1));
    const ModeSolution ms = mode_solution(mm, st, z, r.x, opt.tol);
    const double pw = mm.geometry.b(mm.geometry.p - 1) - 0.5;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, top = -1e300;
    for (int i = 0; i < n; ++i) {
        const double la = std::log(std::abs(r.amplitude)) + ms.log_abs[std::size_t(i)];
        r.log_abs.push_back(la);
        top = std::max(top, la);
        const double X = std::pow(r.x[std::size_t(i)], a + 1.0);
        const double Y = la - pw * std::log(r.x[std::size_t(i)]);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
    }
    if (top < std::log(1e-280)) {
        r.below_noise = true;
        r.passed = true;
        return r;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    r.kappa = -slope;
    r.log_constant = (sy - slope * sx) / n;
    r.passed = r.kappa >= r.required;
    return r;
}

EigenformProfile eigenform_profile(const ModelManifold& mm, cplx z, int column, int points, ScatteringSector sector,
                                   const ScatteringOptions& opt) {
    if (points < 2) throw InputError("need at least two profile points");
    const Matching mt = build_matching(mm, z, sector, opt);
    const Setup& st = mt.st;
    const int m = st.m, n = m + st.k;
    if (column < 0 || column >= m) throw InputError("column out of range");
    if (!(matching_condition(mt) > pole_threshold(opt)))
        throw ScatteringPoleError("eigenform evaluated at a resonance");
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, 1);
    rhs(column, 0) = 1.0;
    Eigen::MatrixXcd y = mt.left_init * mt.M.fullPivLu().solve(rhs);

    const Warp warp(mm);
    const cplx u = std::exp(z);
    const double a = mm.geometry.a;
    EigenformProfile out;
    auto record = [&](double x, const Eigen::MatrixXcd& v) {
        const double rho = x < 1.0 ? std::pow(warp(x), st.exponent) : std::pow(x, -a * st.exponent);
        Eigen::VectorXcd c = v.col(0).head(m);
        if (st.sector == ScatteringSector::beta) c /= rho;
        out.x.push_back(x);
        out.values.push_back(c);
    };
    double x = mm.x0;
    bool on_cusp = false;
    State harm(std::size_t(2 * m));
    auto cusp_rhs = [&](const State& v, State& dv, double t) {
        const CuspCoeffs c = cusp_coeffs(st, a, t);
        const cplx g = cusp_g(st, c, u, 0.0);
        for (int k = 0; k < m; ++k) {
            dv[std::size_t(k)] = c.k * v[std::size_t(m + k)];
            dv[std::size_t(m + k)] = g * v[std::size_t(k)];
        }
    };
    for (int i = 0; i < points; ++i) {
        const double xi = i == points - 1 ? mt.x_match : mm.x0 + (mt.x_match - mm.x0) * i / (points - 1);
        if (xi <= 1.0) {
            propagate_interior(mm, st, warp, u, y, x, xi, opt.tol);
            x = xi;
            record(x, y);
            continue;
        }
        if (!on_cusp) {
            propagate_interior(mm, st, warp, u, y, x, 1.0, opt.tol);
            x = 1.0;
            for (int k = 0; k < m; ++k) {
                harm[std::size_t(k)] = y(k, 0);
                harm[std::size_t(m + k)] = y(n + k, 0);
            }
            on_cusp = true;
        }
        propagate(cusp_rhs, harm, x, xi, opt.tol);
        x = xi;
        Eigen::MatrixXcd v(2 * m, 1);
        for (int k = 0; k < 2 * m; ++k) v(k, 0) = harm[std::size_t(k)];
        record(x, v);
    }
    return out;
}

double gluing_cutoff(int which, double s) {
    switch (which) {
        case 1: return smooth_step(s, 0.5, 0.625);
        case 2: return smooth_step(s, 0.75, 0.875);
        case 5: return smooth_step(s, 0.125, 0.25);
        default: throw InputError("cutoff index must be 1, 2 or 5");
    }
}

GluingReport gluing_parametrix_check(const ModelManifold& mm, double im_u, const GluingOptions& opt) {
    mm.validate();
    if (mm.channels(ScatteringSector::alpha) != 1 || mm.include_first_mode)
        throw InputError("gluing check uses a single harmonic channel");
    if (mm.inner_bc != InnerBC::dirichlet) throw InputError("gluing check uses a Dirichlet inner boundary");
    if (!(im_u > 0.0)) throw DomainError("gluing check needs Im exp(z) > 0");
    if (!(opt.x_end > 2.0) || !(opt.h > 0.0)) throw InputError("gluing grid needs x_end > 2 and h > 0");
    const Setup st = make_setup(mm, ScatteringSector::alpha);
    const Warp warp(mm);
    const double x0 = mm.x0, width = 2.0 - x0;
    const int cells = int(std::lround((opt.x_end - x0) / opt.h));
    const double h = (opt.x_end - x0) / cells;
    const int N = cells - 1;  // interior nodes
    auto xat = [&](int i) { return x0 + (i + 1) * h; };
    auto sat = [&](int i) { return (xat(i) - x0) / width; };
    auto rho = [&](double x) { return x < 1.0 ? std::pow(warp(x), st.exponent) : std::pow(x, -mm.geometry.a * st.exponent); };

    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        const double x = xat(i), r = rho(x), rl = rho(x - 0.5 * h), rr = rho(x + 0.5 * h);
        D(i, i) = (rl + rr) / (r * h * h) + mm.coupling_alpha.at(x, 1)(0, 0);
        if (i > 0) D(i, i - 1) = -rl / (r * h * h);
        if (i + 1 < N) D(i, i + 1) = -rr / (r * h * h);
    }
    const cplx u(opt.re_u, im_u);
    Eigen::VectorXd c1(N), c2(N), c3(N), c4(N), s(N);
    for (int i = 0; i < N; ++i) {
        s(i) = sat(i);
        c1(i) = gluing_cutoff(1, s(i));
        c2(i) = gluing_cutoff(2, s(i));
        c3(i) = 1.0 - c1(i);
        c4(i) = 1.0 - gluing_cutoff(5, s(i));
    }
    // Dirichlet at s = 1 for the interior piece, at s = 1/16 for the cusp piece
    int end0 = 0;
    while (end0 < N && s(end0) < 1.0 - 1e-12) ++end0;
    int beg_c = 0;
    while (beg_c < N && s(beg_c) <= 1.0 / 16.0 + 1e-12) ++beg_c;
    const Eigen::MatrixXcd Du = D - u * Eigen::MatrixXcd::Identity(N, N);
    Eigen::MatrixXcd R0 = Eigen::MatrixXcd::Zero(N, N), Rc = Eigen::MatrixXcd::Zero(N, N);
    R0.topLeftCorner(end0, end0) = Du.topLeftCorner(end0, end0).partialPivLu().inverse();
    const int nc = N - beg_c;
    Rc.bottomRightCorner(nc, nc) = Du.bottomRightCorner(nc, nc).partialPivLu().inverse();

    const Eigen::MatrixXcd Q = c1.asDiagonal() * R0 * c2.asDiagonal() + c3.asDiagonal() * Rc * c4.asDiagonal();
    const Eigen::MatrixXcd T = Q * Du - Eigen::MatrixXcd::Identity(N, N);
    const Eigen::MatrixXcd comm2 = c2.asDiagonal() * D - D * c2.asDiagonal();
    const Eigen::MatrixXcd comm4 = c4.asDiagonal() * D - D * c4.asDiagonal();
    const Eigen::MatrixXcd Tc = c1.asDiagonal() * R0 * comm2 + c3.asDiagonal() * Rc * comm4;

    GluingReport r;
    r.im_u = im_u;
    r.nodes = N;
    r.formula_defect = (T - Tc).cwiseAbs().maxCoeff();
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (std::abs(s(i) - s(j)) <= 1.0 / 16.0) r.diagonal_band_max = std::max(r.diagonal_band_max, std::abs(Tc(i, j)));

    // operator norm on the space with weight exp(x^2) rho h (WeightSign::minus)
    Eigen::VectorXd w(N);
    for (int i = 0; i < N; ++i) w(i) = std::exp(0.5 * xat(i) * xat(i)) * std::sqrt(rho(xat(i)) * h);
    const Eigen::MatrixXcd Tw = w.asDiagonal() * Tc * w.cwiseInverse().asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(Tw);
    r.t_norm = svd.singularValues()(0);
    r.t_norm_scaled = r.t_norm * im_u;
    r.neumann_converges = r.t_norm < 1.0;

    const Eigen::MatrixXcd glued = (Eigen::MatrixXcd::Identity(N, N) + Tc).partialPivLu().solve(Q);
    const Eigen::MatrixXcd direct = Du.partialPivLu().inverse();
    r.glued_vs_direct = (glued - direct).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff();
    return r;
}

}  // namespace gcusp
