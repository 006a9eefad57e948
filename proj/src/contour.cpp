#include "gcusp/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gcusp/errors.hpp"

namespace gcusp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct EdgeState {
    double total = 0.0;
    double min_abs = 1e300;
    double max_abs = 0.0;
};

void walk(const HoloFn& f, cplx a, cplx fa, cplx b, cplx fb, const ZeroSearchOptions& opt, EdgeState& st,
          int depth) {
    const double step = std::arg(fb / fa);
    // a large modulus change signals a large |f'/f|, hence possibly a hidden rotation
    const double dmod = std::abs(std::log(std::abs(fb) / std::abs(fa)));
    const bool coarse = std::abs(step) > opt.max_arg_step || dmod > opt.max_arg_step || depth < 4;
    if (coarse && std::abs(b - a) > opt.min_boundary_step &&
        depth < 60) {
        const cplx m = 0.5 * (a + b);
        const cplx fm = f(m);
        const double am = std::abs(fm);
        st.min_abs = std::min(st.min_abs, am);
        st.max_abs = std::max(st.max_abs, am);
        if (!(am > 0.0) || !std::isfinite(am)) throw RegimeError("function vanishes or overflows on contour");
        walk(f, a, fa, m, fm, opt, st, depth + 1);
        walk(f, m, fm, b, fb, opt, st, depth + 1);
        return;
    }
    if (std::abs(step) > opt.max_arg_step) throw RegimeError("zero too close to contour");
    st.total += step;
}

double mid_split(double lo, double hi, int attempt) {
    static const double fr[] = {0.5, 0.4871, 0.5213, 0.4637, 0.5419, 0.4411};
    return lo + (hi - lo) * fr[attempt % 6];
}

struct Searcher {
    const HoloFn& f;
    const HoloFn& fp;
    const ZeroSearchOptions& opt;
    std::vector<ZeroReport> found;

    // Winding of a cell, or nullopt if the boundary passes too near a zero.
    std::optional<int> safe_winding(const Rect& r) {
        try {
            return winding_number(f, r, opt);
        } catch (const RegimeError&) {
            return std::nullopt;
        }
    }

    void add(ZeroReport z) {
        for (const auto& e : found)
            if (std::abs(e.z - z.z) < opt.dedupe * (1.0 + std::abs(z.z))) return;
        found.push_back(z);
    }

    bool try_newton(const Rect& r, int n) {
        const cplx c(0.5 * (r.re0 + r.re1), 0.5 * (r.im0 + r.im1));
        const double h = 0.25 * std::max(r.re1 - r.re0, r.im1 - r.im0);
        const cplx seeds[] = {c, c + cplx(h, h), c - cplx(h, -h), c + cplx(-h, -h), c + cplx(h, -h)};
        for (cplx s : seeds) {
            try {
                ZeroReport z = newton_refine(f, fp, s, opt);
                if (z.newton_iters < 0 || !r.contains(z.z)) continue;
                z.winding = n;
                add(z);
                return true;
            } catch (const Error&) {
            }
        }
        return false;
    }

    void search(const Rect& r, int n, int depth) {
        if (n <= 0) return;
        const double size = std::max(r.re1 - r.re0, r.im1 - r.im0);
        if (n == 1 && try_newton(r, n)) return;
        if (size < opt.min_cell || depth > 40) {
            // cell too small to separate: report a (possibly multiple) candidate
            const cplx c(0.5 * (r.re0 + r.re1), 0.5 * (r.im0 + r.im1));
            ZeroReport z;
            try {
                z = newton_refine(f, fp, c, opt);
            } catch (const Error&) {
                z.z = c;
                z.residual = std::abs(f(c));
                z.newton_iters = -1;
            }
            z.winding = n;
            z.multiplicity = n;
            found.push_back(z);
            return;
        }
        for (int attempt = 0; attempt < 6; ++attempt) {
            const double xm = mid_split(r.re0, r.re1, attempt);
            const double ym = mid_split(r.im0, r.im1, attempt + 1);
            const Rect q[4] = {{r.re0, xm, r.im0, ym}, {xm, r.re1, r.im0, ym},
                               {r.re0, xm, ym, r.im1}, {xm, r.re1, ym, r.im1}};
            int w[4];
            bool ok = true;
            int sum = 0;
            for (int i = 0; i < 4 && ok; ++i) {
                const auto wi = safe_winding(q[i]);
                if (!wi || *wi < 0) ok = false;
                else sum += (w[i] = *wi);
            }
            if (!ok || sum != n) continue;
            for (int i = 0; i < 4; ++i) search(q[i], w[i], depth + 1);
            return;
        }
        throw IncompleteSearchError("could not subdivide a cell without crossing a zero");
    }
};

}  // namespace

bool Rect::contains(cplx z, double margin) const {
    return z.real() >= re0 - margin && z.real() <= re1 + margin && z.imag() >= im0 - margin &&
           z.imag() <= im1 + margin;
}

int winding_number(const HoloFn& f, const Rect& r, const ZeroSearchOptions& opt) {
    if (!(r.re1 > r.re0) || !(r.im1 > r.im0)) throw InputError("degenerate rectangle");
    const cplx c[4] = {{r.re0, r.im0}, {r.re1, r.im0}, {r.re1, r.im1}, {r.re0, r.im1}};
    cplx fc[4];
    for (int i = 0; i < 4; ++i) {
        fc[i] = f(c[i]);
        if (!(std::abs(fc[i]) > 0.0) || !std::isfinite(std::abs(fc[i])))
            throw RegimeError("function vanishes or overflows at a corner");
    }
    EdgeState st;
    for (int i = 0; i < 4; ++i) walk(f, c[i], fc[i], c[(i + 1) % 4], fc[(i + 1) % 4], opt, st, 0);
    const double w = st.total / kTwoPi;
    const double rw = std::round(w);
    if (std::abs(w - rw) > 1e-6) throw RegimeError("winding number not close to an integer");
    return static_cast<int>(rw);
}

ZeroReport newton_refine(const HoloFn& f, const HoloFn& fprime, cplx z0, const ZeroSearchOptions& opt) {
    cplx z = z0;
    ZeroReport rep;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_newton; ++it) {
        const cplx v = f(z);
        cplx d;
        if (fprime) {
            d = fprime(z);
        } else {
            const double h = 1e-5 * (1.0 + std::abs(z));
            d = (f(z + h) - f(z - h)) / (2.0 * h);
        }
        if (!(std::abs(d) > 0.0) || !std::isfinite(std::abs(d))) throw AccuracyError("Newton derivative vanished");
        cplx step = v / d;
        const double cap = 0.5;
        if (std::abs(step) > cap) step *= cap / std::abs(step);
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw AccuracyError("Newton diverged");
        // converged, or stalled at the noise floor of f
        const bool stalled = std::abs(step) <= 1e-9 * (1.0 + std::abs(z)) && std::abs(step) > 0.5 * prev;
        prev = std::abs(step);
        if (stalled || std::abs(step) <= opt.newton_tol * (1.0 + std::abs(z))) {
            rep.z = z;
            rep.residual = std::abs(f(z));
            rep.newton_iters = it;
            return rep;
        }
    }
    throw AccuracyError("Newton did not converge");
}

ZeroSearchResult find_zeros(const HoloFn& f, const HoloFn& fprime, const Rect& r, const ZeroSearchOptions& opt) {
    ZeroSearchResult res;
    res.winding = winding_number(f, r, opt);
    Searcher s{f, fprime, opt, {}};
    s.search(r, res.winding, 0);
    res.zeros = std::move(s.found);
    std::sort(res.zeros.begin(), res.zeros.end(), [](const ZeroReport& a, const ZeroReport& b) {
        return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
    });
    int count = 0;
    for (const auto& z : res.zeros) count += z.multiplicity;
    res.complete = count == res.winding;
    return res;
}

}  // namespace gcusp
