#include "gcusp/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "gcusp/errors.hpp"

namespace gcusp {

namespace {

constexpr int kGaussOrder = 20;

struct GaussRule {
    std::vector<double> x;  // on [-1, 1]
    std::vector<double> w;
};

const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        using G = boost::math::quadrature::gauss<double, kGaussOrder>;
        GaussRule r;
        const auto& ab = G::abscissa();
        const auto& wt = G::weights();
        for (std::size_t i = ab.size(); i-- > 0;) {
            if (ab[i] == 0.0) continue;
            r.x.push_back(-ab[i]);
            r.w.push_back(wt[i]);
        }
        for (std::size_t i = 0; i < ab.size(); ++i) {
            r.x.push_back(ab[i]);
            r.w.push_back(wt[i]);
        }
        return r;
    }();
    return rule;
}

}  // namespace

QuadratureGrid gauss_legendre_panels(const std::vector<double>& breaks) {
    if (breaks.size() < 2) throw InputError("need at least two panel breaks");
    const GaussRule& g = gauss_rule();
    QuadratureGrid q;
    q.nodes.reserve((breaks.size() - 1) * g.x.size());
    q.weights.reserve(q.nodes.capacity());
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p], b = breaks[p + 1];
        if (!(b > a)) throw InputError("panel breaks must be strictly increasing");
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            q.nodes.push_back(c + h * g.x[i]);
            q.weights.push_back(h * g.w[i]);
        }
    }
    return q;
}

QuadratureGrid gauss_legendre_uniform(double a, double b, double max_width) {
    if (!(b > a) || !(max_width > 0.0)) throw InputError("bad quadrature interval");
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / max_width));
    std::vector<double> breaks(n + 1);
    for (std::size_t i = 0; i <= n; ++i) breaks[i] = a + (b - a) * double(i) / double(n);
    breaks[n] = b;
    return gauss_legendre_panels(breaks);
}

QuadratureGrid simpson_uniform(double a, double b, std::size_t n) {
    if (n < 3 || n % 2 == 0) throw InputError("Simpson rule needs an odd node count >= 3");
    if (!(b > a)) throw InputError("bad quadrature interval");
    QuadratureGrid q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const double h = (b - a) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        q.nodes[i] = a + h * double(i);
        q.weights[i] = (i == 0 || i == n - 1) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    }
    q.nodes[n - 1] = b;
    return q;
}

std::vector<double> fd_weights(double x0, const double* x, int n, int m) {
    // Fornberg (1988)
    std::vector<double> c(static_cast<std::size_t>(n) * (m + 1), 0.0);
    auto C = [&](int i, int k) -> double& { return c[static_cast<std::size_t>(i) * (m + 1) + k]; };
    double c1 = 1.0, c4 = x[0] - x0;
    C(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
                C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
            C(j, 0) = c4 * C(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = C(i, m);
    return out;
}

std::vector<cplx> differentiate(const std::vector<double>& x, const std::vector<cplx>& f, int m) {
    const std::size_t n = x.size();
    if (f.size() != n) throw InputError("grid and values differ in length");
    if (n < 5) throw InputError("need at least five points for 5-point stencils");
    if (m < 1 || m > 2) throw InputError("derivative order must be 1 or 2");
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = i < 2 ? 0 : (i + 2 >= n ? n - 5 : i - 2);
        const auto w = fd_weights(x[i], x.data() + s, 5, m);
        cplx acc = 0.0;
        for (int k = 0; k < 5; ++k) acc += w[k] * f[s + k];
        out[i] = acc;
    }
    return out;
}

std::vector<cplx> interval_integrals(const std::vector<double>& x, const std::vector<cplx>& f) {
    const std::size_t n = x.size();
    if (f.size() != n) throw InputError("grid and values differ in length");
    if (n < 4) throw InputError("interval integrals need at least four points");
    // two-point Gauss rule is exact for the cubic interpolant on each interval
    const double g = 0.5 / std::sqrt(3.0);
    std::vector<cplx> out(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t s = i == 0 ? 0 : std::min(i - 1, n - 4);
        const double a = x[i], b = x[i + 1], h = b - a;
        if (!(h > 0.0)) throw InputError("grid must be strictly increasing");
        cplx piece = 0.0;
        for (double t : {0.5 - g, 0.5 + g}) {
            const auto w = fd_weights(a + t * h, x.data() + s, 4, 0);
            cplx v = 0.0;
            for (int k = 0; k < 4; ++k) v += w[k] * f[s + k];
            piece += 0.5 * h * v;
        }
        out[i] = piece;
    }
    return out;
}

std::vector<cplx> cumulative_integral(const std::vector<double>& x, const std::vector<cplx>& f) {
    const auto pieces = interval_integrals(x, f);
    std::vector<cplx> out(x.size(), 0.0);
    for (std::size_t i = 0; i < pieces.size(); ++i) out[i + 1] = out[i] + pieces[i];
    return out;
}

unsigned worker_count() {
    if (const char* env = std::getenv("GCUSP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace gcusp
