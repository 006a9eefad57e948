"""Reference values for the cusp resolvent tests.

Hankel and cylinder functions on the cover come from ascending series with
log w = z/2 + log x kept unreduced; integer orders are replaced by the order
b + 1e-40 at 90 digits. Zeros are located by seeded secant iteration on a
grid and then filtered to the test rectangles.
Writes cusp_resolvent_oracle.hpp next to this script.
"""

import os
import mpmath as mp

mp.mp.dps = 30


def j_cover(nu, log_w, terms=400):
    w = mp.exp(log_w)
    q = -(w * w) / 4
    t = 1 / mp.gamma(nu + 1)
    s = mp.mpf(0)
    for k in range(terms):
        if k > 0:
            t = t * q / (k * (k + nu))
        s += t
        if k > 10 and abs(t) < mp.mpf(10) ** (-mp.mp.dps) * abs(s):
            break
    return mp.exp(nu * (log_w - mp.log(2))) * s


def jy_cover(nu, log_w):
    if abs(nu - round(nu)) < 1e-9:
        with mp.workdps(90):
            n = mp.mpf(round(nu)) + mp.mpf(10) ** -40
            j, y = jy_cover_raw(n, mp.mpc(log_w))
        return +j, +y
    return jy_cover_raw(mp.mpf(nu), log_w)


def jy_cover_raw(nu, log_w):
    j = j_cover(nu, log_w)
    jm = j_cover(-nu, log_w)
    return j, (j * mp.cospi(nu) - jm) / mp.sinpi(nu)


def h1(nu, z, x=1):
    j, y = jy_cover(nu, z / 2 + mp.log(x))
    return j + 1j * y


def g_cyl(nu, z, x):
    j1, y1 = jy_cover(nu, z / 2)
    jx, yx = jy_cover(nu, z / 2 + mp.log(x))
    return y1 * jx - j1 * yx


def kernel(nu, z, x, t):
    lo, hi = min(x, t), max(x, t)
    return mp.pi * mp.sqrt(x * t) / (2 * h1(nu, z)) * g_cyl(nu, z, lo) * h1(nu, z, hi)


def zeros(nu, re0, re1, im0, im1):
    found = []
    re = re0 - 0.25
    while re <= re1 + 0.25:
        im = im0 - 0.25
        while im <= im1 + 0.25:
            try:
                r = mp.findroot(lambda z: h1(nu, z), mp.mpc(re, im))
                if re0 < r.real < re1 and im0 < r.imag < im1 and all(abs(r - f) > 1e-8 for f in found):
                    found.append(r)
            except (ValueError, ZeroDivisionError):
                pass
            im += 0.5
        re += 0.5
    return sorted(found, key=lambda r: (float(r.real), float(r.imag)))


def c(v):
    v = mp.mpc(v)
    return "{%s, %s}" % (mp.nstr(v.real, 20, min_fixed=-1, max_fixed=-1),
                         mp.nstr(v.imag, 20, min_fixed=-1, max_fixed=-1))


def r(v):
    return mp.nstr(mp.mpf(v), 20, min_fixed=-1, max_fixed=-1)


RECTS = [(-2.0, 6.0, -5.9, -0.1), (-2.0, 4.0, -12.3, -6.35)]
ORDERS = [0.0, 0.75, 1.0, 1.7, 2.5, 3.2]


def main():
    out = ["#pragma once\n// Generated by gen_cusp_resolvent.py; do not edit.\n",
           "#include <complex>\n\nnamespace oracle {\n",
           "struct KernelRow { double b; std::complex<double> z; double x; double t; "
           "std::complex<double> r; };\n"]
    rows = []
    for b, z, x, t in [(1, mp.mpc(0.5, 0.9), 1.5, 2.5), (1, mp.mpc(0.3, 1.2), 2, 5),
                       (0.75, mp.mpc(0.2, -1.0), 1.3, 3.0), (2.5, mp.mpc(1.0, -2.5), 2, 2),
                       (1.7, mp.mpc(-0.5, -8), 1.2, 1.9), (0, mp.mpc(0.4, 3), 1.1, 4),
                       (-0.4, mp.mpc(0.1, 4.5), 1.6, 1.25)]:
        v = kernel(b, z, mp.mpf(x), mp.mpf(t))
        rows.append("  {%s, %s, %s, %s, %s}" % (r(b), c(z), r(x), r(t), c(v)))
    out.append("inline const KernelRow kKernel[] = {\n" + ",\n".join(rows) + "\n};\n")

    out.append("struct DensityRow { double b; double u0; double x; double t; double density; };\n")
    rows = []
    for b, u0, x, t in [(1, 2, 1.5, 2.5), (0.5, 0.7, 1.2, 3.0), (2, 5, 2.0, 1.4)]:
        l = mp.sqrt(u0)
        def g(y):
            return mp.bessely(b, l) * mp.besselj(b, l * y) - mp.besselj(b, l) * mp.bessely(b, l * y)
        d = g(x) * g(t) / (2 * (mp.besselj(b, l) ** 2 + mp.bessely(b, l) ** 2))
        rows.append("  {%s, %s, %s, %s, %s}" % (r(b), r(u0), r(x), r(t), r(d)))
    out.append("inline const DensityRow kDensity[] = {\n" + ",\n".join(rows) + "\n};\n")

    out.append("struct PoleRect { double re0, re1, im0, im1; };\n")
    out.append("inline const PoleRect kPoleRects[] = {\n" +
               ",\n".join("  {%s, %s, %s, %s}" % tuple(r(v) for v in q) for q in RECTS) + "\n};\n")
    out.append("struct PoleRow { double b; int rect; std::complex<double> z; };\n")
    rows = []
    for b in ORDERS:
        for i, q in enumerate(RECTS):
            for zz in zeros(b, *q):
                rows.append("  {%s, %d, %s}" % (r(b), i, c(zz)))
    out.append("inline const PoleRow kPoles[] = {\n" + ",\n".join(rows) + "\n};\n")
    out.append("inline constexpr double kPoleOrders[] = {%s};\n" % ", ".join(r(b) for b in ORDERS))
    out.append("}  // namespace oracle\n")
    path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "cusp_resolvent_oracle.hpp")
    with open(path, "w") as fh:
        fh.write("\n".join(out))


if __name__ == "__main__":
    main()
