#pragma once

// Zeros of holomorphic functions in rectangles: argument-principle winding
// numbers on adaptively sampled boundaries, quadtree subdivision, Newton.

#include <functional>
#include <optional>
#include <vector>

#include "gcusp/numerics.hpp"

namespace gcusp {

struct Rect {
    double re0, re1, im0, im1;
    bool contains(cplx z, double margin = 0.0) const;
};

struct ZeroReport {
    cplx z;
    double residual = 0.0;  // |f(z)| or a caller-defined residual
    int newton_iters = 0;
    int winding = 0;         // winding of the cell that isolated the zero
    int multiplicity = 1;    // > 1 flags a non-simple candidate
};

struct ZeroSearchOptions {
    double min_cell = 1e-4;         // smallest cell edge before giving up on isolation
    double max_arg_step = 0.4;      // boundary refinement threshold (radians)
    double min_boundary_step = 1e-9;
    int max_newton = 60;
    double newton_tol = 1e-14;      // relative step size for convergence
    double dedupe = 1e-8;
};

struct ZeroSearchResult {
    std::vector<ZeroReport> zeros;  // sorted by Re z, then Im z
    int winding = 0;                // winding number of the region boundary
    bool complete = false;          // zeros.size() (with multiplicity) == winding
};

using HoloFn = std::function<cplx(cplx)>;

/// Winding number of f around the rectangle boundary (counterclockwise).
/// Throws RegimeError when f nearly vanishes on the boundary.
int winding_number(const HoloFn& f, const Rect& r, const ZeroSearchOptions& opt = {});

/// Newton iteration from z0; derivative by central differences when fprime is empty.
ZeroReport newton_refine(const HoloFn& f, const HoloFn& fprime, cplx z0, const ZeroSearchOptions& opt = {});

/// All zeros of f inside r.
ZeroSearchResult find_zeros(const HoloFn& f, const HoloFn& fprime, const Rect& r,
                            const ZeroSearchOptions& opt = {});

}  // namespace gcusp
