#pragma once

// Non-harmonic mode pairs (w, v) on the cusp: effective potentials, the
// first-order system Y' = F Y with Y = (w, v, w', v'), its diagonalizer, the
// finite-difference mode operator with Dirichlet ends, and decay rates of
// solutions in the variable t = x^{a+1} / (a+1).

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "gcusp/cusp_resolvent.hpp"

namespace gcusp {

enum class ModeSector { V, W };

struct ModeSystem {
    CuspGeometry geometry;
    double nu = 1.0;  // square root of the cross-section eigenvalue
    ModeSector sector = ModeSector::V;
    double x_max = 10.0;
    double h = 0.01;  // finite-difference step on [1, x_max]

    void validate() const;
};

struct Potentials {
    cplx P;
    cplx R;
    double q;
};

/// P = x^{2a} nu^2 + g_p (g_p + 2) / (4x^2) - e^z, R likewise with
/// g_{p-1} (g_{p-1} - 2), q = 2 a nu x^{a-1} (V) or 0 (W).
Potentials effective_potentials(const ModeSystem& ms, double x, cplx z);

using Matrix4 = Eigen::Matrix<cplx, 4, 4>;

/// F = [[0, I], [T, 0]], T = [[P, q], [q, R]].
Matrix4 f_matrix(const Potentials& p);

/// (+r1, -r1, +r2, -r2), r = sqrt((P + R +- sqrt((P - R)^2 + 4 q^2)) / 2), principal roots.
std::array<cplx, 4> f_matrix_eigenvalues(cplx P, cplx R, double q);

/// Columns are eigenvectors of F in the order of f_matrix_eigenvalues:
/// (1, (l^2 - P)/q, l, l (l^2 - P)/q); unit vectors in the decoupled case q = 0.
Matrix4 diagonalizer(const Potentials& p);

/// || S^{-1} S' ||_HS / x^a with S' by central differences.
double diagonalizer_remainder(const ModeSystem& ms, double x, cplx z);

/// Symmetric band matrix in LAPACK upper band storage (kd = 2), unknowns
/// interleaved as (w_1, v_1, w_2, v_2, ...) at interior nodes.
struct BandMatrix {
    int n = 0;
    int kd = 2;
    std::vector<double> ab;  // (kd + 1) x n, column major
    double operator()(int i, int j) const;
    Eigen::MatrixXd dense() const;
};

/// Finite-difference mode operator (second order, uniform step, Dirichlet at 1 and x_max).
BandMatrix assemble_mode_operator(const ModeSystem& ms);

/// Lowest `count` eigenvalues of a band matrix by inertia bisection.
std::vector<double> band_eigenvalues(const BandMatrix& m, int count);

struct ModeEigenvalue {
    double value;           // Richardson extrapolation of steps h and h/2
    double error_estimate;  // |extrapolated - finest|
    bool reliable;          // confining potential at x_max exceeds 10 x value
};

/// Lowest `count` eigenvalues. Entries beyond the reliable window are
/// returned with reliable = false.
std::vector<ModeEigenvalue> discrete_spectrum(const ModeSystem& ms, int count);

/// Smallest x_max with nu^2 x_max^{2a} >= 10 * lambda_max.
double confinement_radius(double a, double nu, double lambda_max);

struct PerronReport {
    double t_min = 0, t_max = 0;  // fit window in t
    double decay_rate = 0;        // slope of log|Y| against t, decaying solution
    double growth_rate = 0;
    double decay_deviation = 0;   // |rate + nu| / nu
    double growth_deviation = 0;  // |rate - nu| / nu
    double eigen_ratio_defect = 0;  // max_j |Re l_j / (+-nu x^a) - 1| at the fit end
    double tail_constant = 0;       // sup |Y| exp((nu - eps (a+1)) t), |Y(1)| = 1, eps = 0.05 nu
    bool tail_bounded = false;      // the sup is not attained in the last tenth of the window
    std::vector<double> t;          // samples of the decaying solution
    std::vector<double> log_norm;
    std::string warning;
};

/// Decay and growth rates of solutions of Y' = F Y at spectral parameter e^z.
/// The decaying solution is integrated inwards from beyond the window, the
/// growing one outwards from x = 1; log|Y| is tracked with renormalization.
PerronReport perron_decay_check(const ModeSystem& ms, cplx z, double t_max = 0.0);

}  // namespace gcusp
