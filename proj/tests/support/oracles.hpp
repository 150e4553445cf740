#pragma once

// Test-side oracles, independent of the shooting/Green-function paths in
// the library: a dense finite-difference generalized eigenproblem solved by
// Sturm-sequence bisection, and a stencil-based ODE residual check.

#include <cmath>
#include <functional>
#include <vector>

#include "masslab/grid_function.hpp"
#include "masslab/problem_spec.hpp"

namespace oracles {

constexpr double kPi = 3.14159265358979323846;

// Second-order FD discretization of -y'' + q y = lambda w y with Robin
// conditions c*y + s*y' = 0 (boundary rows use the half-cell convention so
// the matrix pencil stays symmetric). Returns tridiagonal (diag, off) and
// the weight diagonal.
struct FdPencil {
    std::vector<double> diag, off, weight;
};

inline FdPencil fd_pencil(const std::function<double(double)>& q,
                          const std::function<double(double)>& w, double lo, double hi, int n,
                          double c_lo, double s_lo, double c_hi, double s_hi) {
    double dx = (hi - lo) / (n - 1);
    bool dir_lo = std::fabs(s_lo) < 1e-14, dir_hi = std::fabs(s_hi) < 1e-14;
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(lo + i * dx);
    int i0 = dir_lo ? 1 : 0, i1 = dir_hi ? n - 2 : n - 1;
    FdPencil p;
    for (int i = i0; i <= i1; ++i) {
        double qq = q(xs[static_cast<size_t>(i)]), ww = w(xs[static_cast<size_t>(i)]);
        if (i == 0) {  // Robin at lo: y' = -(c/s) y, half cell
            p.diag.push_back(1.0 / (dx * dx) - (c_lo / s_lo) / dx + 0.5 * qq);
            p.weight.push_back(0.5 * ww);
        } else if (i == n - 1) {  // Robin at hi: y' = -(c/s) y
            p.diag.push_back(1.0 / (dx * dx) + (c_hi / s_hi) / dx + 0.5 * qq);
            p.weight.push_back(0.5 * ww);
        } else {
            p.diag.push_back(2.0 / (dx * dx) + qq);
            p.weight.push_back(ww);
        }
        if (i < i1) p.off.push_back(-1.0 / (dx * dx));
    }
    return p;
}

// number of eigenvalues of the pencil below sigma (LDL^T sign count)
inline int sturm_count(const FdPencil& p, double sigma) {
    int count = 0;
    double d = p.diag[0] - sigma * p.weight[0];
    if (d < 0.0) ++count;
    for (size_t i = 1; i < p.diag.size(); ++i) {
        double denom = (d == 0.0) ? 1e-300 : d;
        d = (p.diag[i] - sigma * p.weight[i]) - p.off[i - 1] * p.off[i - 1] / denom;
        if (d < 0.0) ++count;
    }
    return count;
}

inline double sturm_eigenvalue(const FdPencil& p, int index, double lo0 = -100.0) {
    double lo = lo0, hi = 10.0;
    while (sturm_count(p, lo) > 0) lo = 2.0 * lo - 10.0;
    while (sturm_count(p, hi) < index + 1) hi = 2.0 * hi + 10.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::fabs(lo) + std::fabs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (sturm_count(p, mid) < index + 1)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Richardson-extrapolated FD eigenvalue of one Sturm-Liouville problem
inline double fd_sl_eigenvalue(const std::function<double(double)>& q,
                               const std::function<double(double)>& w, double lo, double hi,
                               int index, int n, double c_lo = 1.0, double s_lo = 0.0,
                               double c_hi = 1.0, double s_hi = 0.0) {
    double l1 = sturm_eigenvalue(fd_pencil(q, w, lo, hi, n, c_lo, s_lo, c_hi, s_hi), index);
    double l2 = sturm_eigenvalue(fd_pencil(q, w, lo, hi, 2 * n, c_lo, s_lo, c_hi, s_hi), index);
    return (4.0 * l2 - l1) / 3.0;
}

// FD spectrum of the perturbed problem on (a,b) with the composite weight
inline std::vector<double> fd_perturbed_eigenvalues(const masslab::ProblemSpec& spec, double eps,
                                                    int count, int n) {
    masslab::EpsWeight w(spec, eps);
    auto qf = [&](double x) { return spec.q(x); };
    auto wf = [&](double x) { return w(x); };
    FdPencil p = fd_pencil(qf, wf, spec.a, spec.b, n, std::cos(spec.alpha), std::sin(spec.alpha),
                           std::cos(spec.beta), std::sin(spec.beta));
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(sturm_eigenvalue(p, k));
    return out;
}

// Max relative ODE residual of -y'' + q y - zeta w y = w f evaluated at the
// stored grid nodes; y'' comes from a 6th-order stencil applied to the
// derivative samples, so the check is independent of how y was produced.
inline double max_ode_residual(const masslab::ComplexGridFunction& y,
                               const std::function<double(double)>& q,
                               const std::function<double(double)>& w, masslab::Complex zeta,
                               const std::function<masslab::Complex(double)>& f,
                               const std::vector<double>& skip_near = {}) {
    using masslab::Complex;
    const size_t n = y.size();
    if (n < 16) return 1e300;
    double h = y.x[1] - y.x[0];
    double worst = 0.0, scale = 0.0;
    for (size_t i = 3; i + 3 < n; ++i) {
        double x = y.x[i];
        bool skip = false;
        for (double s : skip_near)
            if (std::fabs(x - s) < 4.0 * h) skip = true;
        if (skip) continue;
        Complex ypp = (-y.deriv[i - 3] + 9.0 * y.deriv[i - 2] - 45.0 * y.deriv[i - 1] +
                       45.0 * y.deriv[i + 1] - 9.0 * y.deriv[i + 2] + y.deriv[i + 3]) /
                      (60.0 * h);
        Complex lhs = -ypp + (q(x) - zeta * w(x)) * y.value[i];
        Complex rhs = w(x) * f(x);
        worst = std::max(worst, std::abs(lhs - rhs));
        scale = std::max(scale, std::abs(ypp) + std::abs((q(x) - zeta * w(x)) * y.value[i]) +
                                    std::abs(rhs));
    }
    return worst / std::max(scale, 1e-300);
}

inline double max_ode_residual(const masslab::GridFunction& y,
                               const std::function<double(double)>& q,
                               const std::function<double(double)>& w, double lambda,
                               const std::vector<double>& skip_near = {}) {
    masslab::ComplexGridFunction cy = masslab::to_complex(y);
    return max_ode_residual(cy, q, w, masslab::Complex(lambda, 0.0),
                            [](double) { return masslab::Complex{}; }, skip_near);
}

}  // namespace oracles
