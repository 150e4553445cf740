#include "masslab/sl_solver.hpp"

#include <algorithm>
#include <cmath>

#include "masslab/errors.hpp"
#include "masslab/ode.hpp"
#include "masslab/rootfind.hpp"

namespace masslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> coefficient_breaks(const SLProblem& p) {
    std::vector<double> b = p.q.breakpoints();
    std::vector<double> bw = p.w.breakpoints();
    b.insert(b.end(), bw.begin(), bw.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    std::erase_if(b, [&](double x) { return x <= p.iv.lo || x >= p.iv.hi; });
    return b;
}

double angle_of(const EndpointBC& bc) {
    const auto* rb = std::get_if<RobinBC>(&bc);
    RobinBC r = rb ? normalized(*rb) : RobinBC{1.0, 0.0};  // Dirichlet trace counts as Dirichlet
    double a = std::fmod(std::atan2(-r.s, r.c), kPi);
    if (a < 0.0) a += kPi;
    return a;
}

// initial (y, y') satisfying c*y + s*y' = 0
std::array<double, 2> robin_seed(const EndpointBC& bc) {
    const auto* rb = std::get_if<RobinBC>(&bc);
    RobinBC r = rb ? normalized(*rb) : RobinBC{1.0, 0.0};
    return {-r.s, r.c};
}

void require_homogeneous(const SLProblem& p) {
    if (!is_homogeneous(p.left) || !is_homogeneous(p.right))
        throw DomainError("operation requires homogeneous boundary conditions");
}

SLProblem homogenized(const SLProblem& p) {
    SLProblem h = p;
    if (std::holds_alternative<DirichletValueBC>(h.left)) h.left = RobinBC{1.0, 0.0};
    if (std::holds_alternative<DirichletValueBC>(h.right)) h.right = RobinBC{1.0, 0.0};
    return h;
}

double eig_scale(double lambda) { return std::max(1.0, std::fabs(lambda)); }

// real shooting state (y, y', int w y^2)
void shoot_real(const SLProblem& p, double lambda, double from, double to,
                OdeState<3>& state, const std::vector<double>& samples,
                const std::function<void(size_t, const OdeState<3>&)>& on_sample) {
    auto breaks = coefficient_breaks(p);
    auto rhs = [&](double x, const OdeState<3>& y, OdeState<3>& dy) {
        double c = p.q(x) - lambda * p.w(x);
        dy[0] = y[1];
        dy[1] = c * y[0];
        dy[2] = p.w(x) * y[0] * y[0];
    };
    integrate_path<3>(rhs, state, from, to, breaks, samples, on_sample);
}

}  // namespace

double prufer_left_angle(const SLProblem& p) { return angle_of(p.left); }

double prufer_right_target(const SLProblem& p) {
    double t = angle_of(p.right);
    return t == 0.0 ? kPi : t;
}

double prufer_end(const SLProblem& p, double lambda) {
    auto breaks = coefficient_breaks(p);
    OdeState<1> th{prufer_left_angle(p)};
    auto rhs = [&](double x, const OdeState<1>& y, OdeState<1>& dy) {
        double c = std::cos(y[0]), s = std::sin(y[0]);
        dy[0] = c * c + (lambda * p.w(x) - p.q(x)) * s * s;
    };
    integrate_path<1>(rhs, th, p.iv.lo, p.iv.hi, breaks, {});
    return th[0];
}

int count_below(const SLProblem& p, double lambda) {
    double c = (prufer_end(p, lambda) - prufer_right_target(p)) / kPi;
    return std::max(0, static_cast<int>(std::ceil(c - 1e-9)));
}

namespace {

// locate eigenvalue index n by Prufer bisection, then polish on the
// bidirectional Wronskian mismatch
double locate_eigenvalue(const SLProblem& p, int n, double eig_tol) {
    const double target = prufer_right_target(p) + n * kPi;
    double q_over_w = 0.0;
    {
        double wmin = p.w.grid_min();
        q_over_w = p.q.grid_max_abs() / std::max(wmin, 1e-12);
    }
    double lo = -q_over_w - 1.0;
    for (int i = 0; i < 80 && prufer_end(p, lo) >= target; ++i) lo = 2.0 * lo - 10.0;
    double flo = prufer_end(p, lo) - target;
    if (flo >= 0.0) throw NumericalError("failed to bracket eigenvalue from below", n);
    double step = std::max(10.0, std::fabs(lo));
    double hi = lo + step, fhi = prufer_end(p, hi) - target;
    for (int i = 0; i < 80 && fhi <= 0.0; ++i) {
        lo = hi;
        flo = fhi;
        step *= 2.0;
        hi += step;
        fhi = prufer_end(p, hi) - target;
    }
    if (fhi <= 0.0) throw NumericalError("failed to bracket eigenvalue from above", n);

    auto fn = [&](double lam) { return prufer_end(p, lam) - target; };
    double lam = brent(fn, lo, hi, flo, fhi, 0.25 * eig_tol * eig_scale(0.5 * (lo + hi)));

    // mismatch polish: secant on the matched Wronskian at the midpoint
    double xm = 0.5 * (p.iv.lo + p.iv.hi);
    auto mismatch = [&](double l) {
        OdeState<3> yl{robin_seed(p.left)[0], robin_seed(p.left)[1], 0.0};
        shoot_real(p, l, p.iv.lo, xm, yl, {}, {});
        OdeState<3> yr{robin_seed(p.right)[0], robin_seed(p.right)[1], 0.0};
        shoot_real(p, l, p.iv.hi, xm, yr, {}, {});
        double scale = std::hypot(yl[0], yl[1]) * std::hypot(yr[0], yr[1]);
        return (yl[0] * yr[1] - yl[1] * yr[0]) / std::max(scale, 1e-300);
    };
    double tol = eig_tol * eig_scale(lam);
    double l0 = lam - 10.0 * tol, l1 = lam;
    double m0 = mismatch(l0), m1 = mismatch(l1);
    for (int it = 0; it < 6 && m0 != m1; ++it) {
        double l2 = l1 - m1 * (l1 - l0) / (m1 - m0);
        if (!std::isfinite(l2) || std::fabs(l2 - lam) > 1000.0 * tol) break;
        l0 = l1;
        m0 = m1;
        l1 = l2;
        m1 = mismatch(l1);
        if (std::fabs(l1 - l0) < 0.01 * tol) break;
    }
    return std::fabs(l1 - lam) <= 1000.0 * tol ? l1 : lam;
}

void apply_sign_convention(std::vector<double>& values, std::vector<double>& derivs) {
    double mx = 0.0;
    for (double v : values) mx = std::max(mx, std::fabs(v));
    for (double v : values) {
        if (std::fabs(v) > 0.1 * mx) {
            if (v < 0.0)
                for (size_t i = 0; i < values.size(); ++i) {
                    values[i] = -values[i];
                    derivs[i] = -derivs[i];
                }
            break;
        }
    }
}

}  // namespace

Eigenpair eigenpair_at_index(const SLProblem& p, int index, const SolveOptions& opt,
                             const std::vector<double>& extra_points) {
    require_homogeneous(p);
    if (index < 0) throw DomainError("eigenvalue index must be nonnegative");
    double lam = locate_eigenvalue(p, index, opt.eig_tol);

    std::vector<double> grid = uniform_grid(p.iv.lo, p.iv.hi, opt.samples);
    grid.insert(grid.end(), extra_points.begin(), extra_points.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const double xm = 0.5 * (p.iv.lo + p.iv.hi);
    std::vector<double> val(grid.size()), der(grid.size());

    std::vector<double> left_pts, right_pts;
    std::vector<size_t> left_map, right_map;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < xm) {
            left_pts.push_back(grid[i]);
            left_map.push_back(i);
        } else {
            right_pts.push_back(grid[i]);
            right_map.push_back(i);
        }
    }

    auto seed_l = robin_seed(p.left);
    OdeState<3> yl{seed_l[0], seed_l[1], 0.0};
    shoot_real(p, lam, p.iv.lo, xm, yl, left_pts, [&](size_t k, const OdeState<3>& s) {
        val[left_map[k]] = s[0];
        der[left_map[k]] = s[1];
    });
    double mass_left = yl[2];

    auto seed_r = robin_seed(p.right);
    OdeState<3> yr{seed_r[0], seed_r[1], 0.0};
    shoot_real(p, lam, p.iv.hi, xm, yr, right_pts, [&](size_t k, const OdeState<3>& s) {
        val[right_map[k]] = s[0];
        der[right_map[k]] = s[1];
    });
    double mass_right = -yr[2];  // accumulated along decreasing x

    // match the right shoot to the left one at xm, using the larger component
    double kappa = (std::fabs(yr[0]) >= std::fabs(yr[1])) ? yl[0] / yr[0] : yl[1] / yr[1];
    if (!std::isfinite(kappa)) throw NumericalError("degenerate eigenfunction match", index);
    for (size_t k : right_map) {
        val[k] *= kappa;
        der[k] *= kappa;
    }

    double norm2 = mass_left + kappa * kappa * mass_right;
    if (!(norm2 > 0.0)) throw NumericalError("nonpositive eigenfunction norm", index);
    double inv = 1.0 / std::sqrt(norm2);
    for (size_t i = 0; i < grid.size(); ++i) {
        val[i] *= inv;
        der[i] *= inv;
    }
    apply_sign_convention(val, der);

    Eigenpair ep;
    ep.index = index;
    ep.lambda = lam;
    ep.efun.x = std::move(grid);
    ep.efun.value = std::move(val);
    ep.efun.deriv = std::move(der);
    return ep;
}

std::vector<Eigenpair> eigenvalues(const SLProblem& p, int n_max, const SolveOptions& opt) {
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    std::vector<Eigenpair> out;
    out.reserve(static_cast<size_t>(n_max));
    for (int n = 0; n < n_max; ++n) out.push_back(eigenpair_at_index(p, n, opt));
    return out;
}

std::pair<double, double> eigenfunction_at(const SLProblem& p, double lambda, double x,
                                           const SolveOptions& opt) {
    double delta = 1e-6 * eig_scale(lambda);
    int below = count_below(p, lambda - delta);
    int above = count_below(p, lambda + delta);
    if (above == below) throw DomainError("lambda is not an eigenvalue within matching tolerance");
    Eigenpair ep = eigenpair_at_index(p, below, opt, {x});
    if (std::fabs(ep.lambda - lambda) > delta)
        throw DomainError("lambda is not an eigenvalue within matching tolerance");
    return ep.efun.hermite(x);
}

double distance_to_spectrum(const SLProblem& p0, Complex zeta, double horizon) {
    SLProblem p = homogenized(p0);
    double im = std::fabs(zeta.imag());
    if (im >= horizon) return horizon;
    double re = zeta.real();
    int c_mid = count_below(p, re);
    double best = horizon;
    if (count_below(p, re + horizon) > c_mid) {
        double lam = locate_eigenvalue(p, c_mid, defaults::eig_tol);
        best = std::min(best, std::hypot(re - lam, im));
    }
    if (c_mid > 0 && count_below(p, re - horizon) < c_mid) {
        double lam = locate_eigenvalue(p, c_mid - 1, defaults::eig_tol);
        best = std::min(best, std::hypot(re - lam, im));
    }
    return best;
}

namespace {

// complex homogeneous solution (y, y') of -y'' + q y - zeta w y = 0
void shoot_complex(const SLProblem& p, Complex zeta, double from, double to, OdeState<4>& st,
                   const std::vector<double>& samples,
                   const std::function<void(size_t, const OdeState<4>&)>& on_sample) {
    auto breaks = coefficient_breaks(p);
    auto rhs = [&](double x, const OdeState<4>& y, OdeState<4>& dy) {
        double qr = p.q(x) - zeta.real() * p.w(x);
        double qi = -zeta.imag() * p.w(x);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = qr * y[0] - qi * y[1];
        dy[3] = qr * y[1] + qi * y[0];
    };
    integrate_path<4>(rhs, st, from, to, breaks, samples, on_sample);
}

void guard_near_singular(const SLProblem& p, Complex zeta) {
    double horizon = std::max(1e-3, 10.0 * defaults::spectral_guard);
    if (distance_to_spectrum(p, zeta, horizon) < defaults::spectral_guard)
        throw NearSingularError("zeta within spectral guard of a homogeneous eigenvalue");
}

}  // namespace

BoundarySolution solve_boundary(const SLProblem& p, Complex zeta, Complex trace,
                                const SolveOptions& opt) {
    bool trace_left = std::holds_alternative<DirichletValueBC>(p.left);
    bool trace_right = std::holds_alternative<DirichletValueBC>(p.right);
    if (trace_left == trace_right)
        throw DomainError("boundary solve needs exactly one trace end and one Robin end");
    guard_near_singular(p, zeta);

    double from = trace_left ? p.iv.hi : p.iv.lo;
    double to = trace_left ? p.iv.lo : p.iv.hi;
    auto seed = robin_seed(trace_left ? p.right : p.left);

    std::vector<double> grid = uniform_grid(p.iv.lo, p.iv.hi, opt.samples);
    std::vector<Complex> zv(grid.size()), zd(grid.size());
    OdeState<4> st{seed[0], 0.0, seed[1], 0.0};
    shoot_complex(p, zeta, from, to, st, grid, [&](size_t k, const OdeState<4>& s) {
        zv[k] = Complex(s[0], s[1]);
        zd[k] = Complex(s[2], s[3]);
    });
    Complex z_end(st[0], st[1]);
    if (std::abs(z_end) < 1e-12)
        throw NearSingularError("homogeneous solution vanishes at the trace end");
    Complex scale = trace / z_end;

    BoundarySolution bs;
    bs.zeta = zeta;
    bs.trace = trace;
    bs.sol.x = std::move(grid);
    bs.sol.value.resize(zv.size());
    bs.sol.deriv.resize(zd.size());
    for (size_t i = 0; i < zv.size(); ++i) {
        bs.sol.value[i] = scale * zv[i];
        bs.sol.deriv[i] = scale * zd[i];
    }
    return bs;
}

ComplexGridFunction solve_nonhomogeneous(const SLProblem& p, Complex zeta,
                                         const std::function<Complex(double)>& f,
                                         const SolveOptions& opt) {
    require_homogeneous(p);
    guard_near_singular(p, zeta);

    auto breaks = coefficient_breaks(p);
    std::vector<double> grid = uniform_grid(p.iv.lo, p.iv.hi, opt.samples);
    const size_t n = grid.size();

    // state: (y, y', J) complex, J accumulating int z w f
    auto make_rhs = [&](bool /*unused*/) {
        return [&](double x, const OdeState<6>& y, OdeState<6>& dy) {
            double w = p.w(x);
            double qr = p.q(x) - zeta.real() * w;
            double qi = -zeta.imag() * w;
            dy[0] = y[2];
            dy[1] = y[3];
            dy[2] = qr * y[0] - qi * y[1];
            dy[3] = qr * y[1] + qi * y[0];
            Complex zwf = Complex(y[0], y[1]) * w * f(x);
            dy[4] = zwf.real();
            dy[5] = zwf.imag();
        };
    };

    std::vector<Complex> zl(n), zld(n), il(n);
    {
        auto seed = robin_seed(p.left);
        OdeState<6> st{seed[0], 0.0, seed[1], 0.0, 0.0, 0.0};
        integrate_path<6>(make_rhs(true), st, p.iv.lo, p.iv.hi, breaks, grid,
                          [&](size_t k, const OdeState<6>& s) {
                              zl[k] = Complex(s[0], s[1]);
                              zld[k] = Complex(s[2], s[3]);
                              il[k] = Complex(s[4], s[5]);
                          });
    }
    std::vector<Complex> zr(n), zrd(n), ir(n);
    {
        auto seed = robin_seed(p.right);
        OdeState<6> st{seed[0], 0.0, seed[1], 0.0, 0.0, 0.0};
        integrate_path<6>(make_rhs(false), st, p.iv.hi, p.iv.lo, breaks, grid,
                          [&](size_t k, const OdeState<6>& s) {
                              zr[k] = Complex(s[0], s[1]);
                              zrd[k] = Complex(s[2], s[3]);
                              ir[k] = -Complex(s[4], s[5]);  // J(x) = int_b^x, I_R = -J
                          });
    }
    Complex W = zl[n / 2] * zrd[n / 2] - zld[n / 2] * zr[n / 2];
    if (std::abs(W) < 1e-14) throw NearSingularError("vanishing Wronskian in nonhomogeneous solve");

    ComplexGridFunction out;
    out.x = grid;
    out.value.resize(n);
    out.deriv.resize(n);
    for (size_t i = 0; i < n; ++i) {
        out.value[i] = -(zl[i] * ir[i] + zr[i] * il[i]) / W;
        out.deriv[i] = -(zld[i] * ir[i] + zrd[i] * il[i]) / W;
    }
    return out;
}

ComplexGridFunction solve_nonhomogeneous(const SLProblem& p, Complex zeta,
                                         const ComplexGridFunction& f, const SolveOptions& opt) {
    return solve_nonhomogeneous(p, zeta, [&f](double x) { return f.eval(x); }, opt);
}

}  // namespace masslab
