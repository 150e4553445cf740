#include "masslab/perturbed.hpp"

#include <algorithm>
#include <cmath>

#include "masslab/errors.hpp"
#include "masslab/ode.hpp"
#include "masslab/rootfind.hpp"

namespace masslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double eig_scale(double lambda) { return std::max(1.0, std::fabs(lambda)); }

std::vector<double> breaks_between(const ProblemSpec& spec, double lo, double hi) {
    std::vector<double> b = spec.q.breakpoints();
    std::vector<double> br = spec.r.breakpoints();
    b.insert(b.end(), br.begin(), br.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    std::erase_if(b, [&](double x) { return x <= lo || x >= hi; });
    return b;
}

std::vector<double> inner_breaks(const ProblemSpec& spec, double eps) {
    std::vector<double> b = spec.h.breakpoints();
    for (double x : spec.q.breakpoints()) {
        double t = x / eps;
        if (t > -1.0 && t < 1.0) b.push_back(t);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    std::erase_if(b, [](double t) { return t <= -1.0 || t >= 1.0; });
    return b;
}

double angle_from(double boundary_angle) {
    double a = std::fmod(std::atan2(-std::sin(boundary_angle), std::cos(boundary_angle)), kPi);
    if (a < 0.0) a += kPi;
    return a;
}

// (y, y') -> (y, factor * y') preserves the integer part of theta/pi
double remap_angle(double theta, double factor) {
    double k = std::floor(theta / kPi);
    double phi = theta - k * kPi;
    double phi2 = std::atan2(std::sin(phi), factor * std::cos(phi));
    if (phi2 < 0.0) phi2 += kPi;
    return k * kPi + phi2;
}

void check_admissible(const ProblemSpec& spec, double eps) {
    if (!(eps >= defaults::min_eps) || !(eps < 0.5 * std::min(-spec.a, spec.b)))
        throw DomainError("eps outside the admissible range (min_eps, min(-a,b)/2)");
}

}  // namespace

double perturbed_prufer_end(const ProblemSpec& spec, double eps, double lambda) {
    check_admissible(spec, eps);
    OdeState<1> th{angle_from(spec.alpha)};

    auto outer_rhs = [&](double x, const OdeState<1>& y, OdeState<1>& dy) {
        double c = std::cos(y[0]), s = std::sin(y[0]);
        dy[0] = c * c + (lambda * spec.r(x) - spec.q(x)) * s * s;
    };
    integrate_path<1>(outer_rhs, th, spec.a, -eps, breaks_between(spec, spec.a, -eps), {});

    th[0] = remap_angle(th[0], eps);
    auto inner_rhs = [&](double t, const OdeState<1>& y, OdeState<1>& dy) {
        double c = std::cos(y[0]), s = std::sin(y[0]);
        dy[0] = c * c + (lambda * spec.h(t) - eps * eps * spec.q(eps * t)) * s * s;
    };
    integrate_path<1>(inner_rhs, th, -1.0, 1.0, inner_breaks(spec, eps), {});

    th[0] = remap_angle(th[0], 1.0 / eps);
    integrate_path<1>(outer_rhs, th, eps, spec.b, breaks_between(spec, eps, spec.b), {});
    return th[0];
}

int perturbed_count_below(const ProblemSpec& spec, double eps, double lambda) {
    double target = angle_from(spec.beta);
    if (target == 0.0) target = kPi;
    double c = (perturbed_prufer_end(spec, eps, lambda) - target) / kPi;
    return std::max(0, static_cast<int>(std::ceil(c - 1e-9)));
}

namespace {

// composite real shoot (y, y', mass) from one side up to the inner midpoint
// t = 0; mass accumulates the L2(r_eps) square norm along the way
OdeState<3> shoot_to_inner_mid(const ProblemSpec& spec, double eps, double lambda, bool from_left) {
    auto outer_rhs = [&](double x, const OdeState<3>& y, OdeState<3>& dy) {
        dy[0] = y[1];
        dy[1] = (spec.q(x) - lambda * spec.r(x)) * y[0];
        dy[2] = spec.r(x) * y[0] * y[0];
    };
    auto inner_rhs = [&](double t, const OdeState<3>& y, OdeState<3>& dy) {
        dy[0] = y[1];
        dy[1] = (eps * eps * spec.q(eps * t) - lambda * spec.h(t)) * y[0];
        dy[2] = spec.h(t) * y[0] * y[0] / eps;
    };
    if (from_left) {
        OdeState<3> st{-std::sin(spec.alpha), std::cos(spec.alpha), 0.0};
        integrate_path<3>(outer_rhs, st, spec.a, -eps, breaks_between(spec, spec.a, -eps), {});
        st[1] *= eps;
        integrate_path<3>(inner_rhs, st, -1.0, 0.0, inner_breaks(spec, eps), {});
        return st;
    }
    OdeState<3> st{-std::sin(spec.beta), std::cos(spec.beta), 0.0};
    integrate_path<3>(outer_rhs, st, spec.b, eps, breaks_between(spec, eps, spec.b), {});
    st[1] *= eps;
    integrate_path<3>(inner_rhs, st, 1.0, 0.0, inner_breaks(spec, eps), {});
    return st;
}

double locate_perturbed(const ProblemSpec& spec, double eps, int n, double eig_tol) {
    double target = angle_from(spec.beta);
    if (target == 0.0) target = kPi;
    target += n * kPi;

    double wmin = std::min(spec.r.grid_min(), spec.h.grid_min());
    double lo = -spec.q.grid_max_abs() / std::max(wmin, 1e-12) - 1.0;
    for (int i = 0; i < 80 && perturbed_prufer_end(spec, eps, lo) >= target; ++i) lo = 2.0 * lo - 10.0;
    double flo = perturbed_prufer_end(spec, eps, lo) - target;
    if (flo >= 0.0) throw NumericalError("failed to bracket perturbed eigenvalue from below", n);
    double step = std::max(10.0, std::fabs(lo));
    double hi = lo + step, fhi = perturbed_prufer_end(spec, eps, hi) - target;
    for (int i = 0; i < 80 && fhi <= 0.0; ++i) {
        lo = hi;
        flo = fhi;
        step *= 2.0;
        hi += step;
        fhi = perturbed_prufer_end(spec, eps, hi) - target;
    }
    if (fhi <= 0.0) throw NumericalError("failed to bracket perturbed eigenvalue from above", n);

    auto fn = [&](double lam) { return perturbed_prufer_end(spec, eps, lam) - target; };
    double lam = brent(fn, lo, hi, flo, fhi, 0.25 * eig_tol * eig_scale(0.5 * (lo + hi)));

    auto mismatch = [&](double l) {
        OdeState<3> yl = shoot_to_inner_mid(spec, eps, l, true);
        OdeState<3> yr = shoot_to_inner_mid(spec, eps, l, false);
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

}  // namespace

PerturbedEigenpair perturbed_eigenpair_at_index(const ProblemSpec& spec, double eps, int index,
                                                const SolveOptions& opt) {
    check_admissible(spec, eps);
    if (index < 0) throw DomainError("eigenvalue index must be nonnegative");
    double lam = locate_perturbed(spec, eps, index, opt.eig_tol);

    std::vector<double> ga = uniform_grid(spec.a, -eps, opt.samples);
    std::vector<double> gt = uniform_grid(-1.0, 1.0, opt.samples);
    std::vector<double> gb = uniform_grid(eps, spec.b, opt.samples);
    std::vector<double> va(ga.size()), da(ga.size());
    std::vector<double> vt(gt.size()), dt_(gt.size());
    std::vector<double> vb(gb.size()), db(gb.size());

    auto outer_rhs = [&](double x, const OdeState<3>& y, OdeState<3>& dy) {
        dy[0] = y[1];
        dy[1] = (spec.q(x) - lam * spec.r(x)) * y[0];
        dy[2] = spec.r(x) * y[0] * y[0];
    };
    auto inner_rhs = [&](double t, const OdeState<3>& y, OdeState<3>& dy) {
        dy[0] = y[1];
        dy[1] = (eps * eps * spec.q(eps * t) - lam * spec.h(t)) * y[0];
        dy[2] = spec.h(t) * y[0] * y[0] / eps;
    };

    std::vector<double> t_left, t_right;
    std::vector<size_t> t_left_map, t_right_map;
    for (size_t i = 0; i < gt.size(); ++i) {
        if (gt[i] < 0.0) {
            t_left.push_back(gt[i]);
            t_left_map.push_back(i);
        } else {
            t_right.push_back(gt[i]);
            t_right_map.push_back(i);
        }
    }

    // left pass: (a,-eps) then inner down to t=0
    OdeState<3> sl{-std::sin(spec.alpha), std::cos(spec.alpha), 0.0};
    integrate_path<3>(outer_rhs, sl, spec.a, -eps, breaks_between(spec, spec.a, -eps), ga,
                      [&](size_t k, const OdeState<3>& s) {
                          va[k] = s[0];
                          da[k] = s[1];
                      });
    sl[1] *= eps;
    integrate_path<3>(inner_rhs, sl, -1.0, 0.0, inner_breaks(spec, eps), t_left,
                      [&](size_t k, const OdeState<3>& s) {
                          vt[t_left_map[k]] = s[0];
                          dt_[t_left_map[k]] = s[1];
                      });
    double mass_left = sl[2];

    // right pass: (b,eps) then inner down to t=0
    OdeState<3> sr{-std::sin(spec.beta), std::cos(spec.beta), 0.0};
    integrate_path<3>(outer_rhs, sr, spec.b, eps, breaks_between(spec, eps, spec.b), gb,
                      [&](size_t k, const OdeState<3>& s) {
                          vb[k] = s[0];
                          db[k] = s[1];
                      });
    sr[1] *= eps;
    integrate_path<3>(inner_rhs, sr, 1.0, 0.0, inner_breaks(spec, eps), t_right,
                      [&](size_t k, const OdeState<3>& s) {
                          vt[t_right_map[k]] = s[0];
                          dt_[t_right_map[k]] = s[1];
                      });
    double mass_right = -sr[2];

    double kappa = (std::fabs(sr[0]) >= std::fabs(sr[1])) ? sl[0] / sr[0] : sl[1] / sr[1];
    if (!std::isfinite(kappa)) throw NumericalError("degenerate perturbed eigenfunction match", index);

    for (size_t k : t_right_map) {
        vt[k] *= kappa;
        dt_[k] *= kappa;
    }
    for (size_t i = 0; i < gb.size(); ++i) {
        vb[i] *= kappa;
        db[i] *= kappa;
    }

    double norm2 = mass_left + kappa * kappa * mass_right;
    if (!(norm2 > 0.0)) throw NumericalError("nonpositive perturbed eigenfunction norm", index);
    double inv = 1.0 / std::sqrt(norm2);
    for (auto* vec : {&va, &da, &vt, &dt_, &vb, &db})
        for (double& v : *vec) v *= inv;

    // sign scan across the composite function, left to right
    double mx = 0.0;
    for (const auto* vec : {&va, &vt, &vb})
        for (double v : *vec) mx = std::max(mx, std::fabs(v));
    bool flip = false;
    bool decided = false;
    for (const auto* vec : {&va, &vt, &vb}) {
        for (double v : *vec)
            if (std::fabs(v) > 0.1 * mx) {
                flip = v < 0.0;
                decided = true;
                break;
            }
        if (decided) break;
    }
    if (flip)
        for (auto* vec : {&va, &da, &vt, &dt_, &vb, &db})
            for (double& v : *vec) v = -v;

    PerturbedEigenpair pe;
    pe.index = index;
    pe.eps = eps;
    pe.lambda = lam;
    pe.outer_left = {std::move(ga), std::move(va), std::move(da)};
    pe.inner = {std::move(gt), std::move(vt), std::move(dt_)};
    pe.outer_right = {std::move(gb), std::move(vb), std::move(db)};
    return pe;
}

std::vector<PerturbedEigenpair> perturbed_eigenvalues(const ProblemSpec& spec, double eps, int n_max,
                                                      const SolveOptions& opt) {
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    std::vector<PerturbedEigenpair> out;
    out.reserve(static_cast<size_t>(n_max));
    for (int n = 0; n < n_max; ++n) out.push_back(perturbed_eigenpair_at_index(spec, eps, n, opt));
    for (size_t i = 1; i < out.size(); ++i)
        if (!(out[i].lambda > out[i - 1].lambda))
            throw NumericalError("perturbed eigenvalues not strictly increasing",
                                 static_cast<int>(i));
    return out;
}

std::vector<double> perturbed_spectrum_below(const ProblemSpec& spec, double eps, double cutoff,
                                             const SolveOptions& opt) {
    int count = perturbed_count_below(spec, eps, cutoff);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(count));
    for (int n = 0; n < count; ++n) out.push_back(locate_perturbed(spec, eps, n, opt.eig_tol));
    return out;
}

double perturbed_distance_to_spectrum(const ProblemSpec& spec, double eps, Complex zeta,
                                      double horizon) {
    double im = std::fabs(zeta.imag());
    if (im >= horizon) return horizon;
    double re = zeta.real();
    int c_mid = perturbed_count_below(spec, eps, re);
    double best = horizon;
    if (perturbed_count_below(spec, eps, re + horizon) > c_mid) {
        double lam = locate_perturbed(spec, eps, c_mid, defaults::eig_tol);
        best = std::min(best, std::hypot(re - lam, im));
    }
    if (c_mid > 0 && perturbed_count_below(spec, eps, re - horizon) < c_mid) {
        double lam = locate_perturbed(spec, eps, c_mid - 1, defaults::eig_tol);
        best = std::min(best, std::hypot(re - lam, im));
    }
    return best;
}

TransferMatrix transfer_matrix(const std::function<double(double)>& q,
                               const std::function<double(double)>& w, Complex lambda, double x0,
                               double x1, const std::vector<double>& breaks) {
    // two complex columns of the fundamental system
    OdeState<8> st{1, 0, 0, 0, 0, 0, 1, 0};  // (y1, dy1, y2, dy2) interleaved re/im
    auto rhs = [&](double x, const OdeState<8>& y, OdeState<8>& dy) {
        Complex c = Complex(q(x), 0.0) - lambda * w(x);
        Complex y1(y[0], y[1]), d1(y[2], y[3]), y2(y[4], y[5]), d2(y[6], y[7]);
        Complex a1 = c * y1, a2 = c * y2;
        dy[0] = d1.real();
        dy[1] = d1.imag();
        dy[2] = a1.real();
        dy[3] = a1.imag();
        dy[4] = d2.real();
        dy[5] = d2.imag();
        dy[6] = a2.real();
        dy[7] = a2.imag();
    };
    // tighter stepping keeps the unimodularity defect within its budget
    integrate_path<8>(rhs, st, x0, x1, breaks, {}, {}, 1e-14, 1e-12);
    TransferMatrix m;
    m.m00 = Complex(st[0], st[1]);
    m.m10 = Complex(st[2], st[3]);
    m.m01 = Complex(st[4], st[5]);
    m.m11 = Complex(st[6], st[7]);
    return m;
}

TransferMatrix perturbed_transfer(const ProblemSpec& spec, double eps, Complex lambda) {
    check_admissible(spec, eps);
    auto q_out = [&](double x) { return spec.q(x); };
    auto r_out = [&](double x) { return spec.r(x); };
    auto q_in = [&](double t) { return eps * eps * spec.q(eps * t); };
    auto h_in = [&](double t) { return spec.h(t); };

    TransferMatrix m1 = transfer_matrix(q_out, r_out, lambda, spec.a, -eps,
                                        breaks_between(spec, spec.a, -eps));
    TransferMatrix d_in{1.0, 0.0, 0.0, eps};
    TransferMatrix m2 = transfer_matrix(q_in, h_in, lambda, -1.0, 1.0, inner_breaks(spec, eps));
    TransferMatrix d_out{1.0, 0.0, 0.0, 1.0 / eps};
    TransferMatrix m3 = transfer_matrix(q_out, r_out, lambda, eps, spec.b,
                                        breaks_between(spec, eps, spec.b));
    return m1.then(d_in).then(m2).then(d_out).then(m3);
}

double characteristic_function(const ProblemSpec& spec, double eps, double lambda) {
    TransferMatrix m = perturbed_transfer(spec, eps, Complex(lambda, 0.0));
    auto [y, dy] = m.apply(Complex(-std::sin(spec.alpha), 0.0), Complex(std::cos(spec.alpha), 0.0));
    return (y * std::cos(spec.beta) + dy * std::sin(spec.beta)).real();
}

namespace {

struct ForcedPassResult {
    // complex (value, derivative, running integral) at the requested nodes;
    // inner samples in the rescaled variable
    std::vector<Complex> ya, dya, ia;
    std::vector<Complex> yt, dyt, it;
    std::vector<Complex> yb, dyb, ib;
    Complex y_me, dy_me, i_me;  // physical state at -eps
    Complex y_pe, dy_pe, i_pe;  // physical state at +eps
};

// Composite forced pass accumulating I = int z * rho_eps * f along the path
// (z the homogeneous solution being integrated). Direction: left seeds at a,
// right seeds at b. I is the path integral from the seed end.
ForcedPassResult forced_pass(const ProblemSpec& spec, double eps, Complex zeta, bool from_left,
                             const BlockFunction& f_a, const BlockFunction& f_0,
                             const BlockFunction& f_b, const std::vector<double>& nodes_a,
                             const std::vector<double>& nodes_t, const std::vector<double>& nodes_b) {
    ForcedPassResult res;
    res.ya.resize(nodes_a.size());
    res.dya.resize(nodes_a.size());
    res.ia.resize(nodes_a.size());
    res.yt.resize(nodes_t.size());
    res.dyt.resize(nodes_t.size());
    res.it.resize(nodes_t.size());
    res.yb.resize(nodes_b.size());
    res.dyb.resize(nodes_b.size());
    res.ib.resize(nodes_b.size());

    auto outer_rhs = [&spec, zeta](const BlockFunction& f) {
        return [&spec, zeta, f](double x, const OdeState<6>& y, OdeState<6>& dy) {
            double w = spec.r(x);
            Complex c = Complex(spec.q(x), 0.0) - zeta * w;
            Complex yy(y[0], y[1]), dd(y[2], y[3]);
            Complex acc = c * yy;
            Complex forc = yy * w * f(x);
            dy[0] = dd.real();
            dy[1] = dd.imag();
            dy[2] = acc.real();
            dy[3] = acc.imag();
            dy[4] = forc.real();
            dy[5] = forc.imag();
        };
    };
    auto inner_rhs = [&](double t, const OdeState<6>& y, OdeState<6>& dy) {
        double h = spec.h(t);
        Complex c = Complex(eps * eps * spec.q(eps * t), 0.0) - zeta * h;
        Complex yy(y[0], y[1]), dd(y[2], y[3]);
        Complex acc = c * yy;
        Complex forc = yy * h * f_0(t) / eps;
        dy[0] = dd.real();
        dy[1] = dd.imag();
        dy[2] = acc.real();
        dy[3] = acc.imag();
        dy[4] = forc.real();
        dy[5] = forc.imag();
    };

    auto sample_into = [](std::vector<Complex>& v, std::vector<Complex>& d, std::vector<Complex>& i) {
        return [pv = &v, pd = &d, pi = &i](size_t k, const OdeState<6>& s) {
            (*pv)[k] = Complex(s[0], s[1]);
            (*pd)[k] = Complex(s[2], s[3]);
            (*pi)[k] = Complex(s[4], s[5]);
        };
    };

    if (from_left) {
        OdeState<6> st{-std::sin(spec.alpha), 0.0, std::cos(spec.alpha), 0.0, 0.0, 0.0};
        integrate_path<6>(outer_rhs(f_a), st, spec.a, -eps, breaks_between(spec, spec.a, -eps),
                          nodes_a, sample_into(res.ya, res.dya, res.ia));
        res.y_me = Complex(st[0], st[1]);
        res.dy_me = Complex(st[2], st[3]);
        res.i_me = Complex(st[4], st[5]);
        st[2] *= eps;
        st[3] *= eps;
        integrate_path<6>(inner_rhs, st, -1.0, 1.0, inner_breaks(spec, eps), nodes_t,
                          sample_into(res.yt, res.dyt, res.it));
        st[2] /= eps;
        st[3] /= eps;
        res.y_pe = Complex(st[0], st[1]);
        res.dy_pe = Complex(st[2], st[3]);
        res.i_pe = Complex(st[4], st[5]);
        integrate_path<6>(outer_rhs(f_b), st, eps, spec.b, breaks_between(spec, eps, spec.b),
                          nodes_b, sample_into(res.yb, res.dyb, res.ib));
    } else {
        OdeState<6> st{-std::sin(spec.beta), 0.0, std::cos(spec.beta), 0.0, 0.0, 0.0};
        integrate_path<6>(outer_rhs(f_b), st, spec.b, eps, breaks_between(spec, eps, spec.b),
                          nodes_b, sample_into(res.yb, res.dyb, res.ib));
        res.y_pe = Complex(st[0], st[1]);
        res.dy_pe = Complex(st[2], st[3]);
        res.i_pe = Complex(st[4], st[5]);
        st[2] *= eps;
        st[3] *= eps;
        integrate_path<6>(inner_rhs, st, 1.0, -1.0, inner_breaks(spec, eps), nodes_t,
                          sample_into(res.yt, res.dyt, res.it));
        st[2] /= eps;
        st[3] /= eps;
        res.y_me = Complex(st[0], st[1]);
        res.dy_me = Complex(st[2], st[3]);
        res.i_me = Complex(st[4], st[5]);
        integrate_path<6>(outer_rhs(f_a), st, -eps, spec.a, breaks_between(spec, spec.a, -eps),
                          nodes_a, sample_into(res.ya, res.dya, res.ia));
    }
    return res;
}

}  // namespace

ResolventTriple apply_perturbed_resolvent(const ProblemSpec& spec, double eps, Complex zeta,
                                          const BlockFunction& f_a, const BlockFunction& f_0,
                                          const BlockFunction& f_b, const SolveOptions& opt) {
    check_admissible(spec, eps);
    double horizon = std::max(1e-3, 10.0 * defaults::spectral_guard);
    if (perturbed_distance_to_spectrum(spec, eps, zeta, horizon) < defaults::spectral_guard)
        throw NearSingularError("zeta within spectral guard of the perturbed spectrum");

    std::vector<double> grid_a = uniform_grid(spec.a, 0.0, opt.samples);
    std::vector<double> grid_t = uniform_grid(-1.0, 1.0, opt.samples);
    std::vector<double> grid_b = uniform_grid(0.0, spec.b, opt.samples);

    std::vector<double> a_outer, a_ext, b_ext, b_outer;
    std::vector<size_t> a_outer_map, a_ext_map, b_ext_map, b_outer_map;
    for (size_t i = 0; i < grid_a.size(); ++i) {
        if (grid_a[i] < -eps) {
            a_outer.push_back(grid_a[i]);
            a_outer_map.push_back(i);
        } else {
            a_ext.push_back(grid_a[i]);
            a_ext_map.push_back(i);
        }
    }
    for (size_t i = 0; i < grid_b.size(); ++i) {
        if (grid_b[i] > eps) {
            b_outer.push_back(grid_b[i]);
            b_outer_map.push_back(i);
        } else {
            b_ext.push_back(grid_b[i]);
            b_ext_map.push_back(i);
        }
    }

    ForcedPassResult L = forced_pass(spec, eps, zeta, true, f_a, f_0, f_b, a_outer, grid_t, b_outer);
    ForcedPassResult R = forced_pass(spec, eps, zeta, false, f_a, f_0, f_b, a_outer, grid_t, b_outer);
    Complex W = L.y_me * R.dy_me - L.dy_me * R.y_me;
    if (std::abs(W) < 1e-14) throw NearSingularError("vanishing composite Wronskian");

    // y = -(yL*IR + yR*IL)/W with IR(x) = -(R-pass running integral)
    auto combine = [&W](Complex yl, Complex il, Complex yr, Complex jr) {
        return -(yl * (-jr) + yr * il) / W;
    };

    ResolventTriple out;
    out.left.x = grid_a;
    out.left.value.assign(grid_a.size(), Complex{});
    out.left.deriv.assign(grid_a.size(), Complex{});
    out.mid.x = grid_t;
    out.mid.value.assign(grid_t.size(), Complex{});
    out.mid.deriv.assign(grid_t.size(), Complex{});
    out.right.x = grid_b;
    out.right.value.assign(grid_b.size(), Complex{});
    out.right.deriv.assign(grid_b.size(), Complex{});

    for (size_t k = 0; k < a_outer.size(); ++k) {
        size_t i = a_outer_map[k];
        out.left.value[i] = combine(L.ya[k], L.ia[k], R.ya[k], R.ia[k]);
        out.left.deriv[i] = combine(L.dya[k], L.ia[k], R.dya[k], R.ia[k]);
    }
    for (size_t k = 0; k < grid_t.size(); ++k) {
        out.mid.value[k] = combine(L.yt[k], L.it[k], R.yt[k], R.it[k]);
        out.mid.deriv[k] = combine(L.dyt[k], L.it[k], R.dyt[k], R.it[k]);
    }
    for (size_t k = 0; k < b_outer.size(); ++k) {
        size_t i = b_outer_map[k];
        out.right.value[i] = combine(L.yb[k], L.ib[k], R.yb[k], R.ib[k]);
        out.right.deriv[i] = combine(L.dyb[k], L.ib[k], R.dyb[k], R.ib[k]);
    }

    // extensions across the inner region solve the outer equation with the
    // outer right-hand side from the composite trace data at -+eps
    {
        Complex y0 = combine(L.y_me, L.i_me, R.y_me, R.i_me);
        Complex d0 = combine(L.dy_me, L.i_me, R.dy_me, R.i_me);
        OdeState<4> st{y0.real(), y0.imag(), d0.real(), d0.imag()};
        auto rhs = [&](double x, const OdeState<4>& y, OdeState<4>& dy) {
            double w = spec.r(x);
            Complex c = Complex(spec.q(x), 0.0) - zeta * w;
            Complex yy(y[0], y[1]);
            Complex acc = c * yy - w * f_a(x);
            dy[0] = y[2];
            dy[1] = y[3];
            dy[2] = acc.real();
            dy[3] = acc.imag();
        };
        integrate_path<4>(rhs, st, -eps, 0.0, breaks_between(spec, -eps, 0.0), a_ext,
                          [&](size_t k, const OdeState<4>& s) {
                              out.left.value[a_ext_map[k]] = Complex(s[0], s[1]);
                              out.left.deriv[a_ext_map[k]] = Complex(s[2], s[3]);
                          });
    }
    {
        Complex y0 = combine(L.y_pe, L.i_pe, R.y_pe, R.i_pe);
        Complex d0 = combine(L.dy_pe, L.i_pe, R.dy_pe, R.i_pe);
        OdeState<4> st{y0.real(), y0.imag(), d0.real(), d0.imag()};
        auto rhs = [&](double x, const OdeState<4>& y, OdeState<4>& dy) {
            double w = spec.r(x);
            Complex c = Complex(spec.q(x), 0.0) - zeta * w;
            Complex yy(y[0], y[1]);
            Complex acc = c * yy - w * f_b(x);
            dy[0] = y[2];
            dy[1] = y[3];
            dy[2] = acc.real();
            dy[3] = acc.imag();
        };
        integrate_path<4>(rhs, st, eps, 0.0, breaks_between(spec, 0.0, eps), b_ext,
                          [&](size_t k, const OdeState<4>& s) {
                              out.right.value[b_ext_map[k]] = Complex(s[0], s[1]);
                              out.right.deriv[b_ext_map[k]] = Complex(s[2], s[3]);
                          });
    }
    return out;
}

PerturbedFundamental perturbed_fundamental(const ProblemSpec& spec, double eps, Complex zeta,
                                           const std::vector<double>& nodes_a,
                                           const std::vector<double>& nodes_t,
                                           const std::vector<double>& nodes_b) {
    auto zero = [](double) { return Complex{}; };
    ForcedPassResult L = forced_pass(spec, eps, zeta, true, zero, zero, zero, nodes_a, nodes_t, nodes_b);
    ForcedPassResult R = forced_pass(spec, eps, zeta, false, zero, zero, zero, nodes_a, nodes_t, nodes_b);
    PerturbedFundamental f;
    f.l_a = std::move(L.ya);
    f.l_da = std::move(L.dya);
    f.l_t = std::move(L.yt);
    f.l_dt = std::move(L.dyt);
    f.l_b = std::move(L.yb);
    f.l_db = std::move(L.dyb);
    f.r_a = std::move(R.ya);
    f.r_da = std::move(R.dya);
    f.r_t = std::move(R.yt);
    f.r_dt = std::move(R.dyt);
    f.r_b = std::move(R.yb);
    f.r_db = std::move(R.dyb);
    f.l_me = L.y_me;
    f.l_dme = L.dy_me;
    f.l_pe = L.y_pe;
    f.l_dpe = L.dy_pe;
    f.r_me = R.y_me;
    f.r_dme = R.dy_me;
    f.r_pe = R.y_pe;
    f.r_dpe = R.dy_pe;
    f.wron = f.l_me * f.r_dme - f.l_dme * f.r_me;
    return f;
}

}  // namespace masslab
