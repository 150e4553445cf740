#include "masslab/limit_op.hpp"

#include <algorithm>
#include <cmath>

#include "masslab/errors.hpp"
#include "masslab/ode.hpp"
#include "masslab/quadrature.hpp"

namespace masslab {

namespace {

GridFunction real_part(const ComplexGridFunction& f) {
    GridFunction g;
    g.x = f.x;
    g.value.resize(f.value.size());
    g.deriv.resize(f.deriv.size());
    for (size_t i = 0; i < f.value.size(); ++i) {
        g.value[i] = f.value[i].real();
        g.deriv[i] = f.deriv[i].real();
    }
    return g;
}

void scale_inplace(GridFunction& f, double c) {
    for (auto& v : f.value) v *= c;
    for (auto& d : f.deriv) d *= c;
}

}  // namespace

double weighted_norm2(const std::function<double(double)>& f2, const CoefficientFunction& weight,
                      double lo, double hi, int nodes_per_panel) {
    return integrate_piecewise([&](double x) { return f2(x) * weight(x); }, lo, hi,
                               weight.breakpoints(), nodes_per_panel);
}

double block_norm2(const ProblemSpec& spec, const ComplexGridFunction& left,
                   const ComplexGridFunction& mid, const ComplexGridFunction& right) {
    double n2 = 0.0;
    if (!left.empty())
        n2 += weighted_norm2([&](double x) { return std::norm(left.eval(x)); }, spec.r, spec.a, 0.0);
    if (!mid.empty())
        n2 += weighted_norm2([&](double t) { return std::norm(mid.eval(t)); }, spec.h, -1.0, 1.0);
    if (!right.empty())
        n2 += weighted_norm2([&](double x) { return std::norm(right.eval(x)); }, spec.r, 0.0, spec.b);
    return n2;
}

SLProblem left_block(const ProblemSpec& spec) {
    SLProblem p;
    p.iv = {spec.a, 0.0};
    p.q = spec.q.restricted(p.iv);
    p.w = spec.r.restricted(p.iv);
    p.left = robin_from_angle(spec.alpha);
    p.right = RobinBC{1.0, 0.0};
    return p;
}

SLProblem right_block(const ProblemSpec& spec) {
    SLProblem p;
    p.iv = {0.0, spec.b};
    p.q = spec.q.restricted(p.iv);
    p.w = spec.r.restricted(p.iv);
    p.left = RobinBC{1.0, 0.0};
    p.right = robin_from_angle(spec.beta);
    return p;
}

SLProblem mid_block(const ProblemSpec& spec) {
    SLProblem p;
    p.iv = {-1.0, 1.0};
    p.q = CoefficientFunction::constant(0.0, p.iv);
    p.w = spec.h.restricted(p.iv);
    p.left = RobinBC{0.0, 1.0};
    p.right = RobinBC{0.0, 1.0};
    return p;
}

SLProblem left_block_traced(const ProblemSpec& spec) {
    SLProblem p = left_block(spec);
    p.right = DirichletValueBC{};
    return p;
}

SLProblem right_block_traced(const ProblemSpec& spec) {
    SLProblem p = right_block(spec);
    p.left = DirichletValueBC{};
    return p;
}

std::string to_string(MultKind k) {
    switch (k) {
        case MultKind::simple: return "simple";
        case MultKind::double_diagonal: return "double_diagonal";
        case MultKind::double_jordan: return "double_jordan";
        case MultKind::triple_jordan: return "triple_jordan";
    }
    return "?";
}

MultKind classify(bool in_left, bool in_mid, bool in_right) {
    int m = int(in_left) + int(in_mid) + int(in_right);
    if (m == 0) throw DomainError("classify: eigenvalue belongs to no sub-spectrum");
    if (m == 1) return MultKind::simple;
    if (m == 3) return MultKind::triple_jordan;
    if (in_left && in_right) return MultKind::double_diagonal;
    return MultKind::double_jordan;
}

std::vector<LimitEigendata> limit_spectrum(const ProblemSpec& spec, int n_max,
                                           const SolveOptions& opt) {
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    auto rep = validate_spec(spec);
    if (!rep.ok) throw DomainError("invalid problem spec: " + rep.issues.front());

    for (int n_each = n_max + 2;; n_each += n_max) {
        auto eig_l = eigenvalues(left_block(spec), n_each, opt);
        auto eig_m = eigenvalues(mid_block(spec), n_each, opt);
        auto eig_r = eigenvalues(right_block(spec), n_each, opt);

        struct Entry {
            double lambda;
            int source;  // 0 left, 1 mid, 2 right
            int index;
        };
        std::vector<Entry> all;
        for (auto& e : eig_l) all.push_back({e.lambda, 0, e.index});
        for (auto& e : eig_m) all.push_back({e.lambda, 1, e.index});
        for (auto& e : eig_r) all.push_back({e.lambda, 2, e.index});
        std::sort(all.begin(), all.end(),
                  [](const Entry& a, const Entry& b) { return a.lambda < b.lambda; });

        double safe_top = std::min({eig_l.back().lambda, eig_m.back().lambda, eig_r.back().lambda});

        std::vector<LimitEigendata> out;
        int counted = 0;
        size_t i = 0;
        bool complete = false;
        while (i < all.size()) {
            double rep_lam = all[i].lambda;
            if (rep_lam > safe_top) break;  // groups above may be truncated
            LimitEigendata d;
            double sum = 0.0;
            int cnt = 0;
            while (i < all.size() &&
                   all[i].lambda - rep_lam <= defaults::merge_tol * std::max(1.0, std::fabs(rep_lam))) {
                const Entry& e = all[i];
                if (e.source == 0) {
                    d.in_left = true;
                    d.left_index = e.index;
                } else if (e.source == 1) {
                    d.in_mid = true;
                    d.mid_index = e.index;
                } else {
                    d.in_right = true;
                    d.right_index = e.index;
                }
                sum += e.lambda;
                ++cnt;
                ++i;
            }
            d.lambda = sum / cnt;
            d.alg_mult = int(d.in_left) + int(d.in_mid) + int(d.in_right);
            if (d.alg_mult != cnt)
                throw NumericalError("sub-spectral self-coincidence within merge tolerance");
            d.kind = classify(d.in_left, d.in_mid, d.in_right);
            d.first_global_index = counted;
            counted += d.alg_mult;
            out.push_back(d);
            if (counted >= n_max) {
                complete = true;
                break;
            }
        }
        if (complete) return out;
        if (n_each > 8 * (n_max + 2))
            throw NumericalError("limit spectrum merge failed to cover requested count");
    }
}

std::vector<double> flatten_with_multiplicity(const std::vector<LimitEigendata>& data) {
    std::vector<double> out;
    for (const auto& d : data)
        for (int k = 0; k < d.alg_mult; ++k) out.push_back(d.lambda);
    return out;
}

namespace {

// block modes with the coupling-point sign conventions used by the Jordan
// construction: w(-1) > 0, u'(0) > 0, v'(0) > 0
GridFunction left_mode(const ProblemSpec& spec, int index, const SolveOptions& opt) {
    Eigenpair ep = eigenpair_at_index(left_block(spec), index, opt);
    if (ep.efun.deriv.back() < 0.0) scale_inplace(ep.efun, -1.0);
    return ep.efun;
}

GridFunction right_mode(const ProblemSpec& spec, int index, const SolveOptions& opt) {
    Eigenpair ep = eigenpair_at_index(right_block(spec), index, opt);
    if (ep.efun.deriv.front() < 0.0) scale_inplace(ep.efun, -1.0);
    return ep.efun;
}

GridFunction mid_mode(const ProblemSpec& spec, int index, const SolveOptions& opt) {
    Eigenpair ep = eigenpair_at_index(mid_block(spec), index, opt);
    if (ep.efun.value.front() < 0.0) scale_inplace(ep.efun, -1.0);
    return ep.efun;
}

// centered 4th-order derivative of the stored derivative samples; valid on
// uniform interior nodes
double second_derivative_at(const GridFunction& f, size_t i) {
    double h = f.x[1] - f.x[0];
    return (f.deriv[i - 2] - 8.0 * f.deriv[i - 1] + 8.0 * f.deriv[i + 1] - f.deriv[i + 2]) /
           (12.0 * h);
}

// L2(w)-norm of (-y'' + q y)/w - lambda y - coef * target over the interior
double ode_residual_norm2(const GridFunction& y, const CoefficientFunction& q,
                          const CoefficientFunction& w, double lambda, const GridFunction* target,
                          double coef) {
    double acc = 0.0;
    double h = y.x[1] - y.x[0];
    for (size_t i = 2; i + 2 < y.size(); ++i) {
        double x = y.x[i];
        double res = (-second_derivative_at(y, i) + q(x) * y.value[i]) / w(x) - lambda * y.value[i];
        if (target) res -= coef * target->value[i];
        acc += w(x) * res * res * h;
    }
    return acc;
}

// particular solution of -u'' + (q - lambda r) u = coef * r * mode with zero
// data at the outer end, orthogonalized against the mode in L2(r) so the
// representative is reproducible
GridFunction pinned_particular(const SLProblem& block, double lambda, const GridFunction& mode,
                               double coef, bool from_left, const SolveOptions& opt) {
    std::vector<double> grid = uniform_grid(block.iv.lo, block.iv.hi, opt.samples);
    std::vector<double> val(grid.size()), der(grid.size());
    auto rhs = [&](double x, const OdeState<4>& s, OdeState<4>& ds) {
        ds[0] = s[1];
        ds[1] = (block.q(x) - lambda * block.w(x)) * s[0] - coef * block.w(x) * mode.eval(x);
        ds[2] = block.w(x) * s[0] * mode.eval(x);          // <u_p, mode>_w
        ds[3] = block.w(x) * mode.eval(x) * mode.eval(x);  // |mode|^2 for safety
    };
    std::vector<double> breaks = block.q.breakpoints();
    auto wb = block.w.breakpoints();
    breaks.insert(breaks.end(), wb.begin(), wb.end());
    OdeState<4> st{0.0, 0.0, 0.0, 0.0};
    double from = from_left ? block.iv.lo : block.iv.hi;
    double to = from_left ? block.iv.hi : block.iv.lo;
    integrate_path<4>(rhs, st, from, to, breaks, grid, [&](size_t k, const OdeState<4>& s) {
        val[k] = s[0];
        der[k] = s[1];
    });
    double ip = from_left ? st[2] : -st[2];
    double m2 = from_left ? st[3] : -st[3];
    if (m2 > 0.0) ip /= m2;  // mode is unit-norm; guard against drift
    GridFunction out{std::move(grid), std::move(val), std::move(der)};
    for (size_t i = 0; i < out.size(); ++i) {
        out.value[i] -= ip * mode.value[i];
        out.deriv[i] -= ip * mode.deriv[i];
    }
    return out;
}

}  // namespace

std::vector<LimitVector> eigenvector_basis(const ProblemSpec& spec, const LimitEigendata& data,
                                           const SolveOptions& opt) {
    std::vector<LimitVector> basis;
    if (data.in_left) {
        LimitVector Y;
        Y.u = left_mode(spec, data.left_index, opt);
        basis.push_back(std::move(Y));
    }
    if (data.in_right) {
        LimitVector Y;
        Y.v = right_mode(spec, data.right_index, opt);
        basis.push_back(std::move(Y));
    }
    if (data.in_mid && !data.in_left && !data.in_right) {
        GridFunction w = mid_mode(spec, data.mid_index, opt);
        BoundarySolution ta = solve_boundary(left_block_traced(spec), Complex(data.lambda, 0.0),
                                             Complex(w.value.front(), 0.0), opt);
        BoundarySolution tb = solve_boundary(right_block_traced(spec), Complex(data.lambda, 0.0),
                                             Complex(w.value.back(), 0.0), opt);
        LimitVector Y;
        Y.u = real_part(ta.sol);
        Y.w = std::move(w);
        Y.v = real_part(tb.sol);
        double n2 = weighted_norm2([&](double x) { return Y.u.eval(x) * Y.u.eval(x); }, spec.r,
                                   spec.a, 0.0) +
                    1.0 +
                    weighted_norm2([&](double x) { return Y.v.eval(x) * Y.v.eval(x); }, spec.r,
                                   0.0, spec.b);
        double inv = 1.0 / std::sqrt(n2);
        scale_inplace(Y.u, inv);
        scale_inplace(Y.w, inv);
        scale_inplace(Y.v, inv);
        basis.push_back(std::move(Y));
    }
    return basis;
}

RootVectorData root_vector(const ProblemSpec& spec, const LimitEigendata& data,
                           const SolveOptions& opt) {
    if (data.kind != MultKind::double_jordan && data.kind != MultKind::triple_jordan)
        throw DomainError("root vector exists only for the Jordan multiplicity kinds");
    const double lam = data.lambda;

    GridFunction w = mid_mode(spec, data.mid_index, opt);
    double w_m1 = w.value.front(), w_p1 = w.value.back();

    RootVectorData out;
    out.obstruction = std::fabs(integrate_piecewise(
        [&](double t) { return spec.h(t) * w.eval(t) * w.eval(t); }, -1.0, 1.0,
        spec.h.breakpoints()));

    if (data.kind == MultKind::double_jordan && data.in_left) {
        GridFunction u = left_mode(spec, data.left_index, opt);
        double du0 = u.deriv.back();
        if (std::fabs(w_m1) < defaults::degeneracy_tol || std::fabs(du0) < defaults::degeneracy_tol)
            throw NumericalError("degenerate traces in the Jordan construction");
        out.c0 = 1.0 / (w_m1 * du0);

        GridFunction u0 = pinned_particular(left_block(spec), lam, u, 1.0, true, opt);
        BoundarySolution tb = solve_boundary(right_block_traced(spec), Complex(lam, 0.0),
                                             Complex(out.c0 * w_p1, 0.0), opt);
        out.root.u = u0;
        out.root.w = w;
        scale_inplace(out.root.w, out.c0);
        out.root.v = real_part(tb.sol);
        out.root.is_root = true;
        out.eigenvector.u = std::move(u);

        out.coupling_mismatch = std::fabs(u0.value.back() - out.c0 * w_m1);

        double r2 = ode_residual_norm2(out.root.u, spec.q.restricted({spec.a, 0.0}),
                                       spec.r.restricted({spec.a, 0.0}), lam, &out.eigenvector.u, 1.0);
        SLProblem mb = mid_block(spec);
        r2 += ode_residual_norm2(out.root.w, mb.q, mb.w, lam, nullptr, 0.0);
        r2 += ode_residual_norm2(out.root.v, spec.q.restricted({0.0, spec.b}),
                                 spec.r.restricted({0.0, spec.b}), lam, nullptr, 0.0);
        out.jordan_residual = std::sqrt(r2);
        return out;
    }

    if (data.kind == MultKind::double_jordan) {  // right-sided: in_right && in_mid
        GridFunction v = right_mode(spec, data.right_index, opt);
        double dv0 = v.deriv.front();
        if (std::fabs(w_p1) < defaults::degeneracy_tol || std::fabs(dv0) < defaults::degeneracy_tol)
            throw NumericalError("degenerate traces in the Jordan construction");
        out.c0 = -1.0 / (w_p1 * dv0);

        GridFunction v0 = pinned_particular(right_block(spec), lam, v, 1.0, false, opt);
        BoundarySolution ta = solve_boundary(left_block_traced(spec), Complex(lam, 0.0),
                                             Complex(out.c0 * w_m1, 0.0), opt);
        out.root.u = real_part(ta.sol);
        out.root.w = w;
        scale_inplace(out.root.w, out.c0);
        out.root.v = v0;
        out.root.is_root = true;
        out.eigenvector.v = std::move(v);

        out.coupling_mismatch = std::fabs(v0.value.front() - out.c0 * w_p1);

        double r2 = ode_residual_norm2(out.root.v, spec.q.restricted({0.0, spec.b}),
                                       spec.r.restricted({0.0, spec.b}), lam, &out.eigenvector.v, 1.0);
        SLProblem mb = mid_block(spec);
        r2 += ode_residual_norm2(out.root.w, mb.q, mb.w, lam, nullptr, 0.0);
        r2 += ode_residual_norm2(out.root.u, spec.q.restricted({spec.a, 0.0}),
                                 spec.r.restricted({spec.a, 0.0}), lam, nullptr, 0.0);
        out.jordan_residual = std::sqrt(r2);
        return out;
    }

    // triple: canonical chain with c2 = 1
    GridFunction u = left_mode(spec, data.left_index, opt);
    GridFunction v = right_mode(spec, data.right_index, opt);
    double du0 = u.deriv.back(), dv0 = v.deriv.front();
    if (std::fabs(w_m1) < defaults::degeneracy_tol || std::fabs(w_p1) < defaults::degeneracy_tol ||
        std::fabs(du0) < defaults::degeneracy_tol || std::fabs(dv0) < defaults::degeneracy_tol)
        throw NumericalError("degenerate traces in the Jordan construction");

    out.c2 = 1.0;
    out.c0 = -1.0 / (w_p1 * dv0);
    out.c1 = out.c0 * w_m1 * du0;  // equals -(w(-1)u'(0))/(w(1)v'(0)) for c2 = 1

    GridFunction u0 = pinned_particular(left_block(spec), lam, u, out.c1, true, opt);
    GridFunction v0 = pinned_particular(right_block(spec), lam, v, out.c2, false, opt);
    out.root.u = u0;
    out.root.w = w;
    scale_inplace(out.root.w, out.c0);
    out.root.v = v0;
    out.root.is_root = true;

    out.coupling_mismatch = std::max(std::fabs(u0.value.back() - out.c0 * w_m1),
                                     std::fabs(v0.value.front() - out.c0 * w_p1));

    // eigenvector c1*U + c2*V
    out.eigenvector.u = u;
    scale_inplace(out.eigenvector.u, out.c1);
    out.eigenvector.v = v;
    scale_inplace(out.eigenvector.v, out.c2);

    double r2 = ode_residual_norm2(out.root.u, spec.q.restricted({spec.a, 0.0}),
                                   spec.r.restricted({spec.a, 0.0}), lam, &u, out.c1);
    SLProblem mb = mid_block(spec);
    r2 += ode_residual_norm2(out.root.w, mb.q, mb.w, lam, nullptr, 0.0);
    r2 += ode_residual_norm2(out.root.v, spec.q.restricted({0.0, spec.b}),
                             spec.r.restricted({0.0, spec.b}), lam, &v, out.c2);
    out.jordan_residual = std::sqrt(r2);
    return out;
}

ThetaFactor theta_factor(const ProblemSpec& spec, const LimitEigendata& data,
                         const SolveOptions& opt) {
    if (!data.in_mid || data.in_left || data.in_right)
        throw DomainError("theta factor requires a simple mid-block eigenvalue");
    GridFunction w = mid_mode(spec, data.mid_index, opt);
    BoundarySolution ta = solve_boundary(left_block_traced(spec), Complex(data.lambda, 0.0),
                                         Complex(w.value.front(), 0.0), opt);
    BoundarySolution tb = solve_boundary(right_block_traced(spec), Complex(data.lambda, 0.0),
                                         Complex(w.value.back(), 0.0), opt);
    ThetaFactor th;
    th.norm2_left = weighted_norm2([&](double x) { return std::norm(ta.sol.eval(x)); }, spec.r,
                                   spec.a, 0.0);
    th.norm2_right = weighted_norm2([&](double x) { return std::norm(tb.sol.eval(x)); }, spec.r,
                                    0.0, spec.b);
    th.theta = 1.0 / (th.norm2_left + th.norm2_right);
    return th;
}

ResolventTriple apply_limit_resolvent(const ProblemSpec& spec, Complex zeta,
                                      const BlockFunction& f_a, const BlockFunction& f_0,
                                      const BlockFunction& f_b, const SolveOptions& opt) {
    ResolventTriple out;
    out.mid = solve_nonhomogeneous(mid_block(spec), zeta, f_0, opt);
    Complex trace_m1 = out.mid.value.front();
    Complex trace_p1 = out.mid.value.back();

    out.left = solve_nonhomogeneous(left_block(spec), zeta, f_a, opt);
    BoundarySolution ta = solve_boundary(left_block_traced(spec), zeta, trace_m1, opt);
    for (size_t i = 0; i < out.left.size(); ++i) {
        out.left.value[i] += ta.sol.value[i];
        out.left.deriv[i] += ta.sol.deriv[i];
    }

    out.right = solve_nonhomogeneous(right_block(spec), zeta, f_b, opt);
    BoundarySolution tb = solve_boundary(right_block_traced(spec), zeta, trace_p1, opt);
    for (size_t i = 0; i < out.right.size(); ++i) {
        out.right.value[i] += tb.sol.value[i];
        out.right.deriv[i] += tb.sol.deriv[i];
    }
    return out;
}

}  // namespace masslab
