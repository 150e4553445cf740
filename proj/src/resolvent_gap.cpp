#include "masslab/resolvent_gap.hpp"

#include <cmath>

#include "masslab/errors.hpp"
#include "masslab/ode.hpp"
#include "masslab/perturbed.hpp"
#include "masslab/quadrature.hpp"

namespace masslab {

namespace {

void append_rule(const QuadRule& q, std::vector<double>& x, std::vector<double>& w) {
    x.insert(x.end(), q.x.begin(), q.x.end());
    w.insert(w.end(), q.w.begin(), q.w.end());
}

// complex homogeneous solution of -y'' + q y - zeta w y = 0 sampled at nodes
struct Sampled {
    std::vector<Complex> y, dy;
    Complex y_end, dy_end;
};

Sampled complex_shoot(const CoefficientFunction& q, const CoefficientFunction& w, Complex zeta,
                      double from, double to, Complex y0, Complex dy0,
                      const std::vector<double>& nodes) {
    Sampled s;
    s.y.resize(nodes.size());
    s.dy.resize(nodes.size());
    std::vector<double> breaks = q.breakpoints();
    auto wb = w.breakpoints();
    breaks.insert(breaks.end(), wb.begin(), wb.end());
    OdeState<4> st{y0.real(), y0.imag(), dy0.real(), dy0.imag()};
    auto rhs = [&](double x, const OdeState<4>& y, OdeState<4>& dy_) {
        Complex c = Complex(q(x), 0.0) - zeta * w(x);
        Complex acc = c * Complex(y[0], y[1]);
        dy_[0] = y[2];
        dy_[1] = y[3];
        dy_[2] = acc.real();
        dy_[3] = acc.imag();
    };
    integrate_path<4>(rhs, st, from, to, breaks, nodes, [&](size_t k, const OdeState<4>& v) {
        s.y[k] = Complex(v[0], v[1]);
        s.dy[k] = Complex(v[2], v[3]);
    });
    s.y_end = Complex(st[0], st[1]);
    s.dy_end = Complex(st[2], st[3]);
    return s;
}

// Green kernel block for one self-adjoint sub-problem on its own nodes:
// out[i,j] = G(x_i, x_j) * weight(x_j) * quad_w[j],  G = -yL(min)yR(max)/W
void fill_green_block(Eigen::MatrixXcd& m, long row0, long col0, const Sampled& yl,
                      const Sampled& yr, Complex wron, const std::vector<double>& nodes,
                      const std::vector<double>& qw, const CoefficientFunction& weight) {
    const long n = static_cast<long>(nodes.size());
    for (long j = 0; j < n; ++j) {
        Complex fac = weight(nodes[static_cast<size_t>(j)]) * qw[static_cast<size_t>(j)] / wron;
        for (long i = 0; i < n; ++i) {
            Complex g = (i <= j) ? -yl.y[static_cast<size_t>(i)] * yr.y[static_cast<size_t>(j)]
                                 : -yl.y[static_cast<size_t>(j)] * yr.y[static_cast<size_t>(i)];
            m(row0 + i, col0 + j) += g * fac;
        }
    }
}

}  // namespace

namespace {

// composite GL rule over [lo,hi] split at the given interior cuts, with the
// node budget spread proportionally to panel length (>= 8 per panel)
void build_piece(double lo, double hi, int budget, std::vector<double> cuts,
                 std::vector<double>& x, std::vector<double>& w) {
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::erase_if(cuts, [&](double c) { return c < lo || c > hi; });
    double total = hi - lo;
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        double len = cuts[k + 1] - cuts[k];
        int n = std::max(8, static_cast<int>(std::lround(budget * len / total)));
        append_rule(gauss_legendre(n, cuts[k], cuts[k + 1]), x, w);
    }
}

std::vector<double> outer_cuts(const ProblemSpec& spec, double lo, double hi) {
    std::vector<double> cuts;
    for (double c : spec.q.breakpoints())
        if (c > lo && c < hi) cuts.push_back(c);
    for (double c : spec.r.breakpoints())
        if (c > lo && c < hi) cuts.push_back(c);
    return cuts;
}

}  // namespace

BlockGrid make_block_grid(const ProblemSpec& spec, double eps, int nodes_per_piece) {
    if (nodes_per_piece < 8 || nodes_per_piece % 2 != 0)
        throw DomainError("nodes per piece must be even and >= 8");
    BlockGrid g;
    g.eps = eps;
    int nh = nodes_per_piece / 2;

    // panels aligned with -+eps and with every coefficient kink, so the
    // kernel quadrature never straddles a breakpoint
    build_piece(spec.a, -eps, nh, outer_cuts(spec, spec.a, -eps), g.xa, g.wa);
    g.n_half_a = g.xa.size();
    build_piece(-eps, 0.0, nh, outer_cuts(spec, -eps, 0.0), g.xa, g.wa);

    std::vector<double> mid_cuts = spec.h.breakpoints();
    for (double c : spec.q.breakpoints()) {
        double t = c / eps;
        if (t > -1.0 && t < 1.0) mid_cuts.push_back(t);
    }
    build_piece(-1.0, 1.0, nodes_per_piece, mid_cuts, g.tm, g.wm);

    build_piece(0.0, eps, nh, outer_cuts(spec, 0.0, eps), g.xb, g.wb);
    g.n_half_b = g.xb.size();
    build_piece(eps, spec.b, nh, outer_cuts(spec, eps, spec.b), g.xb, g.wb);
    return g;
}

Eigen::MatrixXcd limit_resolvent_matrix(const ProblemSpec& spec, Complex zeta,
                                        const BlockGrid& grid) {
    const long na = static_cast<long>(grid.xa.size());
    const long nm = static_cast<long>(grid.tm.size());
    const long nb = static_cast<long>(grid.xb.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(na + nm + nb, na + nm + nb);

    CoefficientFunction q_a = spec.q.restricted({spec.a, 0.0});
    CoefficientFunction r_a = spec.r.restricted({spec.a, 0.0});
    CoefficientFunction q_b = spec.q.restricted({0.0, spec.b});
    CoefficientFunction r_b = spec.r.restricted({0.0, spec.b});
    CoefficientFunction q_m = CoefficientFunction::constant(0.0, {-1.0, 1.0});

    // left block: ell_a at a, Dirichlet at 0
    Sampled la = complex_shoot(q_a, r_a, zeta, spec.a, 0.0, Complex(-std::sin(spec.alpha), 0.0),
                               Complex(std::cos(spec.alpha), 0.0), grid.xa);
    Sampled ra = complex_shoot(q_a, r_a, zeta, 0.0, spec.a, Complex(0.0, 0.0), Complex(1.0, 0.0),
                               grid.xa);
    Complex wron_a = la.y[0] * ra.dy[0] - la.dy[0] * ra.y[0];
    fill_green_block(m, 0, 0, la, ra, wron_a, grid.xa, grid.wa, r_a);

    // mid block: Neumann at both ends, weight h
    Sampled lm = complex_shoot(q_m, spec.h, zeta, -1.0, 1.0, Complex(1.0, 0.0), Complex(0.0, 0.0),
                               grid.tm);
    Sampled rm = complex_shoot(q_m, spec.h, zeta, 1.0, -1.0, Complex(1.0, 0.0), Complex(0.0, 0.0),
                               grid.tm);
    Complex wron_m = lm.y[0] * rm.dy[0] - lm.dy[0] * rm.y[0];
    fill_green_block(m, na, na, lm, rm, wron_m, grid.tm, grid.wm, spec.h);

    // right block: Dirichlet at 0, ell_b at b
    Sampled lb = complex_shoot(q_b, r_b, zeta, 0.0, spec.b, Complex(0.0, 0.0), Complex(1.0, 0.0),
                               grid.xb);
    Sampled rb = complex_shoot(q_b, r_b, zeta, spec.b, 0.0, Complex(-std::sin(spec.beta), 0.0),
                               Complex(std::cos(spec.beta), 0.0), grid.xb);
    Complex wron_b = lb.y[0] * rb.dy[0] - lb.dy[0] * rb.y[0];
    fill_green_block(m, na + nm, na + nm, lb, rb, wron_b, grid.xb, grid.wb, r_b);

    // coupling blocks: T(z) applied to the mid resolvent traces at t = -+1.
    // trace rows of R(B): [R(B)f](-1) = sum_j G_B(-1,t_j) h(t_j) w_j f_j
    // z_a(x) solves the homogeneous left equation with z(0) = 1
    {
        Complex la_at0 = la.y_end;  // left-seeded solution at x=0
        if (std::abs(la_at0) < 1e-12) throw NearSingularError("zeta too close to the left block spectrum");
        for (long j = 0; j < nm; ++j) {
            // G_B(-1, t_j) = -yL(-1) yR(t_j) / W with yL(-1) = 1 by seeding
            Complex gb = -rm.y[static_cast<size_t>(j)] / wron_m;
            Complex row = gb * spec.h(grid.tm[static_cast<size_t>(j)]) * grid.wm[static_cast<size_t>(j)];
            for (long i = 0; i < na; ++i)
                m(i, na + j) += la.y[static_cast<size_t>(i)] / la_at0 * row;
        }
        Complex rb_at0 = rb.y_end;  // right-seeded solution at x=0
        if (std::abs(rb_at0) < 1e-12) throw NearSingularError("zeta too close to the right block spectrum");
        for (long j = 0; j < nm; ++j) {
            // G_B(+1, t_j) = -yL(t_j) yR(+1) / W with yR(+1) = 1 by seeding
            Complex gb = -lm.y[static_cast<size_t>(j)] / wron_m;
            Complex row = gb * spec.h(grid.tm[static_cast<size_t>(j)]) * grid.wm[static_cast<size_t>(j)];
            for (long i = 0; i < nb; ++i)
                m(na + nm + i, na + j) += rb.y[static_cast<size_t>(i)] / rb_at0 * row;
        }
    }
    return m;
}

Eigen::MatrixXcd perturbed_resolvent_matrix(const ProblemSpec& spec, double eps, Complex zeta,
                                            const BlockGrid& grid) {
    const long na = static_cast<long>(grid.xa.size());
    const long nm = static_cast<long>(grid.tm.size());
    const long nb = static_cast<long>(grid.xb.size());
    const size_t nha = grid.n_half_a;
    const size_t nhb = grid.n_half_b;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(na + nm + nb, na + nm + nb);

    std::vector<double> nodes_a(grid.xa.begin(), grid.xa.begin() + static_cast<long>(nha));
    std::vector<double> nodes_b(grid.xb.begin() + static_cast<long>(nhb), grid.xb.end());
    PerturbedFundamental f = perturbed_fundamental(spec, eps, zeta, nodes_a, grid.tm, nodes_b);
    const Complex W = f.wron;
    if (std::abs(W) < 1e-14) throw NearSingularError("vanishing composite Wronskian");

    // composite rows/columns ordered by physical position
    struct Node {
        long idx;        // matrix row/column
        double pos;      // physical coordinate
        Complex yl, yr;  // fundamental solutions there
        Complex fac;     // source factor (columns only)
    };
    std::vector<Node> rows, cols;
    rows.reserve(static_cast<size_t>(na + nm + nb));
    for (size_t k = 0; k < nha; ++k)
        rows.push_back({static_cast<long>(k), grid.xa[k], f.l_a[k], f.r_a[k], {}});
    for (size_t k = 0; k < grid.tm.size(); ++k)
        rows.push_back({na + static_cast<long>(k), eps * grid.tm[k], f.l_t[k], f.r_t[k], {}});
    for (size_t k = nhb; k < grid.xb.size(); ++k)
        rows.push_back({na + nm + static_cast<long>(k), grid.xb[k], f.l_b[k - nhb], f.r_b[k - nhb], {}});

    cols = rows;
    for (size_t k = 0; k < nha; ++k)
        cols[k].fac = spec.r(grid.xa[k]) * grid.wa[k];
    for (size_t k = 0; k < grid.tm.size(); ++k)
        cols[nha + k].fac = spec.h(grid.tm[k]) * grid.wm[k] / eps;
    for (size_t k = 0; k < grid.xb.size() - nhb; ++k)
        cols[nha + grid.tm.size() + k].fac = spec.r(grid.xb[nhb + k]) * grid.wb[nhb + k];

    for (const Node& c : cols) {
        Complex fac = c.fac / W;
        for (const Node& r : rows) {
            Complex g = (r.pos <= c.pos) ? -r.yl * c.yr : -c.yl * r.yr;
            m(r.idx, c.idx) += g * fac;
        }
    }

    // trace rows of the composite solve at -+eps (value and derivative)
    const size_t ncols = cols.size();
    std::vector<Complex> y_me(ncols), dy_me(ncols), y_pe(ncols), dy_pe(ncols);
    for (size_t k = 0; k < ncols; ++k) {
        const Node& c = cols[k];
        Complex fac = c.fac / W;
        if (c.pos <= -eps) {
            y_me[k] = -c.yl * f.r_me * fac;
            dy_me[k] = -c.yl * f.r_dme * fac;
        } else {
            y_me[k] = -f.l_me * c.yr * fac;
            dy_me[k] = -f.l_dme * c.yr * fac;
        }
        if (c.pos <= eps) {
            y_pe[k] = -c.yl * f.r_pe * fac;
            dy_pe[k] = -c.yl * f.r_dpe * fac;
        } else {
            y_pe[k] = -f.l_pe * c.yr * fac;
            dy_pe[k] = -f.l_dpe * c.yr * fac;
        }
    }

    // canonical fundamental pair at -eps for the outer equation on (-eps, 0)
    CoefficientFunction q_a = spec.q.restricted({spec.a, 0.0});
    CoefficientFunction r_a = spec.r.restricted({spec.a, 0.0});
    CoefficientFunction q_b = spec.q.restricted({0.0, spec.b});
    CoefficientFunction r_b = spec.r.restricted({0.0, spec.b});

    std::vector<double> ext_a(grid.xa.begin() + static_cast<long>(nha), grid.xa.end());
    Sampled ua = complex_shoot(q_a, r_a, zeta, -eps, 0.0, Complex(1.0, 0.0), Complex(0.0, 0.0), ext_a);
    Sampled va = complex_shoot(q_a, r_a, zeta, -eps, 0.0, Complex(0.0, 0.0), Complex(1.0, 0.0), ext_a);
    for (size_t i = 0; i < ext_a.size(); ++i) {
        long row = static_cast<long>(nha + i);
        for (size_t k = 0; k < ncols; ++k)
            m(row, cols[k].idx) = ua.y[i] * y_me[k] + va.y[i] * dy_me[k];
        // forcing from f_a on (-eps, x_i): kernel U(x)V(s) - V(x)U(s)
        for (size_t k = 0; k < ext_a.size(); ++k) {
            if (ext_a[k] < ext_a[i]) {
                Complex ker = ua.y[i] * va.y[k] - va.y[i] * ua.y[k];
                m(row, static_cast<long>(nha + k)) +=
                    ker * spec.r(ext_a[k]) * grid.wa[nha + k];
            }
        }
    }

    std::vector<double> ext_b(grid.xb.begin(), grid.xb.begin() + static_cast<long>(nhb));
    Sampled ub = complex_shoot(q_b, r_b, zeta, eps, 0.0, Complex(1.0, 0.0), Complex(0.0, 0.0), ext_b);
    Sampled vb = complex_shoot(q_b, r_b, zeta, eps, 0.0, Complex(0.0, 0.0), Complex(1.0, 0.0), ext_b);
    for (size_t i = 0; i < ext_b.size(); ++i) {
        long row = na + nm + static_cast<long>(i);
        for (size_t k = 0; k < ncols; ++k)
            m(row, cols[k].idx) = ub.y[i] * y_pe[k] + vb.y[i] * dy_pe[k];
        // forcing from f_b on (x_i, eps): integral from eps down to x_i
        for (size_t k = 0; k < ext_b.size(); ++k) {
            if (ext_b[k] > ext_b[i]) {
                Complex ker = ub.y[i] * vb.y[k] - vb.y[i] * ub.y[k];
                m(row, na + nm + static_cast<long>(k)) -=
                    ker * spec.r(ext_b[k]) * grid.wb[k];
            }
        }
    }
    return m;
}

double weighted_operator_norm(const Eigen::MatrixXcd& m, const ProblemSpec& spec,
                              const BlockGrid& grid) {
    const long n = m.rows();
    Eigen::VectorXd d(n);
    long i = 0;
    for (size_t k = 0; k < grid.xa.size(); ++k) d(i++) = spec.r(grid.xa[k]) * grid.wa[k];
    for (size_t k = 0; k < grid.tm.size(); ++k) d(i++) = spec.h(grid.tm[k]) * grid.wm[k];
    for (size_t k = 0; k < grid.xb.size(); ++k) d(i++) = spec.r(grid.xb[k]) * grid.wb[k];
    Eigen::VectorXd s = d.array().sqrt();

    Eigen::MatrixXcd a = s.asDiagonal() * m * s.cwiseInverse().asDiagonal();

    // power iteration on a^H a with a deterministic start
    Eigen::VectorXcd v(n);
    for (long k = 0; k < n; ++k) v(k) = Complex(1.0 + 1e-3 * std::sin(0.7 * double(k)), 0.0);
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXcd u = a * v;
        Eigen::VectorXcd w = a.adjoint() * u;
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        double s_new = std::sqrt(u.squaredNorm());
        v = w / nw;
        if (it > 4 && std::fabs(s_new - sigma) <= 1e-9 * std::max(1.0, s_new)) {
            sigma = s_new;
            break;
        }
        sigma = s_new;
    }
    return sigma;
}

ResolventGapResult resolvent_gap(const ProblemSpec& spec, double eps, Complex zeta,
                                 int nodes_per_piece) {
    ResolventGapResult res;
    auto one = [&](int npp) {
        BlockGrid g = make_block_grid(spec, eps, npp);
        Eigen::MatrixXcd diff = perturbed_resolvent_matrix(spec, eps, zeta, g);
        diff -= limit_resolvent_matrix(spec, zeta, g);
        return weighted_operator_norm(diff, spec, g);
    };
    res.gap = one(nodes_per_piece);
    res.gap_refined = one(2 * nodes_per_piece);
    double denom = std::max(res.gap_refined, 1e-14);
    res.resolved = std::fabs(res.gap_refined - res.gap) <= 0.1 * denom;
    return res;
}

}  // namespace masslab
