#include <doctest.h>

#include <cmath>
#include <random>

#include "masslab/errors.hpp"
#include "masslab/sl_solver.hpp"
#include "support/oracles.hpp"

using namespace masslab;
using oracles::kPi;

namespace {

SLProblem make_problem(double lo, double hi, double qc = 0.0, double wc = 1.0) {
    SLProblem p;
    p.iv = {lo, hi};
    p.q = CoefficientFunction::constant(qc, {lo, hi});
    p.w = CoefficientFunction::constant(wc, {lo, hi});
    p.left = RobinBC{1.0, 0.0};
    p.right = RobinBC{1.0, 0.0};
    return p;
}

// random piecewise-linear coefficient on (lo,hi) with values in [vmin,vmax]
CoefficientFunction random_piecewise(std::mt19937_64& rng, double lo, double hi, double vmin,
                                     double vmax, int pieces = 3) {
    std::uniform_real_distribution<double> uv(vmin, vmax);
    std::vector<double> cuts{lo};
    for (int i = 1; i < pieces; ++i) cuts.push_back(lo + (hi - lo) * i / pieces);
    cuts.push_back(hi);
    std::vector<CoefficientFunction::PolyPiece> pp;
    double v = uv(rng);
    for (int i = 0; i < pieces; ++i) {
        double v2 = uv(rng);
        pp.push_back({cuts[size_t(i)], cuts[size_t(i) + 1],
                      {v, (v2 - v) / (cuts[size_t(i) + 1] - cuts[size_t(i)])}});
        v = v2;
    }
    return CoefficientFunction::piecewise_poly(std::move(pp));
}

}  // namespace

TEST_CASE("constant-coefficient eigenvalues match closed forms") {
    // (-1,0) Dirichlet/Dirichlet: n^2 pi^2
    auto eigs = eigenvalues(make_problem(-1.0, 0.0), 3);
    for (int n = 0; n < 3; ++n)
        CHECK(eigs[size_t(n)].lambda ==
              doctest::Approx((n + 1.0) * (n + 1.0) * kPi * kPi).epsilon(1e-8));

    // (-1,1) Neumann/Neumann: 0, pi^2/4, pi^2
    SLProblem pn = make_problem(-1.0, 1.0);
    pn.left = RobinBC{0.0, 1.0};
    pn.right = RobinBC{0.0, 1.0};
    auto en = eigenvalues(pn, 3);
    CHECK(std::fabs(en[0].lambda) < 1e-9);
    CHECK(en[1].lambda == doctest::Approx(kPi * kPi / 4).epsilon(1e-8));
    CHECK(en[2].lambda == doctest::Approx(kPi * kPi).epsilon(1e-8));

    // (0,pi) with q=1: 2, 5
    auto es = eigenvalues(make_problem(0.0, kPi, 1.0), 2);
    CHECK(es[0].lambda == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(es[1].lambda == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("completeness against closed forms, n <= 20") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uq(-3.0, 3.0), uw(0.5, 2.0), ul(0.7, 2.2);
    for (int rep = 0; rep < 4; ++rep) {
        double c = uq(rng), w0 = uw(rng), len = ul(rng);
        SLProblem p = make_problem(0.0, len, c, w0);
        auto eigs = eigenvalues(p, 21);
        for (int n = 0; n <= 20; ++n) {
            double expect = (std::pow((n + 1) * kPi / len, 2.0) + c) / w0;
            CHECK(eigs[size_t(n)].lambda == doctest::Approx(expect).epsilon(1e-8));
        }
    }
}

TEST_CASE("oracle equivalence for randomized piecewise coefficients") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        double lo = 0.0, hi = 1.0 + 0.1 * (rep % 3);
        SLProblem p;
        p.iv = {lo, hi};
        p.q = random_piecewise(rng, lo, hi, -2.0, 2.0);
        p.w = random_piecewise(rng, lo, hi, 0.6, 1.8);
        p.left = RobinBC{1.0, 0.0};
        p.right = RobinBC{1.0, 0.0};
        auto eigs = eigenvalues(p, 5);
        for (int n = 0; n < 5; ++n) {
            auto qf = [&](double x) { return p.q(x); };
            auto wf = [&](double x) { return p.w(x); };
            double coarse = oracles::sturm_eigenvalue(
                oracles::fd_pencil(qf, wf, lo, hi, 5000, 1, 0, 1, 0), n);
            double fine = oracles::sturm_eigenvalue(
                oracles::fd_pencil(qf, wf, lo, hi, 10000, 1, 0, 1, 0), n);
            double extrap = (4.0 * fine - coarse) / 3.0;
            double band = std::max(1e-7 * std::max(1.0, std::fabs(extrap)),
                                   0.5 * std::fabs(fine - coarse));
            CHECK(std::fabs(eigs[size_t(n)].lambda - extrap) < band);
        }
    }
}

TEST_CASE("derived value: q(x) = x on (0,1)") {
    SLProblem p = make_problem(0.0, 1.0);
    p.q = CoefficientFunction::piecewise_poly({{0.0, 1.0, {0.0, 1.0}}});
    auto qf = [&](double x) { return p.q(x); };
    auto wf = [](double) { return 1.0; };
    double oracle = oracles::fd_sl_eigenvalue(qf, wf, 0.0, 1.0, 0, 10000);
    auto eigs = eigenvalues(p, 1);
    CHECK(eigs[0].lambda == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("interlacing and winding count") {
    std::mt19937_64 rng(5);
    SLProblem p;
    p.iv = {-1.0, 0.5};
    p.q = random_piecewise(rng, -1.0, 0.5, -2.0, 2.0);
    p.w = random_piecewise(rng, -1.0, 0.5, 0.5, 1.5);
    p.left = robin_from_angle(0.6);
    p.right = robin_from_angle(2.1);
    auto eigs = eigenvalues(p, 8);
    for (size_t i = 1; i < eigs.size(); ++i) CHECK(eigs[i].lambda > eigs[i - 1].lambda);
    for (const auto& e : eigs) {
        double d = 1e-7 * std::max(1.0, std::fabs(e.lambda));
        CHECK(count_below(p, e.lambda - d) == e.index);
        CHECK(count_below(p, e.lambda + d) == e.index + 1);
    }
}

TEST_CASE("eigenfunctions: normalization, sign, residual") {
    SLProblem p = make_problem(-1.0, 0.0);
    auto [v, d] = eigenfunction_at(p, kPi * kPi, -0.5);
    CHECK(v == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

    SLProblem pn = make_problem(-1.0, 1.0);
    pn.left = RobinBC{0.0, 1.0};
    pn.right = RobinBC{0.0, 1.0};
    auto [v0, d0] = eigenfunction_at(pn, 0.0, 0.3);
    CHECK(v0 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(std::fabs(d0) < 1e-9);

    // (-2,0) Dirichlet, lambda = pi^2/4: |u'(0)| = pi/2; the left-scan sign
    // convention makes the interior hump positive, so u'(0) is negative
    SLProblem p2 = make_problem(-2.0, 0.0);
    auto [v2, d2] = eigenfunction_at(p2, kPi * kPi / 4.0, 0.0);
    CHECK(std::fabs(v2) < 1e-9);
    CHECK(d2 == doctest::Approx(-kPi / 2.0).epsilon(1e-9));

    CHECK_THROWS_AS(eigenfunction_at(p, 11.0, -0.5), DomainError);

    // ODE residual of a computed eigenpair, checked by an independent stencil
    std::mt19937_64 rng(31);
    SLProblem pr;
    pr.iv = {0.0, 1.3};
    pr.q = random_piecewise(rng, 0.0, 1.3, -1.5, 1.5);
    pr.w = random_piecewise(rng, 0.0, 1.3, 0.7, 1.6);
    pr.left = RobinBC{1.0, 0.0};
    pr.right = robin_from_angle(1.1);
    auto eigs = eigenvalues(pr, 3);
    for (const auto& e : eigs) {
        double resid = oracles::max_ode_residual(
            e.efun, [&](double x) { return pr.q(x); }, [&](double x) { return pr.w(x); }, e.lambda,
            pr.q.breakpoints());
        CHECK(resid < 1e-8);
        // unit norm in L2(w): trapezoid on the stored dense samples
        double n2 = 0.0;
        for (size_t i = 1; i < e.efun.size(); ++i) {
            double xm = 0.5 * (e.efun.x[i] + e.efun.x[i - 1]);
            double vm = 0.5 * (e.efun.value[i] + e.efun.value[i - 1]);
            n2 += pr.w(xm) * vm * vm * (e.efun.x[i] - e.efun.x[i - 1]);
        }
        CHECK(n2 == doctest::Approx(1.0).epsilon(1e-5));
        // both boundary conditions hold
        CHECK(std::fabs(e.efun.value.front()) < 1e-9);
        RobinBC rb = std::get<RobinBC>(pr.right);
        CHECK(std::fabs(rb.c * e.efun.value.back() + rb.s * e.efun.deriv.back()) < 1e-8);
    }
}

TEST_CASE("boundary solve: hyperbolic closed form and linearity") {
    SLProblem p = make_problem(0.0, 1.0);
    p.left = DirichletValueBC{};
    p.right = RobinBC{1.0, 0.0};
    auto bs = solve_boundary(p, Complex(-1.0, 0.0), Complex(1.0, 0.0));
    // v(x) = sinh(1-x)/sinh(1)
    CHECK(bs.sol.eval(0.5).real() ==
          doctest::Approx(std::sinh(0.5) / std::sinh(1.0)).epsilon(1e-10));
    CHECK(std::fabs(bs.sol.eval(0.5).imag()) < 1e-12);

    auto zero = solve_boundary(p, Complex(-1.0, 0.0), Complex(0.0, 0.0));
    for (auto& v : zero.sol.value) CHECK(std::abs(v) < 1e-300);

    auto twice = solve_boundary(p, Complex(-1.0, 0.0), Complex(2.0, 0.0));
    for (size_t i = 0; i < bs.sol.size(); i += 97)
        CHECK(std::abs(twice.sol.value[i] - 2.0 * bs.sol.value[i]) <=
              1e-14 * std::abs(bs.sol.value[i]) + 1e-300);
}

TEST_CASE("eigen solves require homogeneous conditions") {
    SLProblem p = make_problem(0.0, 1.0);
    p.left = DirichletValueBC{Complex(1.0, 0.0)};
    CHECK_THROWS_AS(eigenvalues(p, 1), DomainError);
    CHECK_THROWS_AS(solve_nonhomogeneous(p, Complex(-1.0, 0.0),
                                         [](double) { return Complex(1.0, 0.0); }),
                    DomainError);
    // a zero-valued trace end counts as plain Dirichlet
    p.left = DirichletValueBC{};
    CHECK_NOTHROW(eigenvalues(p, 1));
}

TEST_CASE("boundary solve: near-singular guard") {
    SLProblem p = make_problem(0.0, 1.0);
    p.left = DirichletValueBC{};
    p.right = RobinBC{1.0, 0.0};
    // homogenized problem is Dirichlet/Dirichlet on (0,1): lambda_1 = pi^2
    CHECK_THROWS_AS(solve_boundary(p, Complex(kPi * kPi + 1e-9, 0.0), Complex(1.0, 0.0)),
                    NearSingularError);
    CHECK_NOTHROW(solve_boundary(p, Complex(kPi * kPi + 0.5, 0.0), Complex(1.0, 0.0)));
}

TEST_CASE("nonhomogeneous solve: closed forms") {
    // f = 0 -> 0
    SLProblem pd = make_problem(0.0, 1.0);
    auto z = solve_nonhomogeneous(pd, Complex(-1.0, 0.0), [](double) { return Complex{}; });
    for (auto& v : z.value) CHECK(std::abs(v) < 1e-300);

    // Neumann, zeta=-1, f == 1 -> y == 1
    SLProblem pn = make_problem(-1.0, 1.0);
    pn.left = RobinBC{0.0, 1.0};
    pn.right = RobinBC{0.0, 1.0};
    auto one = solve_nonhomogeneous(pn, Complex(-1.0, 0.0), [](double) { return Complex(1.0, 0.0); });
    for (size_t i = 0; i < one.size(); i += 111)
        CHECK(one.value[i].real() == doctest::Approx(1.0).epsilon(1e-10));

    // Dirichlet, zeta=-1, f = sin(pi x) -> sin(pi x)/(pi^2+1)
    auto s = solve_nonhomogeneous(pd, Complex(-1.0, 0.0),
                                  [](double x) { return Complex(std::sin(kPi * x), 0.0); });
    CHECK(s.eval(0.5).real() == doctest::Approx(1.0 / (kPi * kPi + 1.0)).epsilon(1e-9));
}

TEST_CASE("boundary solve at complex zeta: residual and trace") {
    std::mt19937_64 rng(19);
    SLProblem p;
    p.iv = {-1.2, 0.0};
    p.q = random_piecewise(rng, -1.2, 0.0, -1.0, 1.0);
    p.w = random_piecewise(rng, -1.2, 0.0, 0.7, 1.4);
    p.left = robin_from_angle(0.8);
    p.right = DirichletValueBC{};
    Complex zeta(2.0, 1.0), trace(0.7, -0.4);
    auto bs = solve_boundary(p, zeta, trace);
    CHECK(std::abs(bs.sol.value.back() - trace) < 1e-10);
    RobinBC rb = std::get<RobinBC>(p.left);
    CHECK(std::abs(rb.c * bs.sol.value.front() + rb.s * bs.sol.deriv.front()) < 1e-9);
    double resid = oracles::max_ode_residual(bs.sol, [&](double x) { return p.q(x); },
                                             [&](double x) { return p.w(x); }, zeta,
                                             [](double) { return Complex{}; },
                                             p.q.breakpoints());
    CHECK(resid < 1e-8);
}

TEST_CASE("nonhomogeneous solve accepts sampled right-hand sides") {
    SLProblem p = make_problem(0.0, 1.0);
    Complex zeta(-2.0, 0.7);
    auto f = [](double x) { return Complex(std::sin(kPi * x), 0.25 * x); };
    auto direct = solve_nonhomogeneous(p, zeta, f);
    ComplexGridFunction fg;
    fg.x = uniform_grid(0.0, 1.0, 801);
    for (double x : fg.x) {
        fg.value.push_back(f(x));
        fg.deriv.push_back(Complex(kPi * std::cos(kPi * x), 0.25));
    }
    auto sampled = solve_nonhomogeneous(p, zeta, fg);
    double worst = 0.0, scale = 0.0;
    for (size_t i = 0; i < direct.size(); i += 59) {
        worst = std::max(worst, std::abs(direct.value[i] - sampled.value[i]));
        scale = std::max(scale, std::abs(direct.value[i]));
    }
    CHECK(worst < 1e-9 * std::max(scale, 1.0));
}

TEST_CASE("nonhomogeneous solve: linearity and symmetry") {
    std::mt19937_64 rng(77);
    SLProblem p;
    p.iv = {0.0, 1.0};
    p.q = random_piecewise(rng, 0.0, 1.0, -1.0, 1.0);
    p.w = random_piecewise(rng, 0.0, 1.0, 0.6, 1.5);
    p.left = RobinBC{1.0, 0.0};
    p.right = robin_from_angle(0.9);

    auto f = [](double x) { return Complex(std::sin(2.0 * x), 0.0); };
    auto g = [](double x) { return Complex(std::cos(x) - 0.3, 0.0); };
    Complex al(0.7, 0.0), be(-1.3, 0.0);
    Complex zeta(-4.0, 0.0);
    auto yf = solve_nonhomogeneous(p, zeta, f);
    auto yg = solve_nonhomogeneous(p, zeta, g);
    auto yfg = solve_nonhomogeneous(
        p, zeta, [&](double x) { return al * f(x) + be * g(x); });
    double scale = 0.0, worst = 0.0;
    for (size_t i = 0; i < yf.size(); ++i) {
        Complex want = al * yf.value[i] + be * yg.value[i];
        worst = std::max(worst, std::abs(yfg.value[i] - want));
        scale = std::max(scale, std::abs(want));
    }
    CHECK(worst <= 1e-12 * scale);

    // <R f, g>_w = <f, R g>_w for real zeta below the spectrum
    auto inner = [&](const std::function<Complex(double)>& u,
                     const std::function<Complex(double)>& v) {
        double acc = 0.0;
        int n = 4000;
        for (int i = 0; i <= n; ++i) {
            double x = i / double(n);
            double wgt = (i == 0 || i == n) ? 0.5 : 1.0;
            acc += wgt * (u(x) * std::conj(v(x))).real() * p.w(x) / n;
        }
        return acc;
    };
    double lhs = inner([&](double x) { return yf.eval(x); }, g);
    double rhs = inner(f, [&](double x) { return yg.eval(x); });
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}
