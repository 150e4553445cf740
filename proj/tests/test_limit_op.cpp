#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "masslab/builtin_specs.hpp"
#include "masslab/errors.hpp"
#include "masslab/limit_op.hpp"
#include "masslab/quadrature.hpp"
#include "support/oracles.hpp"

using namespace masslab;
using oracles::kPi;

TEST_CASE("merged spectrum of the symmetric model") {
    auto spec = builtin_spec("dirichlet-symmetric");
    auto lim = limit_spectrum(spec, 9);
    std::vector<double> expect{0.0, kPi * kPi / 4, kPi * kPi, 9 * kPi * kPi / 4, 4 * kPi * kPi};
    std::vector<int> mult{1, 1, 3, 1, 3};
    REQUIRE(lim.size() >= 5);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(std::fabs(lim[i].lambda - expect[i]) <= 1e-8 * std::max(1.0, expect[i]));
        CHECK(lim[i].alg_mult == mult[i]);
    }
    CHECK(lim[2].kind == MultKind::triple_jordan);
    CHECK(lim[4].kind == MultKind::triple_jordan);
    auto flat = flatten_with_multiplicity(lim);
    CHECK(flat.size() >= 9);
    CHECK(flat[2] == doctest::Approx(kPi * kPi));
    CHECK(flat[4] == doctest::Approx(kPi * kPi));
}

TEST_CASE("wide model: right/inner coincidence is a double Jordan point") {
    auto spec = builtin_spec("dirichlet-wide");
    auto lim = limit_spectrum(spec, 4);
    // pi^2/4 sits in the right and inner sub-spectra only
    bool found = false;
    for (const auto& d : lim) {
        if (std::fabs(d.lambda - kPi * kPi / 4) < 1e-6) {
            found = true;
            CHECK(d.alg_mult == 2);
            CHECK(d.kind == MultKind::double_jordan);
            CHECK(d.in_right);
            CHECK(d.in_mid);
            CHECK_FALSE(d.in_left);
        }
    }
    CHECK(found);
}

TEST_CASE("generic spectrum is simple") {
    auto spec = builtin_spec("random-generic", 13);
    // oracle: the three sub-spectra computed independently stay separated
    auto el = eigenvalues(left_block(spec), 6);
    auto em = eigenvalues(mid_block(spec), 6);
    auto er = eigenvalues(right_block(spec), 6);
    std::vector<double> all;
    for (auto* v : {&el, &em, &er})
        for (auto& e : *v) all.push_back(e.lambda);
    std::sort(all.begin(), all.end());
    for (size_t i = 1; i < all.size(); ++i)
        CHECK(all[i] - all[i - 1] > defaults::merge_tol * std::max(1.0, std::fabs(all[i])));

    auto lim = limit_spectrum(spec, 6);
    for (const auto& d : lim) CHECK(d.alg_mult == 1);

    // union property: merged list equals the merged sub-spectra
    auto flat = flatten_with_multiplicity(lim);
    for (size_t i = 0; i < flat.size(); ++i)
        CHECK(flat[i] == doctest::Approx(all[i]).epsilon(1e-9));
}

TEST_CASE("classification table") {
    CHECK(classify(true, false, false) == MultKind::simple);
    CHECK(classify(false, true, false) == MultKind::simple);
    CHECK(classify(false, false, true) == MultKind::simple);
    CHECK(classify(true, false, true) == MultKind::double_diagonal);
    CHECK(classify(true, true, false) == MultKind::double_jordan);
    CHECK(classify(false, true, true) == MultKind::double_jordan);
    CHECK(classify(true, true, true) == MultKind::triple_jordan);
    CHECK_THROWS_AS(classify(false, false, false), DomainError);
}

TEST_CASE("eigenvector basis per kind") {
    auto spec = builtin_spec("dirichlet-symmetric");
    auto lim = limit_spectrum(spec, 9);

    // inner-only eigenvalue pi^2/4: two-sided trace vector
    {
        const auto& d = lim[1];
        REQUIRE((d.in_mid && !d.in_left && !d.in_right));
        auto basis = eigenvector_basis(spec, d);
        REQUIRE(basis.size() == 1);
        const auto& y = basis[0];
        REQUIRE_FALSE(y.u.empty());
        REQUIRE_FALSE(y.w.empty());
        REQUIRE_FALSE(y.v.empty());
        // closed forms: w = cos(pi (t+1)/2), u = sin(pi (x+1)/2), v = -sin(pi (x-1)/2)/1
        // after block normalization the scale is 1/sqrt(2)
        double s = 1.0 / std::sqrt(2.0);
        CHECK(y.u.eval(-0.5) == doctest::Approx(s * std::sin(kPi * 0.25)).epsilon(1e-8));
        CHECK(y.w.eval(0.0) == doctest::Approx(s * std::cos(kPi * 0.5)).epsilon(1e-8));
        CHECK(y.w.eval(-1.0) == doctest::Approx(s).epsilon(1e-8));
        CHECK(y.v.eval(0.5) == doctest::Approx(s * std::sin(-kPi * 0.25)).epsilon(1e-8));
        // trace couplings of the block vector
        CHECK(y.u.value.back() == doctest::Approx(y.w.value.front()).epsilon(1e-9));
        CHECK(y.v.value.front() == doctest::Approx(y.w.value.back()).epsilon(1e-9));
        // residual oracle on every component
        CHECK(oracles::max_ode_residual(y.u, [](double) { return 0.0; },
                                        [](double) { return 1.0; }, d.lambda) < 1e-8);
        CHECK(oracles::max_ode_residual(y.w, [](double) { return 0.0; },
                                        [](double) { return 1.0; }, d.lambda) < 1e-8);
    }

    // triple point: left and right eigenvectors with disjoint supports
    {
        const auto& d = lim[2];
        auto basis = eigenvector_basis(spec, d);
        REQUIRE(basis.size() == 2);
        CHECK_FALSE(basis[0].u.empty());
        CHECK(basis[0].v.empty());
        CHECK(basis[1].u.empty());
        CHECK_FALSE(basis[1].v.empty());
    }
}

TEST_CASE("near-singular trace solve flags a misclassification") {
    auto spec = builtin_spec("dirichlet-symmetric");
    // lambda = pi^2 lies in the left sub-spectrum: T_a(lambda) must refuse
    CHECK_THROWS_AS(solve_boundary(left_block_traced(spec), Complex(kPi * kPi, 0.0),
                                   Complex(1.0, 0.0)),
                    NearSingularError);
}

TEST_CASE("root vector: left Jordan chain of the a=-2 model") {
    auto spec = builtin_spec("jordan-left");
    auto lim = limit_spectrum(spec, 3);
    const LimitEigendata* d = nullptr;
    for (const auto& e : lim)
        if (std::fabs(e.lambda - kPi * kPi / 4) < 1e-6) d = &e;
    REQUIRE(d != nullptr);
    CHECK(d->kind == MultKind::double_jordan);
    CHECK(d->in_left);
    CHECK(d->in_mid);

    RootVectorData rv = root_vector(spec, *d);
    CHECK(rv.c0 == doctest::Approx(2.0 / kPi).epsilon(1e-8));
    CHECK(rv.jordan_residual <= defaults::jordan_tol);
    CHECK(rv.coupling_mismatch <= 1e-7);
    CHECK(rv.obstruction > 0.5);

    // solvability identity c0 * w(-1) * u'(0) = 1 with the returned data
    double w_m1 = rv.root.w.value.front() / rv.c0;
    double du0 = rv.eigenvector.u.deriv.back();
    CHECK(rv.c0 * w_m1 * du0 == doctest::Approx(1.0).epsilon(1e-9));

    // minimal-norm pinning: <u0, u_lambda>_r = 0
    double ip = integrate_piecewise(
        [&](double x) { return spec.r(x) * rv.root.u.eval(x) * rv.eigenvector.u.eval(x); },
        spec.a, 0.0, {}, 96);
    CHECK(std::fabs(ip) < 1e-8);
}

TEST_CASE("root vector: mirrored chain and the triple case") {
    // mirrored double: a=-sqrt(2) spec at lambda = pi^2 (right+inner)
    auto spec = builtin_spec("simple-left");
    auto lim = limit_spectrum(spec, 6);
    const LimitEigendata* d = nullptr;
    for (const auto& e : lim)
        if (std::fabs(e.lambda - kPi * kPi) < 1e-6) d = &e;
    REQUIRE(d != nullptr);
    REQUIRE(d->kind == MultKind::double_jordan);
    REQUIRE((d->in_right && d->in_mid && !d->in_left));
    RootVectorData rv = root_vector(spec, *d);
    // closed form from the solvability identity: c0 = -1/(w(1) v'(0)),
    // w = cos(pi(t+1)) so w(1) = 1, v = sqrt(2) sin(pi x) so v'(0) = sqrt(2) pi
    CHECK(rv.c0 == doctest::Approx(-1.0 / (std::sqrt(2.0) * kPi)).epsilon(1e-8));
    CHECK(rv.jordan_residual <= defaults::jordan_tol);
    CHECK(rv.obstruction > 0.5);

    // triple case on the symmetric model at pi^2
    auto sym = builtin_spec("dirichlet-symmetric");
    auto lim2 = limit_spectrum(sym, 5);
    RootVectorData tv = root_vector(sym, lim2[2]);
    CHECK(tv.c2 == doctest::Approx(1.0));
    CHECK(tv.c1 == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(tv.c0 == doctest::Approx(-1.0 / (std::sqrt(2.0) * kPi)).epsilon(1e-8));
    CHECK(tv.jordan_residual <= defaults::jordan_tol);
    CHECK(tv.coupling_mismatch <= 1e-7);

    // no root vector for the diagonal kinds
    LimitEigendata diag;
    diag.in_left = diag.in_right = true;
    diag.alg_mult = 2;
    diag.kind = MultKind::double_diagonal;
    CHECK_THROWS_AS(root_vector(sym, diag), DomainError);
}

TEST_CASE("root subspace has full dimension") {
    // Gram matrix of the eigenvectors plus the root vector in the block
    // inner product; dim span = algebraic multiplicity
    auto check_dim = [](const ProblemSpec& spec, const LimitEigendata& d) {
        auto basis = eigenvector_basis(spec, d);
        if (d.kind == MultKind::double_jordan || d.kind == MultKind::triple_jordan)
            basis.push_back(root_vector(spec, d).root);
        REQUIRE(static_cast<int>(basis.size()) == d.alg_mult);
        auto ip = [&](const LimitVector& A, const LimitVector& B) {
            double acc = 0.0;
            if (!A.u.empty() && !B.u.empty())
                acc += weighted_norm2([&](double x) { return A.u.eval(x) * B.u.eval(x); }, spec.r,
                                      spec.a, 0.0);
            if (!A.w.empty() && !B.w.empty())
                acc += weighted_norm2([&](double t) { return A.w.eval(t) * B.w.eval(t); }, spec.h,
                                      -1.0, 1.0);
            if (!A.v.empty() && !B.v.empty())
                acc += weighted_norm2([&](double x) { return A.v.eval(x) * B.v.eval(x); }, spec.r,
                                      0.0, spec.b);
            return acc;
        };
        const int m = d.alg_mult;
        Eigen::MatrixXd gram(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                gram(i, j) = ip(basis[size_t(i)], basis[size_t(j)]);
        // normalize the diagonal, then independence = smallest eigenvalue away from 0
        for (int i = 0; i < m; ++i) {
            double di = std::sqrt(gram(i, i));
            for (int j = 0; j < m; ++j) {
                gram(i, j) /= di;
                gram(j, i) /= di;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        CHECK(es.eigenvalues().minCoeff() > 1e-3);
    };
    auto sym = builtin_spec("dirichlet-symmetric");
    auto lim = limit_spectrum(sym, 5);
    check_dim(sym, lim[2]);  // triple
    auto jl = builtin_spec("jordan-left");
    auto lim2 = limit_spectrum(jl, 3);
    for (const auto& d : lim2)
        if (d.kind == MultKind::double_jordan) check_dim(jl, d);
}

TEST_CASE("theta factor") {
    auto spec = builtin_spec("dirichlet-symmetric");
    auto lim = limit_spectrum(spec, 9);
    // lambda = pi^2/4: closed-form norms |T w|^2 = 1/2 on each side
    ThetaFactor th = theta_factor(spec, lim[1]);
    CHECK(th.norm2_left == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(th.norm2_right == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(th.theta == doctest::Approx(1.0).epsilon(1e-9));

    // reflection-symmetric spec: theta = 1/(2 |T_b w|^2)
    CHECK(th.theta == doctest::Approx(1.0 / (2.0 * th.norm2_right)).epsilon(1e-9));
    CHECK(th.theta > 0.0);

    // simple-left: lambda_1 = 0 is inner-only; theta still positive
    auto spec2 = builtin_spec("simple-left");
    auto lim2 = limit_spectrum(spec2, 2);
    ThetaFactor th2 = theta_factor(spec2, lim2[0]);
    CHECK(th2.theta > 0.0);

    CHECK_THROWS_AS(theta_factor(spec, lim[2]), DomainError);  // triple point
}

TEST_CASE("limit resolvent: block structure and residuals") {
    auto spec = builtin_spec("dirichlet-symmetric");
    Complex zeta(0.0, 1.0);
    auto zero = [](double) { return Complex{}; };
    auto fa = [](double x) { return Complex(std::sin(kPi * x), 0.0); };

    // F = (f_a, 0, 0): only the left block responds
    auto t = apply_limit_resolvent(spec, zeta, fa, zero, zero);
    for (auto& v : t.mid.value) CHECK(std::abs(v) < 1e-300);
    for (auto& v : t.right.value) CHECK(std::abs(v) < 1e-300);
    auto direct = solve_nonhomogeneous(left_block(spec), zeta, fa);
    for (size_t i = 0; i < t.left.size(); i += 131)
        CHECK(std::abs(t.left.value[i] - direct.value[i]) < 1e-12);

    // F = 0 -> 0
    auto t0 = apply_limit_resolvent(spec, zeta, zero, zero, zero);
    for (auto& v : t0.left.value) CHECK(std::abs(v) < 1e-300);

    // random smooth F: ODE residuals, Neumann mid conditions, trace couplings
    auto f0 = [](double tt) { return Complex(std::cos(2.0 * tt) + 0.3, -0.2 * tt); };
    auto fb = [](double x) { return Complex(x * (1.0 - x), 0.1); };
    auto tr = apply_limit_resolvent(spec, zeta, fa, f0, fb);
    auto q = [&](double x) { return spec.q(x); };
    auto r = [&](double x) { return spec.r(x); };
    CHECK(oracles::max_ode_residual(tr.left, q, r, zeta, fa) <= 1e-8);
    CHECK(oracles::max_ode_residual(tr.mid, [](double) { return 0.0; },
                                    [&](double tt) { return spec.h(tt); }, zeta, f0) <= 1e-8);
    CHECK(oracles::max_ode_residual(tr.right, q, r, zeta, fb) <= 1e-8);
    CHECK(std::abs(tr.mid.deriv.front()) < 1e-8);  // Neumann at t=-1
    CHECK(std::abs(tr.mid.deriv.back()) < 1e-8);
    CHECK(std::abs(tr.left.value.back() - tr.mid.value.front()) < 1e-8);   // u(0) = w(-1)
    CHECK(std::abs(tr.right.value.front() - tr.mid.value.back()) < 1e-8);  // v(0) = w(+1)
    CHECK(std::abs(tr.left.value.front()) < 1e-9);   // ell_a
    CHECK(std::abs(tr.right.value.back()) < 1e-9);   // ell_b
}
