#include "masslab/builtin_specs.hpp"

#include <cmath>
#include <random>

#include "masslab/errors.hpp"

namespace masslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

ProblemSpec constant_spec(std::string name, double a, double b, double alpha, double beta) {
    ProblemSpec s;
    s.name = std::move(name);
    s.a = a;
    s.b = b;
    s.alpha = alpha;
    s.beta = beta;
    s.q = CoefficientFunction::constant(0.0, {a, b});
    s.r = CoefficientFunction::constant(1.0, {a, b});
    s.h = CoefficientFunction::constant(1.0, {-1.0, 1.0});
    return s;
}

ProblemSpec random_spec(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&rng](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    ProblemSpec s;
    s.name = "random-generic";
    s.a = -uni(0.9, 1.4);
    s.b = uni(1.0, 1.6);
    s.alpha = uni(0.1, 1.4);
    s.beta = uni(1.6, 3.0);

    // bounded piecewise-linear potential over three pieces
    double m1 = s.a + (s.b - s.a) * uni(0.25, 0.45);
    double m2 = s.a + (s.b - s.a) * uni(0.55, 0.8);
    std::vector<CoefficientFunction::PolyPiece> qp;
    qp.push_back({s.a, m1, {uni(-1.5, 1.5), uni(-0.8, 0.8)}});
    qp.push_back({m1, m2, {uni(-1.5, 1.5), uni(-0.8, 0.8)}});
    qp.push_back({m2, s.b, {uni(-1.5, 1.5), uni(-0.8, 0.8)}});
    s.q = CoefficientFunction::piecewise_poly(std::move(qp));

    // uniformly positive piecewise-linear outer weight
    double mr = s.a + (s.b - s.a) * uni(0.4, 0.6);
    double span_l = mr - s.a, span_r = s.b - mr;
    double r0 = uni(0.7, 1.4), r1 = uni(0.7, 1.4), r2 = uni(0.7, 1.4);
    std::vector<CoefficientFunction::PolyPiece> rp;
    rp.push_back({s.a, mr, {r0, (r1 - r0) / span_l}});
    rp.push_back({mr, s.b, {r1, (r2 - r1) / span_r}});
    s.r = CoefficientFunction::piecewise_poly(std::move(rp));

    // positive grid-sampled inner weight
    std::vector<double> xs{-1.0, -0.5, 0.0, 0.5, 1.0}, vs;
    for (size_t i = 0; i < xs.size(); ++i) vs.push_back(uni(0.7, 1.8));
    s.h = CoefficientFunction::grid_linear(std::move(xs), std::move(vs));
    return s;
}

}  // namespace

std::vector<BuiltinEntry> builtin_specs() {
    return {
        {"neumann-trivial", "a=-1, b=1, Neumann ends, unit coefficients; lambda_1 = 0 exactly"},
        {"dirichlet-symmetric", "a=-1, b=1, Dirichlet ends, unit coefficients; triple clusters"},
        {"dirichlet-wide", "a=-1, b=2, Dirichlet ends; right/inner coincidences"},
        {"jordan-left", "a=-2, b=1, Dirichlet ends; left/inner Jordan chain at pi^2/4"},
        {"simple-left", "a=-sqrt(2), b=1, Dirichlet ends; simple left eigenvalue pi^2/2"},
        {"random-generic", "seeded piecewise coefficients, generically simple spectrum"},
    };
}

ProblemSpec builtin_spec(const std::string& name, std::uint64_t seed) {
    if (name == "neumann-trivial")
        return constant_spec(name, -1.0, 1.0, kPi / 2.0, kPi / 2.0);
    if (name == "dirichlet-symmetric") return constant_spec(name, -1.0, 1.0, 0.0, 0.0);
    if (name == "dirichlet-wide") return constant_spec(name, -1.0, 2.0, 0.0, 0.0);
    if (name == "jordan-left") return constant_spec(name, -2.0, 1.0, 0.0, 0.0);
    if (name == "simple-left") return constant_spec(name, -std::sqrt(2.0), 1.0, 0.0, 0.0);
    if (name == "random-generic") return random_spec(seed);
    throw DomainError("unknown builtin spec '" + name + "'");
}

}  // namespace masslab
