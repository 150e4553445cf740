#pragma once

#include <cmath>
#include <variant>

#include "masslab/coefficient.hpp"
#include "masslab/defaults.hpp"

namespace masslab {

// c*y + s*y' = 0 at the endpoint, stored normalized (c^2 + s^2 = 1)
struct RobinBC {
    double c = 1.0;
    double s = 0.0;
};

// y = value at the endpoint; value 0 is a plain Dirichlet condition
struct DirichletValueBC {
    Complex value{0.0, 0.0};
};

using EndpointBC = std::variant<RobinBC, DirichletValueBC>;

inline RobinBC robin_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

inline RobinBC normalized(RobinBC bc) {
    double n = std::hypot(bc.c, bc.s);
    return {bc.c / n, bc.s / n};
}

inline bool is_homogeneous(const EndpointBC& bc) {
    if (const auto* d = std::get_if<DirichletValueBC>(&bc)) return d->value == Complex{0.0, 0.0};
    return true;
}

// One self-adjoint sub-problem -y'' + q y = lambda w y on (left, right).
struct SLProblem {
    Interval iv;
    CoefficientFunction q;
    CoefficientFunction w;  // uniformly positive
    EndpointBC left{RobinBC{}};
    EndpointBC right{RobinBC{}};
};

}  // namespace masslab
