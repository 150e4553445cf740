#include "masslab/problem_spec.hpp"

#include <cmath>

#include "masslab/defaults.hpp"
#include "masslab/errors.hpp"

namespace masslab {

ValidationReport validate_spec(const ProblemSpec& spec) {
    ValidationReport rep;
    auto flag = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.issues.push_back(msg);
    };

    if (!(spec.a < 0.0)) flag("left endpoint must satisfy a < 0");
    if (!(spec.b > 0.0)) flag("right endpoint must satisfy b > 0");
    if (!(spec.a < spec.b)) flag("interval is empty");
    if (!std::isfinite(spec.alpha) || !std::isfinite(spec.beta)) flag("boundary angle not finite");

    try {
        if (spec.r.grid_min() < defaults::positivity_floor) flag("weight r not uniformly positive");
    } catch (const std::exception& e) {
        flag(std::string("weight r: ") + e.what());
    }
    try {
        if (spec.h.grid_min() < defaults::positivity_floor) flag("weight h not uniformly positive");
    } catch (const std::exception& e) {
        flag(std::string("weight h: ") + e.what());
    }
    try {
        if (!std::isfinite(spec.q.grid_max_abs())) flag("potential q unbounded on sample grid");
    } catch (const std::exception& e) {
        flag(std::string("potential q: ") + e.what());
    }

    if (spec.a < 0.0 && spec.b > 0.0) {
        if (spec.q.domain().lo > spec.a || spec.q.domain().hi < spec.b) flag("q does not cover (a,b)");
        if (spec.r.domain().lo > spec.a || spec.r.domain().hi < spec.b) flag("r does not cover (a,b)");
        if (spec.h.domain().lo > -1.0 || spec.h.domain().hi < 1.0) flag("h does not cover (-1,1)");
    }
    return rep;
}

EpsWeight::EpsWeight(ProblemSpec s, double e) : spec(std::move(s)), eps(e) {
    if (!(eps > 0.0) || eps >= std::min(-spec.a, spec.b))
        throw DomainError("eps must satisfy 0 < eps < min(-a, b)");
}

double EpsWeight::operator()(double x) const {
    if (x < spec.a || x > spec.b) throw DomainError("weight queried outside (a,b)");
    if (std::fabs(x) < eps) return spec.h(x / eps) / (eps * eps);
    return spec.r(x);
}

}  // namespace masslab
