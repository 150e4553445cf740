#pragma once

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "masslab/defaults.hpp"

namespace masslab {

template <size_t N>
using OdeState = std::array<double, N>;

// Integrate y' = rhs(x, y) from x0 to x1 (either direction), restarting at
// the interior breakpoints so the adaptive stepper never straddles a
// coefficient kink. on_sample(i, state) fires for each requested sample
// point, where i indexes the `samples` array (any order on input).
template <size_t N, class RHS>
void integrate_path(RHS&& rhs, OdeState<N>& y, double x0, double x1,
                    const std::vector<double>& interior_breaks,
                    const std::vector<double>& samples,
                    const std::function<void(size_t, const OdeState<N>&)>& on_sample = {},
                    double abs_tol = defaults::ode_abs_tol, double rel_tol = defaults::ode_rel_tol) {
    namespace odeint = boost::numeric::odeint;
    using State = OdeState<N>;

    const double dir = (x1 >= x0) ? 1.0 : -1.0;
    const double span = std::fabs(x1 - x0);

    struct Stop {
        double x;
        long sample_idx;  // -1 for plain breakpoints
    };
    const double tol = 1e-12 * (span + std::fabs(x0) + std::fabs(x1));
    std::vector<Stop> stops;
    stops.reserve(interior_breaks.size() + samples.size() + 1);
    for (double b : interior_breaks)
        if ((b - x0) * dir > tol && (x1 - b) * dir > tol) stops.push_back({b, -1});
    for (size_t i = 0; i < samples.size(); ++i) {
        double s = samples[i];
        if ((s - x0) * dir >= -tol && (x1 - s) * dir >= -tol) {
            if ((s - x0) * dir < 0.0) s = x0;
            if ((x1 - s) * dir < 0.0) s = x1;
            stops.push_back({s, static_cast<long>(i)});
        }
    }
    stops.push_back({x1, -1});
    std::stable_sort(stops.begin(), stops.end(),
                     [dir](const Stop& a, const Stop& b) { return a.x * dir < b.x * dir; });

    auto wrapped = [&rhs](const State& s, State& ds, double x) { rhs(x, s, ds); };
    auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>());

    double x = x0;
    for (const Stop& st : stops) {
        if (std::fabs(st.x - x) > 0.0) {
            double dt = dir * std::max(1e-14, std::min(span / 64.0, std::fabs(st.x - x)));
            odeint::integrate_adaptive(stepper, wrapped, y, x, st.x, dt);
            x = st.x;
        }
        if (st.sample_idx >= 0 && on_sample) on_sample(static_cast<size_t>(st.sample_idx), y);
    }
}

}  // namespace masslab
