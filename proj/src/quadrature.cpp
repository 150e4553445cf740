#include "masslab/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <memory>

#include "masslab/errors.hpp"

namespace masslab {

QuadRule gauss_legendre(int n, double lo, double hi) {
    if (n < 1) throw DomainError("quadrature order must be positive");
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)>
        table(gsl_integration_glfixed_table_alloc(static_cast<size_t>(n)),
              &gsl_integration_glfixed_table_free);
    QuadRule q;
    q.x.resize(static_cast<size_t>(n));
    q.w.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double xi, wi;
        gsl_integration_glfixed_point(lo, hi, static_cast<size_t>(i), &xi, &wi, table.get());
        q.x[static_cast<size_t>(i)] = xi;
        q.w[static_cast<size_t>(i)] = wi;
    }
    return q;
}

QuadRule composite_gauss_legendre(int n, const std::vector<double>& cuts) {
    if (cuts.size() < 2) throw DomainError("composite rule needs at least one panel");
    QuadRule q;
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        QuadRule p = gauss_legendre(n, cuts[k], cuts[k + 1]);
        q.x.insert(q.x.end(), p.x.begin(), p.x.end());
        q.w.insert(q.w.end(), p.w.begin(), p.w.end());
    }
    return q;
}

double integrate(const QuadRule& q, const std::function<double(double)>& f) {
    double acc = 0.0;
    for (size_t i = 0; i < q.size(); ++i) acc += q.w[i] * f(q.x[i]);
    return acc;
}

double integrate_piecewise(const std::function<double(double)>& f, double lo, double hi,
                           const std::vector<double>& breaks, int nodes_per_panel) {
    std::vector<double> cuts{lo};
    for (double b : breaks)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    return integrate(composite_gauss_legendre(nodes_per_panel, cuts), f);
}

}  // namespace masslab
