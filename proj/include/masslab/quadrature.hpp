#pragma once

#include <functional>
#include <vector>

namespace masslab {

struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
    size_t size() const { return x.size(); }
};

// Gauss-Legendre nodes/weights on [lo, hi]
QuadRule gauss_legendre(int n, double lo, double hi);

// composite rule: n nodes between each pair of consecutive cut points
QuadRule composite_gauss_legendre(int n, const std::vector<double>& cuts);

double integrate(const QuadRule& q, const std::function<double(double)>& f);

// adaptive-free convenience: GL panels split at the given breakpoints
double integrate_piecewise(const std::function<double(double)>& f, double lo, double hi,
                           const std::vector<double>& breaks, int nodes_per_panel = 64);

}  // namespace masslab
