#pragma once

#include <memory>
#include <vector>

namespace masslab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Scalar coefficient on an interval: constant, piecewise polynomial or
// grid-sampled with linear interpolation. Immutable after construction;
// restriction and affine pullback (needed for q(eps*t)) are lazy views
// onto the same body, so copies are cheap and thread-safe.
class CoefficientFunction {
public:
    struct PolyPiece {
        double x0, x1;
        std::vector<double> coeffs;  // value = sum coeffs[k] * (x - x0)^k
    };

    static CoefficientFunction constant(double value, Interval domain);
    static CoefficientFunction piecewise_poly(std::vector<PolyPiece> pieces);
    static CoefficientFunction grid_linear(std::vector<double> xs, std::vector<double> values);

    double operator()(double x) const;
    const Interval& domain() const { return domain_; }

    // interior points where smoothness may break, ascending
    std::vector<double> breakpoints() const;

    CoefficientFunction restricted(Interval sub) const;
    // g(t) = f(scale*t + shift) for t in new_domain
    CoefficientFunction pulled_back(double scale, double shift, Interval new_domain) const;

    // extrema sampled on the validation grid plus all breakpoints
    double grid_min() const;
    double grid_max_abs() const;

private:
    struct Body;
    std::shared_ptr<const Body> body_;
    double scale_ = 1.0;   // evaluation uses body at scale_*x + shift_
    double shift_ = 0.0;
    Interval domain_;
};

}  // namespace masslab
