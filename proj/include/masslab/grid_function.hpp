#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "masslab/defaults.hpp"
#include "masslab/errors.hpp"

namespace masslab {

// Sampled function with derivative samples on an ascending grid.
// Evaluation between nodes uses cubic Hermite interpolation, so values
// carry the integrator's accuracy, not the grid spacing squared.
template <typename T>
struct GridFunctionT {
    std::vector<double> x;
    std::vector<T> value;
    std::vector<T> deriv;

    size_t size() const { return x.size(); }
    bool empty() const { return x.empty(); }

    T eval(double xx) const { return hermite(xx).first; }
    T eval_deriv(double xx) const { return hermite(xx).second; }

    std::pair<T, T> hermite(double xx) const {
        if (empty()) throw DomainError("empty grid function");
        if (xx <= x.front()) return {value.front(), deriv.front()};
        if (xx >= x.back()) return {value.back(), deriv.back()};
        auto it = std::upper_bound(x.begin(), x.end(), xx);
        size_t i = static_cast<size_t>(it - x.begin()) - 1;
        double h = x[i + 1] - x[i];
        double s = (xx - x[i]) / h;
        double s2 = s * s, s3 = s2 * s;
        double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        T v = h00 * value[i] + h10 * h * deriv[i] + h01 * value[i + 1] + h11 * h * deriv[i + 1];
        double g00 = (6 * s2 - 6 * s) / h, g10 = 3 * s2 - 4 * s + 1;
        double g01 = (-6 * s2 + 6 * s) / h, g11 = 3 * s2 - 2 * s;
        T d = g00 * value[i] + g10 * deriv[i] + g01 * value[i + 1] + g11 * deriv[i + 1];
        return {v, d};
    }
};

using GridFunction = GridFunctionT<double>;
using ComplexGridFunction = GridFunctionT<Complex>;

inline std::vector<double> uniform_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    g.front() = lo;
    g.back() = hi;  // exact endpoints regardless of rounding
    return g;
}

inline ComplexGridFunction to_complex(const GridFunction& f) {
    ComplexGridFunction g;
    g.x = f.x;
    g.value.assign(f.value.begin(), f.value.end());
    g.deriv.assign(f.deriv.begin(), f.deriv.end());
    return g;
}

}  // namespace masslab
