#include "masslab/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "masslab/defaults.hpp"
#include "masslab/errors.hpp"

namespace masslab {

struct CoefficientFunction::Body {
    enum class Kind { Constant, PiecewisePoly, GridLinear } kind;
    double value = 0.0;                 // Constant
    std::vector<PolyPiece> pieces;      // PiecewisePoly, sorted by x0
    std::vector<double> xs, vs;         // GridLinear
    Interval domain;

    double eval(double x) const {
        switch (kind) {
            case Kind::Constant:
                return value;
            case Kind::PiecewisePoly: {
                // last piece whose x0 <= x; joints use the right piece
                auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                                           [](double v, const PolyPiece& p) { return v < p.x0; });
                if (it != pieces.begin()) --it;
                const PolyPiece& p = *it;
                double t = x - p.x0, acc = 0.0;
                for (auto c = p.coeffs.rbegin(); c != p.coeffs.rend(); ++c) acc = acc * t + *c;
                return acc;
            }
            case Kind::GridLinear: {
                auto it = std::upper_bound(xs.begin(), xs.end(), x);
                if (it == xs.begin()) return vs.front();
                if (it == xs.end()) return vs.back();
                size_t i = static_cast<size_t>(it - xs.begin());
                double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                return (1.0 - w) * vs[i - 1] + w * vs[i];
            }
        }
        return 0.0;
    }

    std::vector<double> interior_breaks() const {
        std::vector<double> out;
        if (kind == Kind::PiecewisePoly) {
            for (size_t i = 1; i < pieces.size(); ++i) out.push_back(pieces[i].x0);
        } else if (kind == Kind::GridLinear) {
            out.assign(xs.begin() + 1, xs.end() - 1);
        }
        return out;
    }
};

CoefficientFunction CoefficientFunction::constant(double value, Interval domain) {
    auto b = std::make_shared<Body>();
    b->kind = Body::Kind::Constant;
    b->value = value;
    b->domain = domain;
    CoefficientFunction f;
    f.body_ = std::move(b);
    f.domain_ = domain;
    return f;
}

CoefficientFunction CoefficientFunction::piecewise_poly(std::vector<PolyPiece> pieces) {
    if (pieces.empty()) throw DomainError("piecewise coefficient needs at least one piece");
    std::sort(pieces.begin(), pieces.end(),
              [](const PolyPiece& a, const PolyPiece& b) { return a.x0 < b.x0; });
    for (size_t i = 0; i < pieces.size(); ++i) {
        if (pieces[i].coeffs.empty()) throw DomainError("piece without coefficients");
        if (!(pieces[i].x0 < pieces[i].x1)) throw DomainError("piece with empty interval");
        if (i > 0 && std::fabs(pieces[i].x0 - pieces[i - 1].x1) > 1e-14 * (1.0 + std::fabs(pieces[i].x0)))
            throw DomainError("pieces must tile the interval without gaps");
    }
    auto b = std::make_shared<Body>();
    b->kind = Body::Kind::PiecewisePoly;
    b->domain = {pieces.front().x0, pieces.back().x1};
    b->pieces = std::move(pieces);
    CoefficientFunction f;
    f.domain_ = b->domain;
    f.body_ = std::move(b);
    return f;
}

CoefficientFunction CoefficientFunction::grid_linear(std::vector<double> xs, std::vector<double> values) {
    if (xs.size() < 2 || xs.size() != values.size())
        throw DomainError("grid coefficient needs >= 2 matching samples");
    if (!std::is_sorted(xs.begin(), xs.end())) throw DomainError("grid samples must be ascending");
    auto b = std::make_shared<Body>();
    b->kind = Body::Kind::GridLinear;
    b->domain = {xs.front(), xs.back()};
    b->xs = std::move(xs);
    b->vs = std::move(values);
    CoefficientFunction f;
    f.domain_ = b->domain;
    f.body_ = std::move(b);
    return f;
}

double CoefficientFunction::operator()(double x) const {
    if (!body_) throw DomainError("empty coefficient");
    double v = body_->eval(scale_ * x + shift_);
    if (!std::isfinite(v)) throw DomainError("coefficient not finite at sample point");
    return v;
}

std::vector<double> CoefficientFunction::breakpoints() const {
    std::vector<double> out;
    if (!body_) return out;
    for (double s : body_->interior_breaks()) {
        double x = (s - shift_) / scale_;
        if (x > domain_.lo && x < domain_.hi) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    return out;
}

CoefficientFunction CoefficientFunction::restricted(Interval sub) const {
    CoefficientFunction f = *this;
    f.domain_ = sub;
    return f;
}

CoefficientFunction CoefficientFunction::pulled_back(double scale, double shift, Interval new_domain) const {
    CoefficientFunction f = *this;
    f.scale_ = scale_ * scale;
    f.shift_ = scale_ * shift + shift_;
    f.domain_ = new_domain;
    return f;
}

double CoefficientFunction::grid_min() const {
    double m = (*this)(domain_.lo);
    const int n = defaults::validation_grid;
    for (int i = 1; i <= n; ++i)
        m = std::min(m, (*this)(domain_.lo + domain_.length() * i / n));
    for (double b : breakpoints()) m = std::min(m, (*this)(b));
    return m;
}

double CoefficientFunction::grid_max_abs() const {
    double m = std::fabs((*this)(domain_.lo));
    const int n = defaults::validation_grid;
    for (int i = 1; i <= n; ++i)
        m = std::max(m, std::fabs((*this)(domain_.lo + domain_.length() * i / n)));
    for (double b : breakpoints()) m = std::max(m, std::fabs((*this)(b)));
    return m;
}

}  // namespace masslab
