#pragma once

#include <functional>

#include "masslab/grid_function.hpp"
#include "masslab/problem_spec.hpp"

namespace masslab {

using BlockFunction = std::function<Complex(double)>;

// element of (or resolvent output in) the block space
//   L = L2(r,(a,0)) x L2(h,(-1,1)) x L2(r,(0,b))
struct ResolventTriple {
    ComplexGridFunction left;   // on (a, 0)
    ComplexGridFunction mid;    // on (-1, 1)
    ComplexGridFunction right;  // on (0, b)
};

// weighted L2 norm of a sampled function against the given weight
double weighted_norm2(const std::function<double(double)>& f2,
                      const CoefficientFunction& weight, double lo, double hi,
                      int nodes_per_panel = 64);

// squared block-space norm of a triple of sampled functions
double block_norm2(const ProblemSpec& spec, const ComplexGridFunction& left,
                   const ComplexGridFunction& mid, const ComplexGridFunction& right);

}  // namespace masslab
