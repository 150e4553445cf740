#pragma once

#include <string>

#include "masslab/problem_spec.hpp"

namespace masslab {

// Parse a problem spec from the key-value text format:
//
//   name = label            # optional
//   a = -1.0
//   b = 1.0
//   alpha = 0.0             # Robin angle at a (0 Dirichlet, pi/2 Neumann)
//   beta = 0.0
//   [q]                     # then one block per coefficient: q, r, h
//   kind = constant
//   value = 0.0
//   [r]
//   kind = piecewise        # piece = x0 x1 c0 [c1 c2 ...], poly in (x-x0)
//   piece = -1.0 1.0  1.0
//   [h]
//   kind = grid             # sample = x value, linear interpolation
//   sample = -1.0 1.0
//   sample =  1.0 1.0
//
// '#' starts a comment. Angles accept the literals "pi/2", "-pi/2", "pi".
// Throws ParseError with a line number on malformed input.
ProblemSpec parse_spec_string(const std::string& text);
ProblemSpec parse_spec_file(const std::string& path);

}  // namespace masslab
