#pragma once

#include <complex>

namespace masslab {

using Complex = std::complex<double>;

// Numerical knobs shared across the library. Values are part of the
// documented behaviour (see README); change with care.
namespace defaults {

// per-step integrator tolerances
inline constexpr double ode_rel_tol = 1e-10;
inline constexpr double ode_abs_tol = 1e-12;

// eigenvalue tolerance: absolute for |lambda| <= 1, relative above
inline constexpr double eig_tol = 1e-9;

// minimal distance between zeta and a homogeneous eigenvalue before a
// boundary/nonhomogeneous solve is declared near-singular
inline constexpr double spectral_guard = 1e-6;

// default number of uniform output samples per interval
inline constexpr int samples_per_interval = 2048;

// coefficient positivity floor and validation grid size
inline constexpr double positivity_floor = 1e-12;
inline constexpr int validation_grid = 10000;

// coupling residual tolerance for perturbed eigenfunctions
inline constexpr double coupling_tol = 1e-8;

// relative tolerance for declaring two sub-spectral points coincident
inline constexpr double merge_tol = 1e-7;

// Jordan chain residual tolerance
inline constexpr double jordan_tol = 1e-6;

// traces |w(+-1)|, |u'(0)|, |v'(0)| below this abort the root-vector build
inline constexpr double degeneracy_tol = 1e-6;

// smallest admissible eps for the perturbed problem
inline constexpr double min_eps = 1e-6;

// quadrature nodes per piece for the resolvent discretization
inline constexpr int resolvent_nodes_per_piece = 512;

}  // namespace defaults
}  // namespace masslab
