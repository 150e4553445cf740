#pragma once

#include <functional>
#include <vector>

#include "masslab/grid_function.hpp"
#include "masslab/sl_problem.hpp"

namespace masslab {

struct Eigenpair {
    int index = 0;       // oscillation count, 0-based
    double lambda = 0.0;
    GridFunction efun;   // unit norm in L2(w), sign-fixed
};

struct BoundarySolution {
    Complex zeta;
    Complex trace;
    ComplexGridFunction sol;
};

struct SolveOptions {
    int samples = defaults::samples_per_interval;
    double eig_tol = defaults::eig_tol;
};

// Prufer angle at the right endpoint; strictly increasing in lambda.
// Eigenvalue n solves prufer_end = right_target + n*pi.
double prufer_end(const SLProblem& p, double lambda);
double prufer_left_angle(const SLProblem& p);    // in [0, pi)
double prufer_right_target(const SLProblem& p);  // in (0, pi]

// number of eigenvalues strictly below lambda
int count_below(const SLProblem& p, double lambda);

// first n_max eigenvalues with normalized eigenfunctions, ascending
std::vector<Eigenpair> eigenvalues(const SLProblem& p, int n_max, const SolveOptions& opt = {});

// single indexed eigenpair; extra_points are merged into the sample grid
Eigenpair eigenpair_at_index(const SLProblem& p, int index, const SolveOptions& opt = {},
                             const std::vector<double>& extra_points = {});

// value and derivative of the normalized eigenfunction at x;
// lambda must match an eigenvalue within matching tolerance
std::pair<double, double> eigenfunction_at(const SLProblem& p, double lambda, double x,
                                           const SolveOptions& opt = {});

// Solve -y'' + q y - zeta w y = 0 with the homogeneous Robin condition at
// one end and y = trace at the other (the end carrying DirichletValueBC).
BoundarySolution solve_boundary(const SLProblem& p, Complex zeta, Complex trace,
                                const SolveOptions& opt = {});

// Solve -y'' + q y - zeta w y = w f with homogeneous conditions at both ends.
ComplexGridFunction solve_nonhomogeneous(const SLProblem& p, Complex zeta,
                                         const std::function<Complex(double)>& f,
                                         const SolveOptions& opt = {});
ComplexGridFunction solve_nonhomogeneous(const SLProblem& p, Complex zeta,
                                         const ComplexGridFunction& f, const SolveOptions& opt = {});

// distance from zeta to the spectrum of the fully homogeneous problem,
// capped at `horizon`; used for the near-singularity guard
double distance_to_spectrum(const SLProblem& p, Complex zeta, double horizon = 1.0);

}  // namespace masslab
