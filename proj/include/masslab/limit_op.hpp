#pragma once

#include <string>
#include <vector>

#include "masslab/block_space.hpp"
#include "masslab/problem_spec.hpp"
#include "masslab/sl_solver.hpp"

namespace masslab {

// The limit operator couples three self-adjoint blocks through the traces
// u(0) = w(-1), v(0) = w(1): a problem on (a,0) with the left boundary form
// and Dirichlet at 0, a Neumann problem on (-1,1) with weight h, and the
// mirrored problem on (0,b). The coupling makes the operator non-self-adjoint;
// its adjoint swaps the roles (Dirichlet-at-0 outer blocks, free inner ends)
// and couples derivative traces, phi_a'(0) = psi'(-1) and phi_b'(0) = psi'(1).
// Nothing here exercises the adjoint; the note is for orientation only.
SLProblem left_block(const ProblemSpec& spec);
SLProblem mid_block(const ProblemSpec& spec);
SLProblem right_block(const ProblemSpec& spec);

// same blocks with a Dirichlet trace end at the coupling point
SLProblem left_block_traced(const ProblemSpec& spec);
SLProblem right_block_traced(const ProblemSpec& spec);

enum class MultKind { simple, double_diagonal, double_jordan, triple_jordan };
std::string to_string(MultKind k);

// one merged limit eigenvalue with membership flags and multiplicity
struct LimitEigendata {
    double lambda = 0.0;
    bool in_left = false;   // sigma of the (a,0) block
    bool in_mid = false;    // sigma of the (-1,1) Neumann block
    bool in_right = false;  // sigma of the (0,b) block
    int alg_mult = 0;
    MultKind kind = MultKind::simple;
    int left_index = -1, mid_index = -1, right_index = -1;  // indices in the sub-spectra
    int first_global_index = 0;  // 0-based index in the multiplicity-counted list
};

// element of the root subspace; empty components are identically zero
struct LimitVector {
    GridFunction u;  // on (a,0)
    GridFunction w;  // on (-1,1)
    GridFunction v;  // on (0,b)
    bool is_root = false;
};

MultKind classify(bool in_left, bool in_mid, bool in_right);

// merged spectrum of the three blocks, ascending, covering at least n_max
// eigenvalues counted with algebraic multiplicity
std::vector<LimitEigendata> limit_spectrum(const ProblemSpec& spec, int n_max,
                                           const SolveOptions& opt = {});

// limit eigenvalues counted with multiplicity, flattened to a plain list
std::vector<double> flatten_with_multiplicity(const std::vector<LimitEigendata>& data);

// normalized eigenvectors spanning ker(A - lambda) for the given eigenvalue
std::vector<LimitVector> eigenvector_basis(const ProblemSpec& spec, const LimitEigendata& data,
                                           const SolveOptions& opt = {});

// Jordan data for the double_jordan / triple_jordan cases. Sign conventions
// inside the construction: the mid mode has w(-1) > 0 and the outer modes
// have positive derivative at the coupling point.
struct RootVectorData {
    double c0 = 0.0;       // solvability constant
    double c1 = 0.0, c2 = 0.0;  // triple case only; c2 = 1 canonically
    LimitVector root;      // (A - lambda) root = eigenvector
    LimitVector eigenvector;
    double jordan_residual = 0.0;   // block-space norm of (A-lambda)root - eigenvector
    double coupling_mismatch = 0.0; // trace defects of the root vector
    double obstruction = 0.0;       // |<h w, w>| blocking a second root solve
};

RootVectorData root_vector(const ProblemSpec& spec, const LimitEigendata& data,
                           const SolveOptions& opt = {});

struct ThetaFactor {
    double theta = 0.0;
    double norm2_left = 0.0;   // |T_a(lambda) w|^2 over (a,0)
    double norm2_right = 0.0;  // |T_b(lambda) w|^2 over (0,b)
};

// normalizing factor for the two-sided limit mode of a simple mid-block
// eigenvalue: theta = (norm2_left + norm2_right)^-1, exponent -1 as printed
ThetaFactor theta_factor(const ProblemSpec& spec, const LimitEigendata& data,
                         const SolveOptions& opt = {});

// block resolvent: (R(A_a)f_a + T_a(z)[R(B)f_0](-1), R(B)f_0,
//                   R(A_b)f_b + T_b(z)[R(B)f_0](+1))
ResolventTriple apply_limit_resolvent(const ProblemSpec& spec, Complex zeta,
                                      const BlockFunction& f_a, const BlockFunction& f_0,
                                      const BlockFunction& f_b, const SolveOptions& opt = {});

}  // namespace masslab
