#pragma once

#include <functional>
#include <vector>

#include "masslab/block_space.hpp"
#include "masslab/grid_function.hpp"
#include "masslab/problem_spec.hpp"
#include "masslab/sl_solver.hpp"

namespace masslab {

// Eigenpair of the perturbed problem in three-interval form: physical outer
// pieces and the inner piece in the rescaled variable t = x/eps. The
// composite function has unit norm in L2(r_eps, (a,b)), i.e.
// |outer_left|^2_r + eps^-1 |inner|^2_h + |outer_right|^2_r = 1.
struct PerturbedEigenpair {
    int index = 0;  // 0-based oscillation count
    double eps = 0.0;
    double lambda = 0.0;
    GridFunction outer_left;   // on (a, -eps)
    GridFunction inner;        // on (-1, 1)
    GridFunction outer_right;  // on (eps, b)
};

// 2x2 complex transfer matrix mapping (y, y') across an interval for
// -y'' + (q - lambda w) y = 0; det = 1 up to integrator accuracy.
struct TransferMatrix {
    Complex m00{1.0}, m01{0.0}, m10{0.0}, m11{1.0};
    Complex det() const { return m00 * m11 - m01 * m10; }
    std::pair<Complex, Complex> apply(Complex y, Complex dy) const {
        return {m00 * y + m01 * dy, m10 * y + m11 * dy};
    }
    TransferMatrix then(const TransferMatrix& next) const {  // composition next * this
        return {next.m00 * m00 + next.m01 * m10, next.m00 * m01 + next.m01 * m11,
                next.m10 * m00 + next.m11 * m10, next.m10 * m01 + next.m11 * m11};
    }
};

TransferMatrix transfer_matrix(const std::function<double(double)>& q,
                               const std::function<double(double)>& w, Complex lambda, double x0,
                               double x1, const std::vector<double>& breaks = {});

// transfer matrices of the three stages composed with the junction
// scalings of the coupling conditions; lambda may be complex
TransferMatrix perturbed_transfer(const ProblemSpec& spec, double eps, Complex lambda);

// real-valued shooting mismatch ell_b applied to the transported left
// boundary seed; zero exactly at the perturbed eigenvalues
double characteristic_function(const ProblemSpec& spec, double eps, double lambda);

// composite Prufer angle at b (junction remaps preserve the winding count)
double perturbed_prufer_end(const ProblemSpec& spec, double eps, double lambda);
int perturbed_count_below(const ProblemSpec& spec, double eps, double lambda);

std::vector<PerturbedEigenpair> perturbed_eigenvalues(const ProblemSpec& spec, double eps,
                                                      int n_max, const SolveOptions& opt = {});
PerturbedEigenpair perturbed_eigenpair_at_index(const ProblemSpec& spec, double eps, int index,
                                                const SolveOptions& opt = {});

// all perturbed eigenvalues below the cutoff
std::vector<double> perturbed_spectrum_below(const ProblemSpec& spec, double eps, double cutoff,
                                             const SolveOptions& opt = {});

double perturbed_distance_to_spectrum(const ProblemSpec& spec, double eps, Complex zeta,
                                      double horizon = 1.0);

// Action of the perturbed resolvent in the coordinates of
// L2(r,(a,0)) x L2(h,(-1,1)) x L2(r,(0,b)): solves the coupled system with
// homogeneous outer conditions and the four coupling conditions, then
// extends the outer solutions across the inner region.
ResolventTriple apply_perturbed_resolvent(const ProblemSpec& spec, double eps, Complex zeta,
                                          const BlockFunction& f_a, const BlockFunction& f_0,
                                          const BlockFunction& f_b, const SolveOptions& opt = {});

// homogeneous composite solutions sampled for the resolvent discretization
struct PerturbedFundamental {
    // left-seeded solution: outer samples physical, inner samples rescaled
    std::vector<Complex> l_a, l_da, l_t, l_dt, l_b, l_db;
    std::vector<Complex> r_a, r_da, r_t, r_dt, r_b, r_db;
    Complex l_me, l_dme, l_pe, l_dpe;  // left-seeded (y, y') at -eps / +eps
    Complex r_me, r_dme, r_pe, r_dpe;
    Complex wron;  // physical Wronskian, constant
};

PerturbedFundamental perturbed_fundamental(const ProblemSpec& spec, double eps, Complex zeta,
                                           const std::vector<double>& nodes_a,
                                           const std::vector<double>& nodes_t,
                                           const std::vector<double>& nodes_b);

}  // namespace masslab
