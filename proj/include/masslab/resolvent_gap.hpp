#pragma once

#include <Eigen/Dense>

#include "masslab/defaults.hpp"
#include "masslab/problem_spec.hpp"

namespace masslab {

// Shared quadrature discretization of the block space. The outer pieces are
// composite Gauss-Legendre grids split at -+eps so the perturbed kernels are
// integrated against panels aligned with their breakpoints.
struct BlockGrid {
    double eps = 0.0;
    std::vector<double> xa, wa;  // (a,0), panels [a,-eps] and [-eps,0]
    std::vector<double> tm, wm;  // (-1,1)
    std::vector<double> xb, wb;  // (0,b), panels [0,eps] and [eps,b]
    size_t n_half_a = 0;         // nodes in [a,-eps]
    size_t n_half_b = 0;         // nodes in [0,eps]
    size_t total() const { return xa.size() + tm.size() + xb.size(); }
};

BlockGrid make_block_grid(const ProblemSpec& spec, double eps, int nodes_per_piece);

// dense Nystrom realizations of the two resolvents on the shared grid
Eigen::MatrixXcd limit_resolvent_matrix(const ProblemSpec& spec, Complex zeta,
                                        const BlockGrid& grid);
Eigen::MatrixXcd perturbed_resolvent_matrix(const ProblemSpec& spec, double eps, Complex zeta,
                                            const BlockGrid& grid);

// operator norm in the weighted block geometry (largest singular value of
// D^1/2 M D^-1/2 with D the weight-times-quadrature diagonal)
double weighted_operator_norm(const Eigen::MatrixXcd& m, const ProblemSpec& spec,
                              const BlockGrid& grid);

struct ResolventGapResult {
    double gap = 0.0;          // at nodes_per_piece
    double gap_refined = 0.0;  // at twice the resolution
    bool resolved = false;     // refinement changed the value by <= 10%
};

ResolventGapResult resolvent_gap(const ProblemSpec& spec, double eps, Complex zeta,
                                 int nodes_per_piece = defaults::resolvent_nodes_per_piece);

}  // namespace masslab
