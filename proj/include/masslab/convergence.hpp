#pragma once

#include <optional>
#include <string>
#include <vector>

#include "masslab/limit_op.hpp"
#include "masslab/perturbed.hpp"
#include "masslab/resolvent_gap.hpp"

namespace masslab {

struct SweepConfig {
    std::vector<double> eps_grid = {0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625};
    int n_track = 8;
    double truncation_lambda = 50.0;
    Complex zeta_probe{0.0, 1.0};
    int resolvent_nodes = defaults::resolvent_nodes_per_piece;
    bool with_resolvent = true;
    bool with_eigenfunctions = true;
    int workers = 0;  // 0: decide from environment / hardware
};

void validate_config(const SweepConfig& cfg);

struct PairRow {
    int n = 0;  // 0-based index
    double eps = 0.0;
    double lambda_eps = 0.0;
    double lambda_limit = 0.0;
    double gap = 0.0;
};

struct RateFit {
    int n = 0;
    double slope = 0.0;
    double c_sqrt = 0.0;  // max over the grid of gap / sqrt(eps)
    bool zero_gap = false;           // some exact-zero gaps: slope reported as infinity
    bool beyond_resolution = false;  // all gaps at solver noise level, no fit
    double monotone_from = 0.0;  // largest eps from which the gaps decrease monotonically
};

struct ClusterRow {
    double lambda = 0.0;
    int mult = 0;
    double radius = 0.0;
    double eps = 0.0;
    int count = 0;
};

struct HausdorffRow {
    double eps = 0.0;
    double dist = 0.0;
};

struct EfunGapRow {
    int n = 0;
    double eps = 0.0;
    double gap = 0.0;
    double limit_l2_norm = 0.0;  // empirical L2(r,I) norm of the limit candidate
};

struct SubspaceGapRow {
    double lambda = 0.0;
    int mult = 0;
    double eps = 0.0;
    double gap = 0.0;
};

struct ResolventGapRow {
    double eps = 0.0;
    double gap = 0.0;
    double gap_refined = 0.0;
    bool resolved = false;
};

struct ConvergenceReport {
    std::string spec_name;
    SweepConfig config;
    std::vector<LimitEigendata> limit;
    std::vector<PairRow> pairs;
    std::vector<RateFit> rates;
    std::vector<ClusterRow> clusters;
    std::vector<HausdorffRow> hausdorff;
    std::vector<EfunGapRow> efun_gaps;
    std::vector<SubspaceGapRow> subspace_gaps;
    std::vector<ResolventGapRow> resolvent_gaps;
    std::vector<std::string> anomalies;  // index vs nearest-neighbour disagreements
};

// pair lambda_n^eps with lambda_n by shared index (the limit list counted
// with algebraic multiplicity); lists must both cover 0..n_track-1
std::vector<PairRow> match_spectra(const std::vector<double>& perturbed,
                                   const std::vector<double>& limit_counted, double eps,
                                   int n_track);

RateFit fit_rate(const std::vector<double>& eps_grid, const std::vector<double>& gaps, int n);

// count of perturbed eigenvalues within `radius` of limit_lambda; the radius
// must stay below half the distance to the rest of the limit spectrum
int cluster_count(double limit_lambda, double radius, const std::vector<double>& perturbed,
                  const std::vector<double>& other_limit_points);

double hausdorff_truncated(std::vector<double> s1, std::vector<double> s2, double cutoff);

// L2(a,b) distance between the perturbed eigenfunction (pieces mapped back
// to the physical interval, renormalized in L2(r, (a,b))) and the limit
// function of a simple limit eigenvalue; signs aligned by inner product
struct EfunGapResult {
    double gap = 0.0;
    double limit_l2_norm = 0.0;
};
EfunGapResult eigenfunction_gap(const ProblemSpec& spec, const PerturbedEigenpair& pe,
                                const LimitEigendata& data, const SolveOptions& opt = {});

// gap between the span of the matched perturbed eigenfunctions and the
// L2(a,b)-embedded root subspace, as the norm difference of the orthogonal
// projectors on a shared quadrature grid
double subspace_gap(const ProblemSpec& spec, const std::vector<PerturbedEigenpair>& cluster,
                    const std::vector<LimitVector>& basis, const SolveOptions& opt = {});

ConvergenceReport run_sweep(const ProblemSpec& spec, const SweepConfig& cfg);

}  // namespace masslab
