#include "masslab/convergence.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "masslab/errors.hpp"
#include "masslab/quadrature.hpp"

namespace masslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> region_cuts(const ProblemSpec& spec, double eps) {
    std::vector<double> cuts{spec.a, -eps, 0.0, eps, spec.b};
    for (double bp : spec.r.breakpoints()) cuts.push_back(bp);
    for (double bp : spec.q.breakpoints()) cuts.push_back(bp);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::erase_if(cuts, [&](double c) { return c < spec.a || c > spec.b; });
    return cuts;
}

// perturbed eigenfunction as a function on the physical interval
double composite_eval(const PerturbedEigenpair& pe, double x) {
    if (x < -pe.eps) return pe.outer_left.eval(x);
    if (x > pe.eps) return pe.outer_right.eval(x);
    return pe.inner.eval(x / pe.eps);
}

// L2(r, (a,b)) norm of the composite perturbed eigenfunction
double composite_r_norm(const ProblemSpec& spec, const PerturbedEigenpair& pe) {
    auto cuts = region_cuts(spec, pe.eps);
    double n2 = integrate(composite_gauss_legendre(48, cuts), [&](double x) {
        double v = composite_eval(pe, x);
        return spec.r(x) * v * v;
    });
    return std::sqrt(n2);
}

int env_workers() {
    if (const char* s = std::getenv("MASSLAB_WORKERS")) {
        int v = std::atoi(s);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

template <class Fn>
void parallel_over(size_t count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    int nthreads = std::min<int>(workers, static_cast<int>(count));
    std::vector<std::exception_ptr> errors(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() mutable {
            try {
                for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

void validate_config(const SweepConfig& cfg) {
    if (cfg.eps_grid.empty()) throw ConfigError("empty eps grid");
    for (size_t i = 1; i < cfg.eps_grid.size(); ++i)
        if (!(cfg.eps_grid[i] < cfg.eps_grid[i - 1]))
            throw ConfigError("eps grid must be strictly decreasing");
    if (cfg.eps_grid.back() < defaults::min_eps) throw ConfigError("eps below admissible minimum");
    if (cfg.n_track < 1) throw ConfigError("n_track must be positive");
    if (cfg.zeta_probe.imag() == 0.0) throw ConfigError("zeta probe must be off the real axis");
}

std::vector<PairRow> match_spectra(const std::vector<double>& perturbed,
                                   const std::vector<double>& limit_counted, double eps,
                                   int n_track) {
    if (static_cast<int>(perturbed.size()) < n_track ||
        static_cast<int>(limit_counted.size()) < n_track)
        throw ConfigError("spectra do not cover the tracked index range");
    std::vector<PairRow> rows;
    rows.reserve(static_cast<size_t>(n_track));
    for (int n = 0; n < n_track; ++n) {
        PairRow r;
        r.n = n;
        r.eps = eps;
        r.lambda_eps = perturbed[static_cast<size_t>(n)];
        r.lambda_limit = limit_counted[static_cast<size_t>(n)];
        r.gap = std::fabs(r.lambda_eps - r.lambda_limit);
        rows.push_back(r);
    }
    return rows;
}

RateFit fit_rate(const std::vector<double>& eps_grid, const std::vector<double>& gaps, int n) {
    if (eps_grid.size() != gaps.size()) throw ConfigError("rate fit: mismatched grid");
    RateFit fit;
    fit.n = n;

    double noise = 100.0 * defaults::eig_tol;
    bool all_noise = std::all_of(gaps.begin(), gaps.end(), [&](double g) { return g < noise; });
    for (size_t i = 0; i < gaps.size(); ++i)
        fit.c_sqrt = std::max(fit.c_sqrt, gaps[i] / std::sqrt(eps_grid[i]));

    // monotone-decrease onset
    fit.monotone_from = eps_grid.back();
    for (size_t k = 0; k + 1 < gaps.size(); ++k) {
        bool mono = true;
        for (size_t i = k; i + 1 < gaps.size(); ++i)
            if (gaps[i + 1] > gaps[i]) {
                mono = false;
                break;
            }
        if (mono) {
            fit.monotone_from = eps_grid[k];
            break;
        }
    }

    if (all_noise) {
        fit.beyond_resolution = true;
        return fit;
    }
    std::vector<double> lx, ly;
    for (size_t i = 0; i < gaps.size(); ++i) {
        if (gaps[i] > 0.0) {
            lx.push_back(std::log(eps_grid[i]));
            ly.push_back(std::log(gaps[i]));
        }
    }
    if (lx.size() < 4) {
        fit.zero_gap = true;
        fit.slope = kInf;
        return fit;
    }
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    fit.slope = sxy / sxx;
    return fit;
}

int cluster_count(double limit_lambda, double radius, const std::vector<double>& perturbed,
                  const std::vector<double>& other_limit_points) {
    for (double mu : other_limit_points) {
        if (std::fabs(mu - limit_lambda) < 1e-12) continue;
        if (!(radius < 0.5 * std::fabs(mu - limit_lambda)))
            throw ConfigError("cluster radius reaches a neighbouring limit eigenvalue");
    }
    int count = 0;
    for (double lam : perturbed)
        if (std::fabs(lam - limit_lambda) <= radius) ++count;
    return count;
}

double hausdorff_truncated(std::vector<double> s1, std::vector<double> s2, double cutoff) {
    std::erase_if(s1, [&](double v) { return v > cutoff; });
    std::erase_if(s2, [&](double v) { return v > cutoff; });
    if (s1.empty() || s2.empty()) throw DomainError("empty truncated spectrum");
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    auto directed = [](const std::vector<double>& from, const std::vector<double>& to) {
        double worst = 0.0;
        for (double v : from) {
            auto it = std::lower_bound(to.begin(), to.end(), v);
            double best = kInf;
            if (it != to.end()) best = std::min(best, *it - v);
            if (it != to.begin()) best = std::min(best, v - *(it - 1));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(s1, s2), directed(s2, s1));
}

EfunGapResult eigenfunction_gap(const ProblemSpec& spec, const PerturbedEigenpair& pe,
                                const LimitEigendata& data, const SolveOptions& opt) {
    if (data.alg_mult != 1) throw DomainError("eigenfunction gap requires a simple limit eigenvalue");

    // limit candidate: components on (a,0) and (0,b)
    GridFunction ulim, vlim;
    if (data.in_left) {
        ulim = eigenvector_basis(spec, data, opt)[0].u;
    } else if (data.in_right) {
        vlim = eigenvector_basis(spec, data, opt)[0].v;
    } else {
        ThetaFactor th = theta_factor(spec, data, opt);
        Eigenpair wm = eigenpair_at_index(mid_block(spec), data.mid_index, opt);
        BoundarySolution ta = solve_boundary(left_block_traced(spec), Complex(data.lambda, 0.0),
                                             Complex(wm.efun.value.front(), 0.0), opt);
        BoundarySolution tb = solve_boundary(right_block_traced(spec), Complex(data.lambda, 0.0),
                                             Complex(wm.efun.value.back(), 0.0), opt);
        ulim.x = ta.sol.x;
        vlim.x = tb.sol.x;
        for (auto& c : ta.sol.value) ulim.value.push_back(th.theta * c.real());
        for (auto& c : ta.sol.deriv) ulim.deriv.push_back(th.theta * c.real());
        for (auto& c : tb.sol.value) vlim.value.push_back(th.theta * c.real());
        for (auto& c : tb.sol.deriv) vlim.deriv.push_back(th.theta * c.real());
    }
    auto lim_eval = [&](double x) {
        if (x < 0.0) return ulim.empty() ? 0.0 : ulim.eval(x);
        return vlim.empty() ? 0.0 : vlim.eval(x);
    };

    double pert_norm = composite_r_norm(spec, pe);
    auto cuts = region_cuts(spec, pe.eps);
    QuadRule quad = composite_gauss_legendre(48, cuts);

    EfunGapResult res;
    res.limit_l2_norm = std::sqrt(integrate(quad, [&](double x) {
        double v = lim_eval(x);
        return spec.r(x) * v * v;
    }));

    double ip = integrate(quad, [&](double x) { return composite_eval(pe, x) / pert_norm * lim_eval(x); });
    double sign = ip >= 0.0 ? 1.0 : -1.0;
    double gap2 = integrate(quad, [&](double x) {
        double d = sign * composite_eval(pe, x) / pert_norm - lim_eval(x);
        return d * d;
    });
    res.gap = std::sqrt(std::max(0.0, gap2));
    return res;
}

double subspace_gap(const ProblemSpec& spec, const std::vector<PerturbedEigenpair>& cluster,
                    const std::vector<LimitVector>& basis, const SolveOptions& opt) {
    (void)opt;
    const size_t m = basis.size();
    if (m < 1 || cluster.size() != m) throw ConfigError("incomplete cluster for the subspace gap");

    auto cuts = region_cuts(spec, cluster.front().eps);
    QuadRule quad = composite_gauss_legendre(64, cuts);
    const long n = static_cast<long>(quad.size());

    Eigen::MatrixXd V(n, static_cast<long>(m)), W(n, static_cast<long>(m));
    for (size_t j = 0; j < m; ++j) {
        for (long i = 0; i < n; ++i) {
            double x = quad.x[static_cast<size_t>(i)];
            double sw = std::sqrt(quad.w[static_cast<size_t>(i)]);
            V(i, static_cast<long>(j)) = composite_eval(cluster[j], x) * sw;
            double lim = 0.0;
            if (x < 0.0 && !basis[j].u.empty()) lim = basis[j].u.eval(x);
            if (x > 0.0 && !basis[j].v.empty()) lim = basis[j].v.eval(x);
            W(i, static_cast<long>(j)) = lim * sw;
        }
    }
    auto thin_q = [](const Eigen::MatrixXd& a) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
        return q;
    };
    Eigen::MatrixXd qv = thin_q(V), qw = thin_q(W);
    Eigen::MatrixXd combined(n, static_cast<long>(2 * m));
    combined << qv, qw;
    Eigen::MatrixXd c = thin_q(combined);
    Eigen::MatrixXd pv = c.transpose() * qv;
    Eigen::MatrixXd pw = c.transpose() * qw;
    Eigen::MatrixXd diff = pv * pv.transpose() - pw * pw.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

ConvergenceReport run_sweep(const ProblemSpec& spec, const SweepConfig& cfg) {
    validate_config(cfg);
    ConvergenceReport rep;
    rep.spec_name = spec.name;
    rep.config = cfg;

    // limit spectrum covering both the tracked range and the cutoff
    int n_limit = std::max(cfg.n_track, 4);
    rep.limit = limit_spectrum(spec, n_limit);
    while (flatten_with_multiplicity(rep.limit).back() <= cfg.truncation_lambda) {
        n_limit += 4;
        rep.limit = limit_spectrum(spec, n_limit);
        if (n_limit > 200) break;
    }
    std::vector<double> limit_counted = flatten_with_multiplicity(rep.limit);

    const size_t ne = cfg.eps_grid.size();
    struct PerEps {
        std::vector<PerturbedEigenpair> pairs;
        std::vector<double> spectrum;
        ResolventGapResult resgap;
        std::vector<EfunGapRow> efun_rows;
        std::vector<SubspaceGapRow> sub_rows;
    };
    std::vector<PerEps> slots(ne);

    // limit-side constructions shared across eps
    std::vector<const LimitEigendata*> simple_tracked, multiple_tracked;
    for (const auto& d : rep.limit) {
        if (d.first_global_index >= cfg.n_track) continue;
        if (d.alg_mult == 1)
            simple_tracked.push_back(&d);
        else if (d.first_global_index + d.alg_mult <= cfg.n_track)
            multiple_tracked.push_back(&d);
    }
    std::vector<std::vector<LimitVector>> multiple_bases(multiple_tracked.size());
    for (size_t i = 0; i < multiple_tracked.size(); ++i) {
        const auto& d = *multiple_tracked[i];
        multiple_bases[i] = eigenvector_basis(spec, d);
        if (d.kind == MultKind::double_jordan || d.kind == MultKind::triple_jordan) {
            RootVectorData rv = root_vector(spec, d);
            multiple_bases[i].push_back(rv.root);
        }
    }

    int workers = cfg.workers > 0 ? cfg.workers : env_workers();
    parallel_over(ne, workers, [&](size_t i) {
        double eps = cfg.eps_grid[i];
        PerEps& slot = slots[i];
        slot.pairs = perturbed_eigenvalues(spec, eps, cfg.n_track);
        slot.spectrum = perturbed_spectrum_below(spec, eps, cfg.truncation_lambda);
        if (slot.spectrum.size() < static_cast<size_t>(cfg.n_track)) {
            slot.spectrum.clear();
            for (const auto& pe : slot.pairs) slot.spectrum.push_back(pe.lambda);
        }
        if (cfg.with_resolvent)
            slot.resgap = resolvent_gap(spec, eps, cfg.zeta_probe, cfg.resolvent_nodes);
        if (cfg.with_eigenfunctions) {
            for (const auto* d : simple_tracked) {
                EfunGapResult g = eigenfunction_gap(spec, slot.pairs[static_cast<size_t>(d->first_global_index)], *d);
                slot.efun_rows.push_back({d->first_global_index, eps, g.gap, g.limit_l2_norm});
            }
            for (size_t k = 0; k < multiple_tracked.size(); ++k) {
                const auto& d = *multiple_tracked[k];
                std::vector<PerturbedEigenpair> cl(
                    slot.pairs.begin() + d.first_global_index,
                    slot.pairs.begin() + d.first_global_index + d.alg_mult);
                double g = subspace_gap(spec, cl, multiple_bases[k]);
                slot.sub_rows.push_back({d.lambda, d.alg_mult, eps, g});
            }
        }
    });

    // assemble the report (single-threaded reduction)
    for (size_t i = 0; i < ne; ++i) {
        double eps = cfg.eps_grid[i];
        std::vector<double> pert_lams;
        for (const auto& pe : slots[i].pairs) pert_lams.push_back(pe.lambda);
        auto rows = match_spectra(pert_lams, limit_counted, eps, cfg.n_track);
        rep.pairs.insert(rep.pairs.end(), rows.begin(), rows.end());

        // nearest-neighbour cross-check
        for (const auto& r : rows) {
            double best = kInf, best_val = 0.0;
            for (double mu : limit_counted)
                if (std::fabs(mu - r.lambda_eps) < best) {
                    best = std::fabs(mu - r.lambda_eps);
                    best_val = mu;
                }
            if (std::fabs(best_val - r.lambda_limit) > defaults::merge_tol * std::max(1.0, best)) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "index/nearest matching disagree: eps=%g n=%d index->%.9g nearest->%.9g",
                              eps, r.n, r.lambda_limit, best_val);
                rep.anomalies.push_back(buf);
            }
        }

        rep.hausdorff.push_back(
            {eps, hausdorff_truncated(slots[i].spectrum, limit_counted, cfg.truncation_lambda)});
        if (cfg.with_resolvent)
            rep.resolvent_gaps.push_back({eps, slots[i].resgap.gap, slots[i].resgap.gap_refined,
                                          slots[i].resgap.resolved});
        rep.efun_gaps.insert(rep.efun_gaps.end(), slots[i].efun_rows.begin(),
                             slots[i].efun_rows.end());
        rep.subspace_gaps.insert(rep.subspace_gaps.end(), slots[i].sub_rows.begin(),
                                 slots[i].sub_rows.end());

        for (const auto* d : multiple_tracked) {
            double half = kInf;
            for (const auto& other : rep.limit)
                if (std::fabs(other.lambda - d->lambda) > 1e-12)
                    half = std::min(half, 0.5 * std::fabs(other.lambda - d->lambda));
            double radius = 0.9 * half;
            std::vector<double> others;
            for (const auto& other : rep.limit)
                if (std::fabs(other.lambda - d->lambda) > 1e-12) others.push_back(other.lambda);
            rep.clusters.push_back({d->lambda, d->alg_mult, radius, eps,
                                    cluster_count(d->lambda, radius, slots[i].spectrum, others)});
        }
    }

    // per-index rate fits
    for (int n = 0; n < cfg.n_track; ++n) {
        std::vector<double> gaps;
        for (size_t i = 0; i < ne; ++i)
            gaps.push_back(rep.pairs[i * static_cast<size_t>(cfg.n_track) + static_cast<size_t>(n)].gap);
        rep.rates.push_back(fit_rate(cfg.eps_grid, gaps, n));
    }
    return rep;
}

}  // namespace masslab
