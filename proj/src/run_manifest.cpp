#include "masslab/run_manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "masslab/builtin_specs.hpp"
#include "masslab/errors.hpp"
#include "masslab/report_io.hpp"
#include "masslab/spec_file.hpp"

namespace masslab {

namespace {

bool has_task(const RunManifest& m, const std::string& t) {
    return std::find(m.tasks.begin(), m.tasks.end(), t) != m.tasks.end();
}

bool all_finite(const ConvergenceReport& rep) {
    auto ok = [](double v) { return std::isfinite(v); };
    for (const auto& p : rep.pairs)
        if (!ok(p.lambda_eps) || !ok(p.lambda_limit) || !ok(p.gap)) return false;
    for (const auto& h : rep.hausdorff)
        if (!ok(h.dist)) return false;
    for (const auto& e : rep.efun_gaps)
        if (!ok(e.gap)) return false;
    for (const auto& s : rep.subspace_gaps)
        if (!ok(s.gap)) return false;
    for (const auto& r : rep.resolvent_gaps)
        if (!ok(r.gap) || !ok(r.gap_refined)) return false;
    return true;
}

}  // namespace

int run_manifest(const RunManifest& manifest) {
    namespace fs = std::filesystem;
    ProblemSpec spec;
    try {
        const std::string prefix = "builtin:";
        if (manifest.spec_ref.rfind(prefix, 0) == 0)
            spec = builtin_spec(manifest.spec_ref.substr(prefix.size()), manifest.seed);
        else
            spec = parse_spec_file(manifest.spec_ref);
        auto rep = validate_spec(spec);
        if (!rep.ok) {
            for (const auto& msg : rep.issues) std::fprintf(stderr, "spec invalid: %s\n", msg.c_str());
            return 2;
        }
        validate_config(manifest.sweep);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    try {
        fs::create_directories(manifest.out_dir);
        bool want_convergence = has_task(manifest, "convergence");
        bool want_resolvent = has_task(manifest, "resolvent");
        bool want_perturbed = has_task(manifest, "perturbed") || want_convergence;
        bool want_limit = has_task(manifest, "limit") || want_convergence;

        std::vector<std::pair<std::string, bool>> checks;

        if (want_limit) {
            auto limit = limit_spectrum(spec, manifest.sweep.n_track);
            write_limit_csv(limit, manifest.out_dir + "/limit_spectrum.csv");
            fs::create_directories(manifest.out_dir + "/basis");
            for (size_t i = 0; i < limit.size(); ++i) {
                auto basis = eigenvector_basis(spec, limit[i]);
                for (size_t k = 0; k < basis.size(); ++k) {
                    char name[64];
                    std::snprintf(name, sizeof(name), "/basis/limit_%02zu_vec%zu.csv", i, k);
                    write_limit_vector_csv(basis[k], manifest.out_dir + name);
                }
                if (limit[i].kind == MultKind::double_jordan ||
                    limit[i].kind == MultKind::triple_jordan) {
                    char name[64];
                    std::snprintf(name, sizeof(name), "/basis/limit_%02zu_root.csv", i);
                    write_limit_vector_csv(root_vector(spec, limit[i]).root,
                                           manifest.out_dir + name);
                }
            }
        }
        if (want_perturbed && !want_convergence) {
            std::vector<PairRow> rows;
            for (double eps : manifest.sweep.eps_grid) {
                auto pes = perturbed_eigenvalues(spec, eps, manifest.sweep.n_track);
                for (const auto& pe : pes) rows.push_back({pe.index, eps, pe.lambda, 0.0, 0.0});
            }
            write_sweep_csv(rows, manifest.out_dir + "/spectrum_sweep.csv");
        }
        if (want_perturbed) {
            // eigenfunction triples at the smallest eps
            double eps = manifest.sweep.eps_grid.back();
            fs::create_directories(manifest.out_dir + "/eigenfunctions");
            auto pes = perturbed_eigenvalues(spec, eps, manifest.sweep.n_track);
            for (const auto& pe : pes) {
                char name[64];
                std::snprintf(name, sizeof(name), "/eigenfunctions/eps_min_n%02d.csv", pe.index);
                write_triple_csv(pe, manifest.out_dir + name);
            }
        }

        if (want_convergence || want_resolvent) {
            SweepConfig cfg = manifest.sweep;
            cfg.with_resolvent = want_resolvent;
            cfg.with_eigenfunctions = want_convergence;
            ConvergenceReport rep = run_sweep(spec, cfg);
            write_report_tables(rep, manifest.out_dir);
            if (manifest.with_svg) write_report_svgs(rep, manifest.out_dir);

            checks.emplace_back("all reported numbers finite", all_finite(rep));
            if (want_resolvent) {
                bool resolved = std::all_of(rep.resolvent_gaps.begin(), rep.resolvent_gaps.end(),
                                            [](const ResolventGapRow& r) { return r.resolved; });
                checks.emplace_back("resolvent resolution-doubling", resolved);
            }
            if (want_convergence) {
                bool clusters_ok = true;
                double eps_min = cfg.eps_grid.back();
                for (const auto& c : rep.clusters)
                    if (c.eps == eps_min && c.count != c.mult) clusters_ok = false;
                checks.emplace_back("cluster counts match multiplicities at smallest eps",
                                    clusters_ok);
                bool hausdorff_ok = rep.hausdorff.size() < 2 ||
                                    rep.hausdorff.back().dist <= rep.hausdorff.front().dist;
                checks.emplace_back("Hausdorff distance decreased over the sweep", hausdorff_ok);
                // index/nearest matching disagreements are reported in the
                // summary, not treated as failures: far from the limit the
                // nearest point is simply not meaningful
            }
            write_report_summary(rep, manifest.out_dir + "/summary.json", checks);

            for (const auto& [name, ok] : checks) {
                std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
                if (!ok) {
                    std::printf("summary: %s/summary.json\n", manifest.out_dir.c_str());
                }
            }
            if (!std::all_of(checks.begin(), checks.end(),
                             [](const auto& c) { return c.second; }))
                return 1;
        }
        return 0;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const NearSingularError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
}

}  // namespace masslab
