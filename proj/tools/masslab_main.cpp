#include <CLI11.hpp>

#include <cstdio>
#include <sstream>

#include "masslab/builtin_specs.hpp"
#include "masslab/run_manifest.hpp"

namespace {

std::vector<double> parse_eps_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral sweeps for a string with a concentrated-mass inclusion"};

    std::string spec_ref, out_dir = "out", tasks = "perturbed,limit,convergence,resolvent";
    std::string eps_list, zeta_str = "0,1", format = "csv+svg";
    int n_track = 8;
    std::uint64_t seed = 1;
    int resolvent_nodes = masslab::defaults::resolvent_nodes_per_piece;
    double cutoff = 50.0;
    bool list_specs = false;

    app.add_flag("--list-specs", list_specs, "list bundled specs and exit");
    app.add_option("--spec", spec_ref, "spec file path or builtin:<name>");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--tasks", tasks, "comma list: perturbed,limit,convergence,resolvent")
        ->capture_default_str();
    app.add_option("--eps", eps_list, "comma list of eps values (default 0.2..0.00625)");
    app.add_option("--n", n_track, "number of tracked eigenvalues")->capture_default_str();
    app.add_option("--zeta", zeta_str, "resolvent probe as re,im")->capture_default_str();
    app.add_option("--seed", seed, "seed for the randomized builtin spec")->capture_default_str();
    app.add_option("--format", format, "csv or csv+svg")->capture_default_str();
    app.add_option("--lambda-cutoff", cutoff, "spectrum truncation for Hausdorff distances")
        ->capture_default_str();
    app.add_option("--resolvent-nodes", resolvent_nodes, "quadrature nodes per piece")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (list_specs) {
        for (const auto& e : masslab::builtin_specs())
            std::printf("%-20s %s\n", e.name.c_str(), e.description.c_str());
        return 0;
    }
    if (spec_ref.empty()) {
        std::fprintf(stderr, "--spec is required (or --list-specs)\n");
        return 2;
    }

    masslab::RunManifest m;
    m.spec_ref = spec_ref;
    m.out_dir = out_dir;
    m.seed = seed;
    m.with_svg = (format != "csv");
    if (format != "csv" && format != "csv+svg") {
        std::fprintf(stderr, "unknown --format '%s'\n", format.c_str());
        return 2;
    }

    m.tasks.clear();
    {
        std::stringstream ss(tasks);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok != "perturbed" && tok != "limit" && tok != "convergence" && tok != "resolvent") {
                std::fprintf(stderr, "unknown task '%s'\n", tok.c_str());
                return 2;
            }
            m.tasks.push_back(tok);
        }
    }

    try {
        if (!eps_list.empty()) m.sweep.eps_grid = parse_eps_list(eps_list);
        size_t comma = zeta_str.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("zeta needs re,im");
        m.sweep.zeta_probe = masslab::Complex(std::stod(zeta_str.substr(0, comma)),
                                              std::stod(zeta_str.substr(comma + 1)));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "bad numeric option: %s\n", e.what());
        return 2;
    }
    m.sweep.n_track = n_track;
    m.sweep.truncation_lambda = cutoff;
    m.sweep.resolvent_nodes = resolvent_nodes;

    return masslab::run_manifest(m);
}
