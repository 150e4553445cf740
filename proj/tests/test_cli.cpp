#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "masslab/builtin_specs.hpp"
#include "masslab/limit_op.hpp"
#include "masslab/report_io.hpp"
#include "masslab/run_manifest.hpp"

using namespace masslab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("masslab_test_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("builtin catalog") {
    auto entries = builtin_specs();
    CHECK(entries.size() >= 5);
    for (const auto& e : entries) {
        ProblemSpec s = builtin_spec(e.name, 4);
        CHECK(validate_spec(s).ok);
    }
    // the Jordan entry carries a double Jordan point at pi^2/4
    auto lim = limit_spectrum(builtin_spec("jordan-left"), 3);
    bool found = false;
    for (const auto& d : lim)
        if (d.kind == MultKind::double_jordan && std::fabs(d.lambda - 2.4674011002723395) < 1e-6)
            found = true;
    CHECK(found);
}

TEST_CASE("manifest run: trivial spec, basic tasks") {
    fs::path out = fresh_dir("trivial");
    RunManifest m;
    m.spec_ref = "builtin:neumann-trivial";
    m.out_dir = out.string();
    m.tasks = {"perturbed", "limit"};
    m.sweep.eps_grid = {0.2, 0.1};
    m.sweep.n_track = 2;
    CHECK(run_manifest(m) == 0);
    CHECK(fs::exists(out / "spectrum_sweep.csv"));
    CHECK(fs::exists(out / "limit_spectrum.csv"));
    CHECK(fs::exists(out / "eigenfunctions" / "eps_min_n00.csv"));
    CHECK(fs::exists(out / "basis" / "limit_00_vec0.csv"));
    std::string triple = slurp(out / "eigenfunctions" / "eps_min_n00.csv");
    CHECK(triple.find("piece,x,re_value,im_value,re_deriv,im_deriv") == 0);
    CHECK(triple.find("inner,") != std::string::npos);

    // the first eigenvalue column is zero for the Neumann spec
    std::ifstream f(out / "spectrum_sweep.csv");
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double eps, lam;
        int idx;
        ss >> eps >> idx >> lam;
        if (idx == 0) CHECK(std::fabs(lam) < 1e-9);
    }
}

TEST_CASE("manifest run: deterministic outputs") {
    fs::path o1 = fresh_dir("det1"), o2 = fresh_dir("det2");
    RunManifest m;
    m.spec_ref = "builtin:random-generic";
    m.seed = 42;
    m.tasks = {"limit"};
    m.sweep.n_track = 3;
    m.out_dir = o1.string();
    CHECK(run_manifest(m) == 0);
    m.out_dir = o2.string();
    CHECK(run_manifest(m) == 0);
    CHECK(slurp(o1 / "limit_spectrum.csv") == slurp(o2 / "limit_spectrum.csv"));
    CHECK(!slurp(o1 / "limit_spectrum.csv").empty());
}

TEST_CASE("manifest run: parse failures exit 2") {
    fs::path out = fresh_dir("bad");
    fs::path bad = out / "bad.spec";
    std::ofstream(bad) << "a = -1\nb = oops\n";
    RunManifest m;
    m.spec_ref = bad.string();
    m.out_dir = (out / "o").string();
    CHECK(run_manifest(m) == 2);

    RunManifest missing;
    missing.spec_ref = (out / "nope.spec").string();
    CHECK(run_manifest(missing) == 2);
}

TEST_CASE("cli binary: exit codes and spec listing") {
    fs::path out = fresh_dir("cli");
    std::string cli = MASSLAB_CLI_PATH;

    int rc = std::system((cli + " --list-specs > " + (out / "list.txt").string()).c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    std::string listing = slurp(out / "list.txt");
    CHECK(listing.find("neumann-trivial") != std::string::npos);
    CHECK(listing.find("jordan-left") != std::string::npos);

    fs::path bad = out / "bad.spec";
    std::ofstream(bad) << "a = -1\nnot a line\n";
    rc = std::system((cli + " --spec " + bad.string() + " --tasks limit --out " +
                      (out / "o").string() + " 2> /dev/null")
                         .c_str());
    CHECK(WEXITSTATUS(rc) == 2);

    rc = std::system((cli + " --spec builtin:neumann-trivial --tasks limit --n 2 --out " +
                      (out / "o2").string())
                         .c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(out / "o2" / "limit_spectrum.csv"));
}

TEST_CASE("manifest run: reduced full pipeline") {
    fs::path out = fresh_dir("full");
    RunManifest m;
    m.spec_ref = "builtin:dirichlet-symmetric";
    m.out_dir = out.string();
    m.sweep.eps_grid = {0.2, 0.1, 0.05, 0.025};
    m.sweep.n_track = 5;
    m.sweep.resolvent_nodes = 64;
    m.sweep.truncation_lambda = 25.0;
    CHECK(run_manifest(m) == 0);
    for (const char* f : {"pairs.csv", "rates.csv", "clusters.csv", "hausdorff.csv",
                          "efun_gaps.csv", "subspace_gaps.csv", "resolvent_gaps.csv",
                          "summary.json", "eigenvalue_gaps.svg", "hausdorff.svg"})
        CHECK(fs::exists(out / f));
    std::string svg = slurp(out / "eigenvalue_gaps.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("sqrt(eps)") != std::string::npos);

    // every emitted number is finite
    std::string summary = slurp(out / "summary.json");
    CHECK(summary.find("nan") == std::string::npos);
    CHECK(summary.find("inf") == std::string::npos);
}

TEST_CASE("grid function CSV round trip") {
    fs::path out = fresh_dir("csv");
    ComplexGridFunction g;
    g.x = {0.0, 0.5, 1.0};
    g.value = {{1.0, -2.0}, {0.25, 0.0}, {-3.5, 1e-17}};
    g.deriv = {{0.0, 0.0}, {1.5, 2.5}, {0.125, -0.375}};
    write_grid_function_csv(g, (out / "g.csv").string());
    auto back = read_grid_function_csv((out / "g.csv").string());
    REQUIRE(back.size() == g.size());
    for (size_t i = 0; i < g.size(); ++i) {
        CHECK(back.x[i] == g.x[i]);
        CHECK(back.value[i] == g.value[i]);
        CHECK(back.deriv[i] == g.deriv[i]);
    }
}
