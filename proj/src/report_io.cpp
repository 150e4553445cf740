#include "masslab/report_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "masslab/errors.hpp"

namespace masslab {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open output file '" + path + "'");
    return f;
}

}  // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_limit_csv(const std::vector<LimitEigendata>& data, const std::string& path) {
    auto f = open_out(path);
    f << "n,lambda,mult,in_Aa,in_B,in_Ab,kind\n";
    int n = 0;
    for (const auto& d : data) {
        f << n << ',' << format_number(d.lambda) << ',' << d.alg_mult << ',' << int(d.in_left)
          << ',' << int(d.in_mid) << ',' << int(d.in_right) << ',' << to_string(d.kind) << '\n';
        ++n;
    }
}

void write_sweep_csv(const std::vector<PairRow>& pairs, const std::string& path) {
    auto f = open_out(path);
    f << "eps,index,lambda_eps\n";
    for (const auto& p : pairs)
        f << format_number(p.eps) << ',' << p.n << ',' << format_number(p.lambda_eps) << '\n';
}

void write_grid_function_csv(const ComplexGridFunction& g, const std::string& path) {
    auto f = open_out(path);
    f << "x,re_value,im_value,re_deriv,im_deriv\n";
    for (size_t i = 0; i < g.size(); ++i)
        f << format_number(g.x[i]) << ',' << format_number(g.value[i].real()) << ','
          << format_number(g.value[i].imag()) << ',' << format_number(g.deriv[i].real()) << ','
          << format_number(g.deriv[i].imag()) << '\n';
}

void write_triple_csv(const ResolventTriple& t, const std::string& path) {
    auto f = open_out(path);
    f << "piece,x,re_value,im_value,re_deriv,im_deriv\n";
    auto dump = [&f](const char* tag, const ComplexGridFunction& g) {
        for (size_t i = 0; i < g.size(); ++i)
            f << tag << ',' << format_number(g.x[i]) << ',' << format_number(g.value[i].real())
              << ',' << format_number(g.value[i].imag()) << ','
              << format_number(g.deriv[i].real()) << ',' << format_number(g.deriv[i].imag())
              << '\n';
    };
    dump("left", t.left);
    dump("inner", t.mid);
    dump("right", t.right);
}

namespace {

void dump_real_piece(std::ofstream& f, const char* tag, const GridFunction& g) {
    for (size_t i = 0; i < g.size(); ++i)
        f << tag << ',' << format_number(g.x[i]) << ',' << format_number(g.value[i]) << ",0,"
          << format_number(g.deriv[i]) << ",0\n";
}

}  // namespace

void write_triple_csv(const PerturbedEigenpair& pe, const std::string& path) {
    auto f = open_out(path);
    f << "piece,x,re_value,im_value,re_deriv,im_deriv\n";
    dump_real_piece(f, "left", pe.outer_left);
    dump_real_piece(f, "inner", pe.inner);
    dump_real_piece(f, "right", pe.outer_right);
}

void write_limit_vector_csv(const LimitVector& v, const std::string& path) {
    auto f = open_out(path);
    f << "piece,x,re_value,im_value,re_deriv,im_deriv\n";
    if (!v.u.empty()) dump_real_piece(f, "left", v.u);
    if (!v.w.empty()) dump_real_piece(f, "inner", v.w);
    if (!v.v.empty()) dump_real_piece(f, "right", v.v);
}

ComplexGridFunction read_grid_function_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "'");
    std::string line;
    std::getline(f, line);  // header
    ComplexGridFunction g;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, rv, iv, rd, id;
        if (!(ss >> x >> rv >> iv >> rd >> id))
            throw ParseError("bad grid function row", line_no);
        g.x.push_back(x);
        g.value.emplace_back(rv, iv);
        g.deriv.emplace_back(rd, id);
    }
    return g;
}

void write_report_tables(const ConvergenceReport& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    write_limit_csv(rep.limit, out_dir + "/limit_spectrum.csv");
    write_sweep_csv(rep.pairs, out_dir + "/spectrum_sweep.csv");

    {
        auto f = open_out(out_dir + "/pairs.csv");
        f << "n,eps,lambda_eps,lambda_limit,gap\n";
        for (const auto& p : rep.pairs)
            f << p.n << ',' << format_number(p.eps) << ',' << format_number(p.lambda_eps) << ','
              << format_number(p.lambda_limit) << ',' << format_number(p.gap) << '\n';
    }
    {
        auto f = open_out(out_dir + "/rates.csv");
        f << "n,slope,c_sqrt,zero_gap,beyond_resolution,monotone_from\n";
        for (const auto& r : rep.rates)
            f << r.n << ',' << format_number(r.slope) << ',' << format_number(r.c_sqrt) << ','
              << int(r.zero_gap) << ',' << int(r.beyond_resolution) << ','
              << format_number(r.monotone_from) << '\n';
    }
    {
        auto f = open_out(out_dir + "/clusters.csv");
        f << "lambda,mult,radius,eps,count\n";
        for (const auto& c : rep.clusters)
            f << format_number(c.lambda) << ',' << c.mult << ',' << format_number(c.radius) << ','
              << format_number(c.eps) << ',' << c.count << '\n';
    }
    {
        auto f = open_out(out_dir + "/hausdorff.csv");
        f << "eps,dist\n";
        for (const auto& h : rep.hausdorff)
            f << format_number(h.eps) << ',' << format_number(h.dist) << '\n';
    }
    {
        auto f = open_out(out_dir + "/efun_gaps.csv");
        f << "n,eps,gap,limit_l2_norm\n";
        for (const auto& e : rep.efun_gaps)
            f << e.n << ',' << format_number(e.eps) << ',' << format_number(e.gap) << ','
              << format_number(e.limit_l2_norm) << '\n';
    }
    {
        auto f = open_out(out_dir + "/subspace_gaps.csv");
        f << "lambda,mult,eps,gap\n";
        for (const auto& s : rep.subspace_gaps)
            f << format_number(s.lambda) << ',' << s.mult << ',' << format_number(s.eps) << ','
              << format_number(s.gap) << '\n';
    }
    {
        auto f = open_out(out_dir + "/resolvent_gaps.csv");
        f << "eps,gap,gap_refined,resolved\n";
        for (const auto& r : rep.resolvent_gaps)
            f << format_number(r.eps) << ',' << format_number(r.gap) << ','
              << format_number(r.gap_refined) << ',' << int(r.resolved) << '\n';
    }
}

void write_report_summary(const ConvergenceReport& rep, const std::string& path,
                          const std::vector<std::pair<std::string, bool>>& checks) {
    nlohmann::json j;
    j["spec"] = rep.spec_name;
    j["eps_grid"] = rep.config.eps_grid;
    j["n_track"] = rep.config.n_track;
    j["truncation_lambda"] = rep.config.truncation_lambda;
    j["zeta_probe"] = {rep.config.zeta_probe.real(), rep.config.zeta_probe.imag()};
    j["limit_count"] = rep.limit.size();
    j["anomalies"] = rep.anomalies;

    nlohmann::json rates = nlohmann::json::array();
    for (const auto& r : rep.rates) {
        rates.push_back({{"n", r.n},
                         {"slope", std::isfinite(r.slope) ? r.slope : 1e300},
                         {"c_sqrt", r.c_sqrt},
                         {"zero_gap", r.zero_gap},
                         {"beyond_resolution", r.beyond_resolution},
                         {"monotone_from", r.monotone_from}});
    }
    j["rates"] = rates;

    bool all_pass = true;
    nlohmann::json cj = nlohmann::json::array();
    for (const auto& [name, ok] : checks) {
        cj.push_back({{"check", name}, {"pass", ok}});
        all_pass = all_pass && ok;
    }
    j["checks"] = cj;
    j["all_pass"] = all_pass;

    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

namespace {

struct Mapper {
    double x0, x1, y0, y1;  // data ranges (log10)
    double px0 = 70, px1 = 640, py0 = 420, py1 = 40;
    double mx(double lx) const { return px0 + (lx - x0) / (x1 - x0) * (px1 - px0); }
    double my(double ly) const { return py0 + (ly - y0) / (y1 - y0) * (py1 - py0); }
};

const char* kColors[] = {"#1f6fb2", "#c03a2b", "#2a9d5c", "#8650a6", "#b28010", "#3aa6b2",
                         "#b23a85", "#6b7280"};

}  // namespace

void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::vector<PlotSeries>& series, bool sqrt_guide) {
    double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (x <= 0.0 || y <= 0.0) continue;
            lx0 = std::min(lx0, std::log10(x));
            lx1 = std::max(lx1, std::log10(x));
            ly0 = std::min(ly0, std::log10(y));
            ly1 = std::max(ly1, std::log10(y));
        }
    if (lx0 > lx1) {  // nothing positive to plot
        lx0 = -3;
        lx1 = 0;
        ly0 = -12;
        ly1 = 0;
    }
    lx0 = std::floor(lx0);
    lx1 = std::ceil(lx1 + 1e-9);
    ly0 = std::floor(ly0);
    ly1 = std::ceil(ly1 + 1e-9);
    if (ly1 - ly0 < 1) ly1 = ly0 + 1;
    Mapper m{lx0, lx1, ly0, ly1};

    auto f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"700\" height=\"470\" "
         "viewBox=\"0 0 700 470\">\n";
    f << "<rect width=\"700\" height=\"470\" fill=\"white\"/>\n";
    f << "<text x=\"350\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << title << "</text>\n";

    for (double lx = lx0; lx <= lx1 + 1e-9; lx += 1.0) {
        double px = m.mx(lx);
        f << "<line x1=\"" << px << "\" y1=\"" << m.py0 << "\" x2=\"" << px << "\" y2=\"" << m.py1
          << "\" stroke=\"#dddddd\"/>\n";
        f << "<text x=\"" << px << "\" y=\"" << m.py0 + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">1e"
          << static_cast<int>(lx) << "</text>\n";
    }
    for (double ly = ly0; ly <= ly1 + 1e-9; ly += 1.0) {
        double py = m.my(ly);
        f << "<line x1=\"" << m.px0 << "\" y1=\"" << py << "\" x2=\"" << m.px1 << "\" y2=\"" << py
          << "\" stroke=\"#dddddd\"/>\n";
        f << "<text x=\"" << m.px0 - 8 << "\" y=\"" << py + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e"
          << static_cast<int>(ly) << "</text>\n";
    }
    f << "<rect x=\"" << m.px0 << "\" y=\"" << m.py1 << "\" width=\"" << m.px1 - m.px0
      << "\" height=\"" << m.py0 - m.py1 << "\" fill=\"none\" stroke=\"#555555\"/>\n";
    f << "<text x=\"" << 0.5 * (m.px0 + m.px1) << "\" y=\"458\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\">eps</text>\n";

    if (sqrt_guide) {
        // dashed guide with slope 1/2 through the top-right decade corner
        double c = (ly1 - 1.0) - 0.5 * lx1;
        double gy0 = 0.5 * lx0 + c, gy1 = 0.5 * lx1 + c;
        f << "<line x1=\"" << m.mx(lx0) << "\" y1=\"" << m.my(gy0) << "\" x2=\"" << m.mx(lx1)
          << "\" y2=\"" << m.my(gy1)
          << "\" stroke=\"#888888\" stroke-dasharray=\"6,4\"/>\n";
        f << "<text x=\"" << m.mx(lx1) - 60 << "\" y=\"" << m.my(gy1) - 6
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666666\">sqrt(eps)</text>\n";
    }

    int ci = 0;
    double ly_leg = m.py1 + 14;
    for (const auto& s : series) {
        const char* color = kColors[ci % 8];
        std::ostringstream pts;
        for (auto [x, y] : s.points) {
            if (x <= 0.0 || y <= 0.0) continue;
            pts << m.mx(std::log10(x)) << ',' << m.my(std::log10(y)) << ' ';
        }
        f << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.6\"/>\n";
        for (auto [x, y] : s.points) {
            if (x <= 0.0 || y <= 0.0) continue;
            f << "<circle cx=\"" << m.mx(std::log10(x)) << "\" cy=\"" << m.my(std::log10(y))
              << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
        }
        f << "<text x=\"" << m.px1 - 120 << "\" y=\"" << ly_leg
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << s.label
          << "</text>\n";
        ly_leg += 14;
        ++ci;
    }
    f << "</svg>\n";
}

void write_report_svgs(const ConvergenceReport& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::vector<PlotSeries> series(static_cast<size_t>(rep.config.n_track));
        for (int n = 0; n < rep.config.n_track; ++n)
            series[static_cast<size_t>(n)].label = "n=" + std::to_string(n);
        for (const auto& p : rep.pairs)
            series[static_cast<size_t>(p.n)].points.push_back({p.eps, p.gap});
        write_loglog_svg(out_dir + "/eigenvalue_gaps.svg", "eigenvalue gaps |lambda_n(eps) - lambda_n|",
                         series, true);
    }
    if (!rep.efun_gaps.empty()) {
        std::vector<PlotSeries> series;
        for (const auto& e : rep.efun_gaps) {
            auto it = std::find_if(series.begin(), series.end(), [&](const PlotSeries& s) {
                return s.label == "n=" + std::to_string(e.n);
            });
            if (it == series.end()) {
                series.push_back({"n=" + std::to_string(e.n), {}});
                it = series.end() - 1;
            }
            it->points.push_back({e.eps, e.gap});
        }
        write_loglog_svg(out_dir + "/eigenfunction_gaps.svg", "eigenfunction L2 gaps", series, true);
    }
    if (!rep.subspace_gaps.empty()) {
        std::vector<PlotSeries> series;
        for (const auto& s : rep.subspace_gaps) {
            std::string label = "lambda=" + format_number(s.lambda).substr(0, 6);
            auto it = std::find_if(series.begin(), series.end(),
                                   [&](const PlotSeries& p) { return p.label == label; });
            if (it == series.end()) {
                series.push_back({label, {}});
                it = series.end() - 1;
            }
            it->points.push_back({s.eps, s.gap});
        }
        write_loglog_svg(out_dir + "/subspace_gaps.svg", "root-subspace gaps", series, true);
    }
    {
        std::vector<PlotSeries> series(1);
        series[0].label = "d_H";
        for (const auto& h : rep.hausdorff) series[0].points.push_back({h.eps, h.dist});
        write_loglog_svg(out_dir + "/hausdorff.svg", "truncated Hausdorff distance", series, true);
    }
    if (!rep.resolvent_gaps.empty()) {
        std::vector<PlotSeries> series(1);
        series[0].label = "norm gap";
        for (const auto& r : rep.resolvent_gaps) series[0].points.push_back({r.eps, r.gap});
        write_loglog_svg(out_dir + "/resolvent_gaps.svg", "resolvent norm gap", series, true);
    }
}

}  // namespace masslab
