#pragma once

#include <string>
#include <vector>

#include "masslab/convergence.hpp"

namespace masslab {

// fixed 17-significant-digit decimal formatting for reproducible CSVs
std::string format_number(double v);

void write_limit_csv(const std::vector<LimitEigendata>& data, const std::string& path);

// (eps, index, lambda_eps) rows for spectrum sweeps
void write_sweep_csv(const std::vector<PairRow>& pairs, const std::string& path);

// grid function CSV: x, re_value, im_value, re_deriv, im_deriv [, piece]
void write_grid_function_csv(const ComplexGridFunction& f, const std::string& path);
void write_triple_csv(const ResolventTriple& t, const std::string& path);
void write_triple_csv(const PerturbedEigenpair& pe, const std::string& path);
void write_limit_vector_csv(const LimitVector& v, const std::string& path);
ComplexGridFunction read_grid_function_csv(const std::string& path);

// report tables, one CSV per field, plus a structured JSON summary
void write_report_tables(const ConvergenceReport& rep, const std::string& out_dir);
void write_report_summary(const ConvergenceReport& rep, const std::string& path,
                          const std::vector<std::pair<std::string, bool>>& checks);

// log-log SVG plots (gap vs eps) with a dashed sqrt(eps) guide
struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (eps, value)
};
void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::vector<PlotSeries>& series, bool sqrt_guide);
void write_report_svgs(const ConvergenceReport& rep, const std::string& out_dir);

}  // namespace masslab
