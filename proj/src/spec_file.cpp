#include "masslab/spec_file.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "masslab/errors.hpp"

namespace masslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string strip(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, int line) {
    if (tok == "pi") return kPi;
    if (tok == "-pi") return -kPi;
    if (tok == "pi/2") return kPi / 2.0;
    if (tok == "-pi/2") return -kPi / 2.0;
    try {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + tok + "'", line);
    }
}

std::vector<double> parse_numbers(const std::string& text, int line) {
    std::istringstream ss(text);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_number(tok, line));
    return out;
}

struct CoeffBlock {
    std::string kind;
    int kind_line = 0;
    std::optional<double> value;
    std::vector<std::pair<int, std::vector<double>>> pieces;   // line, numbers
    std::vector<std::pair<int, std::vector<double>>> samples;  // line, numbers
    int start_line = 0;
};

CoefficientFunction build_coefficient(const CoeffBlock& blk, const std::string& name,
                                      Interval domain) {
    if (blk.kind.empty()) throw ParseError("[" + name + "] missing 'kind'", blk.start_line);
    if (blk.kind == "constant") {
        if (!blk.value) throw ParseError("[" + name + "] constant needs 'value'", blk.start_line);
        return CoefficientFunction::constant(*blk.value, domain);
    }
    if (blk.kind == "piecewise") {
        if (blk.pieces.empty()) throw ParseError("[" + name + "] needs 'piece' lines", blk.start_line);
        std::vector<CoefficientFunction::PolyPiece> pieces;
        for (const auto& [line, nums] : blk.pieces) {
            if (nums.size() < 3)
                throw ParseError("[" + name + "] piece: expected x0 x1 c0 [c1 ...]", line);
            CoefficientFunction::PolyPiece p;
            p.x0 = nums[0];
            p.x1 = nums[1];
            p.coeffs.assign(nums.begin() + 2, nums.end());
            if (!(p.x0 < p.x1)) throw ParseError("[" + name + "] piece: x0 must be < x1", line);
            pieces.push_back(std::move(p));
        }
        CoefficientFunction f = CoefficientFunction::piecewise_poly(std::move(pieces));
        if (f.domain().lo > domain.lo + 1e-12 || f.domain().hi < domain.hi - 1e-12)
            throw ParseError("[" + name + "] pieces do not cover the declared interval",
                             blk.pieces.front().first);
        return f.restricted(domain);
    }
    if (blk.kind == "grid") {
        if (blk.samples.size() < 2)
            throw ParseError("[" + name + "] needs at least two 'sample' lines", blk.start_line);
        std::vector<double> xs, vs;
        for (const auto& [line, nums] : blk.samples) {
            if (nums.size() != 2) throw ParseError("[" + name + "] sample: expected x value", line);
            xs.push_back(nums[0]);
            vs.push_back(nums[1]);
        }
        CoefficientFunction f = CoefficientFunction::grid_linear(std::move(xs), std::move(vs));
        if (f.domain().lo > domain.lo + 1e-12 || f.domain().hi < domain.hi - 1e-12)
            throw ParseError("[" + name + "] samples do not cover the declared interval",
                             blk.samples.front().first);
        return f.restricted(domain);
    }
    throw ParseError("[" + name + "] unknown kind '" + blk.kind + "'", blk.kind_line);
}

}  // namespace

ProblemSpec parse_spec_string(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::string section;  // "", "q", "r", "h"
    std::map<std::string, std::pair<int, std::string>> scalars;
    std::map<std::string, CoeffBlock> blocks;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (size_t hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", line_no);
            section = strip(line.substr(1, line.size() - 2));
            if (section != "q" && section != "r" && section != "h")
                throw ParseError("unknown section [" + section + "]", line_no);
            blocks[section].start_line = line_no;
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
        std::string key = strip(line.substr(0, eq));
        std::string val = strip(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ParseError("expected 'key = value'", line_no);

        if (section.empty()) {
            if (key != "a" && key != "b" && key != "alpha" && key != "beta" && key != "name")
                throw ParseError("unknown key '" + key + "'", line_no);
            scalars[key] = {line_no, val};
        } else {
            CoeffBlock& blk = blocks[section];
            if (key == "kind") {
                blk.kind = val;
                blk.kind_line = line_no;
            } else if (key == "value") {
                blk.value = parse_number(val, line_no);
            } else if (key == "piece") {
                blk.pieces.emplace_back(line_no, parse_numbers(val, line_no));
            } else if (key == "sample") {
                blk.samples.emplace_back(line_no, parse_numbers(val, line_no));
            } else {
                throw ParseError("unknown key '" + key + "' in [" + section + "]", line_no);
            }
        }
    }

    for (const char* req : {"a", "b", "alpha", "beta"})
        if (!scalars.count(req)) throw ParseError(std::string("missing key '") + req + "'", line_no);
    for (const char* req : {"q", "r", "h"})
        if (!blocks.count(req)) throw ParseError(std::string("missing section [") + req + "]", line_no);

    ProblemSpec spec;
    if (scalars.count("name")) spec.name = scalars["name"].second;
    spec.a = parse_number(scalars["a"].second, scalars["a"].first);
    spec.b = parse_number(scalars["b"].second, scalars["b"].first);
    spec.alpha = parse_number(scalars["alpha"].second, scalars["alpha"].first);
    spec.beta = parse_number(scalars["beta"].second, scalars["beta"].first);
    if (!(spec.a < 0.0)) throw ParseError("'a' must be negative", scalars["a"].first);
    if (!(spec.b > 0.0)) throw ParseError("'b' must be positive", scalars["b"].first);

    spec.q = build_coefficient(blocks["q"], "q", {spec.a, spec.b});
    spec.r = build_coefficient(blocks["r"], "r", {spec.a, spec.b});
    spec.h = build_coefficient(blocks["h"], "h", {-1.0, 1.0});
    return spec;
}

ProblemSpec parse_spec_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open spec file '" + path + "'", 0);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_spec_string(ss.str());
}

}  // namespace masslab
