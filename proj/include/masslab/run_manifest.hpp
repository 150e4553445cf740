#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masslab/convergence.hpp"

namespace masslab {

// Batch run description. Tasks: perturbed, limit, convergence, resolvent.
// The convergence task always includes the perturbed and limit stages.
struct RunManifest {
    std::string spec_ref;  // file path or "builtin:<name>"
    std::string out_dir = "out";
    std::vector<std::string> tasks = {"perturbed", "limit", "convergence", "resolvent"};
    SweepConfig sweep;
    std::uint64_t seed = 1;
    bool with_svg = true;
};

// exit codes: 0 ok, 1 run-level checks failed, 2 parse/config error,
// 3 numerical failure
int run_manifest(const RunManifest& manifest);

}  // namespace masslab
