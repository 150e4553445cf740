#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masslab/problem_spec.hpp"

namespace masslab {

struct BuiltinEntry {
    std::string name;
    std::string description;
};

// bundled analytic and randomized test problems
std::vector<BuiltinEntry> builtin_specs();

// seed only affects the randomized entry
ProblemSpec builtin_spec(const std::string& name, std::uint64_t seed = 1);

}  // namespace masslab
