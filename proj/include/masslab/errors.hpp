#pragma once

#include <stdexcept>
#include <string>

namespace masslab {

// argument outside the operation's admissible set
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// a solve got too close to the spectrum of the homogeneous problem
struct NearSingularError : std::runtime_error {
    explicit NearSingularError(const std::string& what) : std::runtime_error(what) {}
};

// bracketing/iteration failure; carries the eigenvalue index under suspicion
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what, int index = -1)
        : std::runtime_error(what), suspect_index(index) {}
    int suspect_index;
};

// inconsistent harness/sweep configuration
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// spec file parse failure, anchored to a line
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line_no)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
    int line;
};

}  // namespace masslab
