#pragma once

#include <stdexcept>
#include <string>

namespace srflow {

// Bad model names, invalid parameters, inconsistent dimensions.
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver divergence, non-finite states, failed root finding.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unwritable paths, malformed input files.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace srflow
