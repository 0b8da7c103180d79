#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aqo {

// Raised for malformed caller input: bad ranges, inconsistent structures,
// unparseable files. The CLI maps this to exit code 3.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a request exceeds a configured resource cap (problem size,
// enumeration limit). The CLI maps this to exit code 4.
class CapError : public std::runtime_error {
public:
    explicit CapError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an iterative numerical routine fails to reach its tolerance.
// Carries the per-quantity residuals observed at the point of failure.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::vector<double> residuals = {})
        : std::runtime_error(what), residuals(std::move(residuals)) {}

    std::vector<double> residuals;
};

}  // namespace aqo
