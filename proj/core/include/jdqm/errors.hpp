#pragma once

#include <stdexcept>
#include <string>

namespace jdqm {

/// Raised for malformed experiment configuration (unknown registry name,
/// bad ladder, missing keys). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical routine leaves its domain of validity: scheme
/// blow-up (non-finite state), inverse-transform non-convergence, runaway
/// grids. Carries the offending values in the message.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a Monte Carlo study cannot produce a trustworthy report
/// (exclusion budget exceeded, coupling violations). CLI exit code 3.
class ExperimentError : public std::runtime_error {
public:
    explicit ExperimentError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace jdqm
