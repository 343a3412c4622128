#pragma once

#include <stdexcept>
#include <string>

namespace sorterlab {

// Configuration / precondition violations. CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
    static constexpr int exit_code = 2;
};

// Numerical-domain failures: pulse tails falling off the grid, convolution
// overflow, quadrature out of range. CLI maps these to exit code 3.
class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& what, double tail_mass)
        : std::runtime_error(what), tail_mass_(tail_mass) {}
    double tail_mass() const { return tail_mass_; }
    static constexpr int exit_code = 3;

private:
    double tail_mass_;
};

// Array-shape mismatches between grids and amplitudes.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Mathematical domain errors (e.g. QBER beyond the six-state threshold).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Count extraction with empty normalization bins.
class InsufficientStatistics : public std::runtime_error {
public:
    explicit InsufficientStatistics(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sorterlab
