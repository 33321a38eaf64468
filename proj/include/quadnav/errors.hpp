#pragma once

#include <stdexcept>
#include <string>

namespace quadnav {

// Config / input problems. CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Simulator produced a non-finite state. CLI exit code 3.
struct SimulationDiverged : std::runtime_error {
    explicit SimulationDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

// Training loss went non-finite. CLI exit code 3.
struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure outside the simulator (PDE blow-up, bad covariance). Exit code 3.
struct NumericalInstability : std::runtime_error {
    explicit NumericalInstability(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientData : std::runtime_error {
    explicit InsufficientData(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace quadnav
