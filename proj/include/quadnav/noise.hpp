#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "quadnav/env.hpp"
#include "quadnav/sim.hpp"
#include "quadnav/vec3.hpp"

namespace quadnav::noise {

using quadnav::Vec3;

// Mean and covariance of per-step action errors.
struct ErrorStats {
    Vec3 mean;
    std::array<std::array<double, 3>, 3> covariance{};
};

struct RandomWalkConfig {
    long num_steps = 10000;
    sim::DisturbanceSchedule schedule;
    uint64_t seed = 0;
    double v_target_max = 20.0; // walk samples v_target uniformly in [0, this]
};

// Uniform random actions executed by the low-level controller under the
// schedule; returns the raw per-step errors x_{t+1} − (x_t + Δx_t).
std::vector<Vec3> run_random_walk(const RandomWalkConfig& cfg,
                                  const env::EnvConfig& env_cfg,
                                  const sim::LowLevelConfig& low = {});

// Biased 1/N moment estimators.
ErrorStats estimate_stats(const std::vector<Vec3>& samples);

// Draws from N(mean, covariance) via a symmetric eigendecomposition square
// root. Eigenvalues below −1e−12 are rejected; small negatives clamp to 0.
std::vector<Vec3> sample_mvn(const ErrorStats& stats, long n, uint64_t seed);

// (1/n) Σ ‖sample‖ over the same stream sample_mvn would draw.
double expected_error_magnitude(const ErrorStats& stats, long n, uint64_t seed);

} // namespace quadnav::noise
