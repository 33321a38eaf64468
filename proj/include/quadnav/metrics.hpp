#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "quadnav/env.hpp"
#include "quadnav/ppo.hpp"

namespace quadnav::metrics {

using quadnav::Vec3;

struct Trajectory {
    std::vector<Vec3> positions;               // T+1 points, start included
    std::vector<env::ActionCommand> actions;   // T
    std::vector<Vec3> errors;                  // per-step per-axis action error
    std::vector<std::array<double, 2>> rewards; // (r_nav, r_err)
    std::string variant;
    std::string mode;
    double magnitude = 0;
    uint64_t seed = 0;
};

struct MetricsReport {
    double distance_traveled = 0;
    double smoothness = 0;
    double avg_ascent_step = 0;
    bool converged = false;
    double final_distance = 0;
    double mean_action_error = 0;                 // mean |per-axis error|2 per step
    std::vector<double> action_error_series;      // |action|2 − |executed step|2
    std::vector<double> action_norm_series;       // |action|2 (bounded by 0.0866)
};

struct SweepSpec {
    std::vector<env::Variant> variants;
    std::vector<sim::DisturbanceMode> modes;   // X, Z, XYZ
    std::vector<double> magnitudes;            // N, signed
    Vec3 eval_initial_position{2, 0, 0};
    int episodes_per_cell = 5;
    uint64_t seed = 0;
    double gamma = 0.99;       // for cumulative discounted rewards
    double converged_tol = 0.1;
    int ascent_steps = 15;     // k for avg_ascent_step
    double start_jitter = 0.05; // per-axis uniform jitter of the eval start
};

double distance_traveled(const Trajectory& traj);
double smoothness(const Trajectory& traj);
double avg_ascent_step(const Trajectory& traj, int k);
bool converged(const Trajectory& traj, const Vec3& destination, double tol);

MetricsReport compute_metrics(const Trajectory& traj, const Vec3& destination,
                              double tol, int ascent_k);

// One evaluation episode under a fixed wind vector: deterministic (mean)
// policy actions; the seed only jitters the start position so that per-cell
// episodes differ reproducibly.
Trajectory rollout_episode(const ppo::TrainedPolicy& policy,
                           const env::EnvConfig& env_cfg,
                           const sim::DisturbanceSchedule& fixed_schedule,
                           const Vec3& initial_position, uint64_t seed,
                           double start_jitter,
                           const sim::LowLevelConfig& low = {});

struct SweepRow {
    std::string label; // policy name; defaults to the variant name
    std::string mode;
    double magnitude = 0;
    int episode = 0;
    uint64_t seed = 0;
    MetricsReport metrics;
    double discounted_return_nav = 0;
    double discounted_return_err = 0;
    double discounted_return_scalar = 0;
    std::string error; // nonempty if the cell episode failed
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool any_failed = false;
};

SweepResult run_sweep(const SweepSpec& spec,
                      const std::vector<ppo::TrainedPolicy>& policies,
                      const env::EnvConfig& env_cfg,
                      const sim::LowLevelConfig& low = {});

} // namespace quadnav::metrics
