#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadnav/env.hpp"
#include "quadnav/ppo.hpp"
#include "quadnav/reach.hpp"

namespace quadnav::config {

using nlohmann::json;

struct WalkRunConfig {
    long num_steps = 1000000;
    double v_target_max = 20.0;
};

struct SweepRunConfig {
    std::vector<std::string> modes{"x", "z", "xyz"};
    // Per-mode magnitude grids; the xyz grid is scaled down since the same
    // force is applied on all three axes.
    std::vector<double> magnitudes_x{-0.1, -0.05, 0, 0.05, 0.1};
    std::vector<double> magnitudes_z{-0.1, -0.05, 0, 0.05, 0.1};
    std::vector<double> magnitudes_xyz{-0.15, -0.075, 0, 0.075, 0.15};
    Vec3 eval_initial_position{2, 0, 0};
    int episodes_per_cell = 5;
    double converged_tol = 0.1;
    int ascent_steps = 15;
    double start_jitter = 0.05;
};

struct ReachRunConfig {
    reach::Grid3 grid;
    double tau = 3.0;
    double kappa = 0.25;
    double step_duration = 0.1;
    double cfl = 0.8;
    double target_radius = 0.1;
    Vec3 target_center{0, 0, 1};
    std::string slice_axis = "z";
    double slice_coordinate = 1.0;
};

struct RunConfig {
    std::string experiment = "default";
    uint64_t seed = 0;
    std::string output_dir = "out";
    env::EnvConfig env;
    sim::LowLevelConfig low_level;
    sim::DisturbanceSchedule schedule; // training-mode schedule for train/walk
    ppo::PpoConfig ppo;
    WalkRunConfig walk;
    SweepRunConfig sweep;
    ReachRunConfig reach;
    std::vector<std::array<double, 2>> weight_set{{1, 0}, {1, 0.5}, {1, 1}, {1, 2}};
};

// Strict parse: unknown keys anywhere are rejected with their dotted path;
// missing keys keep defaults. Throws ConfigError.
RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Full snapshot; parse_run_config(run_config_to_json(c)) == c.
json run_config_to_json(const RunConfig& cfg);

void validate(const RunConfig& cfg); // throws ConfigError

} // namespace quadnav::config
