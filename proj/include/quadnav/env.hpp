#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "quadnav/sim.hpp"
#include "quadnav/vec3.hpp"

namespace quadnav::env {

using quadnav::Vec3;
using sim::DisturbanceSchedule;
using sim::KinematicState;
using sim::LowLevelConfig;
using sim::TransitionRecord;

enum class Variant { BASELINE, DIST, DIST_ERR, DIST_ERR_U };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// High-level action: relative waypoint plus a scalar target speed.
struct ActionCommand {
    Vec3 delta;            // m, each component within ±action_limit
    double v_target = 0.0; // m/s, >= 0
};

// Discounted cumulative action errors (one per axis).
struct ErrorState {
    double x_e = 0.0;
    double y_e = 0.0;
    double z_e = 0.0;

    double squared_norm() const { return x_e * x_e + y_e * y_e + z_e * z_e; }
};

struct ExtendedObservation {
    KinematicState kinematic;
    ErrorState error;
};

struct RewardVector {
    double r_nav = 0.0; // −squared distance to destination
    double r_err = 0.0; // −squared error-state norm
};

struct EnvConfig {
    Vec3 destination{0, 0, 1};
    Vec3 initial_position{0, 0, 0};
    double alpha = 0.9;       // error discount, in [0,1)
    double v_max = 0.5;       // m/s per-axis velocity cap
    int max_rl_steps = 150;
    Variant variant = Variant::BASELINE;
    std::array<double, 2> esr_weights{1.0, 0.5};
    double action_limit = 0.05; // m per axis
};

// clip(v_target * |delta|, v_max) per axis.
Vec3 clip_velocity(double v_target, const Vec3& delta, double v_max);

// e <- alpha * per_axis_error + alpha * prev, componentwise.
ErrorState update_error_state(const ErrorState& prev, const Vec3& per_axis_error,
                              double alpha);

RewardVector compute_rewards(const Vec3& next_pos, const ErrorState& err,
                             const EnvConfig& cfg);

// Plain weighted sum w·[r_nav, r_err].
double scalarize_esr(const RewardVector& r, const std::array<double, 2>& weights);

// Variant-aware scalarization: BASELINE/DIST force weights [1,0];
// DIST_ERR_U swaps r_err for −|delta|² of the action taken.
double scalarize_esr(const RewardVector& r, const std::array<double, 2>& weights,
                     Variant variant, const ActionCommand& action);

// Effective reward pair a variant scalarizes (second component is the
// substituted −|delta|² for DIST_ERR_U). SER training stores this pair.
std::array<double, 2> effective_rewards(const RewardVector& r, Variant variant,
                                        const ActionCommand& action);

// The task MDP. Owns the simulator state, the error recursion and the step
// counters; wind comes from the schedule (one RL step = one schedule step).
class Environment {
  public:
    Environment(EnvConfig cfg, DisturbanceSchedule schedule, LowLevelConfig low = {});

    struct StepResult {
        ExtendedObservation obs;
        RewardVector reward;
        double scalar_reward = 0.0;
        bool done = false;
        TransitionRecord record;
    };

    ExtendedObservation reset();
    // Raw policy outputs: squashed to bounds via tanh, then executed.
    StepResult step_raw(const std::array<double, 4>& raw_action);
    // Pre-bounded action (clamped to limits defensively).
    StepResult step(const ActionCommand& action);

    int obs_size() const;
    std::vector<double> observation_vector() const;

    ActionCommand squash(const std::array<double, 4>& raw) const;

    const EnvConfig& config() const { return cfg_; }
    const DisturbanceSchedule& schedule() const { return schedule_; }
    const LowLevelConfig& low_level() const { return low_; }
    const ExtendedObservation& observation() const { return obs_; }
    int steps_taken() const { return steps_; }
    long sim_step() const { return sim_step_; }

    // Snapshot/restore for deterministic checkpoint-resume.
    struct Snapshot {
        KinematicState state;
        ErrorState error;
        int steps = 0;
        long sim_step = 0;
    };
    Snapshot snapshot() const;
    void restore(const Snapshot& s);

  private:
    EnvConfig cfg_;
    DisturbanceSchedule schedule_;
    LowLevelConfig low_;
    ExtendedObservation obs_;
    int steps_ = 0;
    long sim_step_ = 0; // monotone across episodes; drives the wind schedule
};

std::vector<double> observation_vector(const ExtendedObservation& obs, Variant variant);

} // namespace quadnav::env
