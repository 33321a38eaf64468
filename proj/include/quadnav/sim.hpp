#pragma once

#include <cstdint>
#include <string>

#include "quadnav/vec3.hpp"

namespace quadnav::sim {

using quadnav::Vec3;

// 12-dim kinematic state. This simulator is a translational point mass:
// orientation and angular_velocity are carried as zeros to preserve the
// observation layout expected by the RL side.
struct KinematicState {
    Vec3 position;
    Vec3 orientation;      // roll/pitch/yaw, rad; always zero here
    Vec3 linear_velocity;  // m/s
    Vec3 angular_velocity; // rad/s; always zero here
};

enum class DisturbanceMode { X, Z, XYZ, NONE };

const char* mode_name(DisturbanceMode mode);
DisturbanceMode mode_from_name(const std::string& name);

// Step/pulse wind force schedule. fixed=true holds a constant vector
// (evaluation); fixed=false resamples per-axis signs every flip_period
// steps from a pure hash of (seed, block) (training).
struct DisturbanceSchedule {
    DisturbanceMode mode = DisturbanceMode::NONE;
    double magnitude = 0.0; // N; sign folded into the emitted vector
    int flip_period = 20;   // simulation steps
    bool fixed = false;
    uint64_t seed = 0;
};

Vec3 wind_at_step(const DisturbanceSchedule& schedule, long sim_step);

struct WaypointCommand {
    Vec3 target_position;          // m, absolute
    Vec3 axis_velocities;          // m/s, nonnegative per axis
};

// Per-axis PID position controller with velocity feed-forward. The craft is
// considered arrived once it holds |pos err| <= arrival_tolerance AND
// |vel| <= settle_speed for settle_steps consecutive inner steps; a bare
// position check would freeze transient fly-throughs and turnaround points,
// making the recorded error insensitive to wind.
struct LowLevelConfig {
    Vec3 kp{16.0, 16.0, 16.0};
    Vec3 ki{0.0, 0.0, 0.0};
    Vec3 kd{2.4, 2.4, 2.4};
    double inner_dt = 0.004;          // s
    int max_inner_steps = 120;
    double arrival_tolerance = 0.005; // m
    double mass = 0.027;              // kg
    double slow_time = 0.06;          // s; velocity ramp |e|/slow_time near target
    double force_limit = 0.15;        // N per axis
    double settle_speed = 0.02;       // m/s
    int settle_steps = 10;
};

struct TransitionRecord {
    WaypointCommand commanded;
    KinematicState start_state;
    KinematicState end_state;
    Vec3 per_axis_error;  // end position − commanded target, componentwise
    Vec3 wind_applied;    // N
    int inner_steps_used = 0;
};

// Integrates the closed-loop controller under a constant wind force until
// settled or out of budget. Throws SimulationDiverged on non-finite state.
TransitionRecord execute_waypoint(const KinematicState& state,
                                  const WaypointCommand& cmd,
                                  const Vec3& wind,
                                  const LowLevelConfig& cfg);

} // namespace quadnav::sim
