#include "quadnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quadnav/errors.hpp"
#include "quadnav/rng.hpp"

namespace quadnav::sim {

namespace {

Vec3 mode_axes(DisturbanceMode mode) {
    switch (mode) {
    case DisturbanceMode::X: return {1, 0, 0};
    case DisturbanceMode::Z: return {0, 0, 1};
    case DisturbanceMode::XYZ: return {1, 1, 1};
    case DisturbanceMode::NONE: return {0, 0, 0};
    }
    return {0, 0, 0};
}

} // namespace

const char* mode_name(DisturbanceMode mode) {
    switch (mode) {
    case DisturbanceMode::X: return "x";
    case DisturbanceMode::Z: return "z";
    case DisturbanceMode::XYZ: return "xyz";
    case DisturbanceMode::NONE: return "none";
    }
    return "none";
}

DisturbanceMode mode_from_name(const std::string& name) {
    if (name == "x") return DisturbanceMode::X;
    if (name == "z") return DisturbanceMode::Z;
    if (name == "xyz") return DisturbanceMode::XYZ;
    if (name == "none") return DisturbanceMode::NONE;
    throw ConfigError("unknown disturbance mode '" + name + "' (expected x|z|xyz|none)");
}

Vec3 wind_at_step(const DisturbanceSchedule& schedule, long sim_step) {
    if (schedule.mode == DisturbanceMode::NONE) return {0, 0, 0};
    Vec3 axes = mode_axes(schedule.mode);
    if (schedule.fixed) return axes * schedule.magnitude;
    // Training mode: the direction flips (pseudo)randomly every flip_period
    // steps. A pure hash of the block index keeps this an O(1) function of
    // sim_step instead of a mutable stream.
    uint64_t block = uint64_t(sim_step / schedule.flip_period);
    uint64_t h = splitmix64(schedule.seed ^ splitmix64(block));
    Vec3 out;
    for (int a = 0; a < 3; ++a) {
        double sign = (h >> a) & 1 ? 1.0 : -1.0;
        out[a] = axes[a] * schedule.magnitude * sign;
    }
    return out;
}

TransitionRecord execute_waypoint(const KinematicState& state,
                                  const WaypointCommand& cmd,
                                  const Vec3& wind,
                                  const LowLevelConfig& cfg) {
    TransitionRecord rec;
    rec.commanded = cmd;
    rec.start_state = state;
    rec.wind_applied = wind;

    Vec3 p = state.position;
    Vec3 v = state.linear_velocity;
    Vec3 integral{0, 0, 0};

    int steps = 0;
    int held = 0;
    for (int k = 0; k < cfg.max_inner_steps; ++k) {
        Vec3 e = cmd.target_position - p;
        if (e.norm() <= cfg.arrival_tolerance && v.norm() <= cfg.settle_speed) {
            if (++held >= cfg.settle_steps) break;
        } else {
            held = 0;
        }
        Vec3 force;
        for (int a = 0; a < 3; ++a) {
            double vref = std::copysign(
                std::min(cmd.axis_velocities[a], std::abs(e[a]) / cfg.slow_time), e[a]);
            integral[a] += e[a] * cfg.inner_dt;
            double f = cfg.kp[a] * e[a] + cfg.ki[a] * integral[a] +
                       cfg.kd[a] * (vref - v[a]);
            force[a] = std::clamp(f, -cfg.force_limit, cfg.force_limit);
        }
        // semi-implicit Euler
        v += (force + wind) * (cfg.inner_dt / cfg.mass);
        p += v * cfg.inner_dt;
        steps = k + 1;
        if (!p.is_finite() || !v.is_finite()) {
            int axis = !std::isfinite(p.x) || !std::isfinite(v.x)   ? 0
                       : !std::isfinite(p.y) || !std::isfinite(v.y) ? 1
                                                                    : 2;
            throw SimulationDiverged("low-level controller diverged on axis " +
                                     std::string(1, char('x' + axis)) + " at inner step " +
                                     std::to_string(k));
        }
    }

    rec.end_state = state;
    rec.end_state.position = p;
    rec.end_state.linear_velocity = v;
    rec.per_axis_error = p - cmd.target_position;
    rec.inner_steps_used = steps;
    return rec;
}

} // namespace quadnav::sim
