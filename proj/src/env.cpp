#include "quadnav/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quadnav/errors.hpp"

namespace quadnav::env {

const char* variant_name(Variant v) {
    switch (v) {
    case Variant::BASELINE: return "baseline";
    case Variant::DIST: return "dist";
    case Variant::DIST_ERR: return "dist-err";
    case Variant::DIST_ERR_U: return "dist-err-u";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "baseline") return Variant::BASELINE;
    if (name == "dist") return Variant::DIST;
    if (name == "dist-err" || name == "dist_err") return Variant::DIST_ERR;
    if (name == "dist-err-u" || name == "dist_err_u") return Variant::DIST_ERR_U;
    throw ConfigError("unknown variant '" + name +
                      "' (expected baseline|dist|dist-err|dist-err-u)");
}

Vec3 clip_velocity(double v_target, const Vec3& delta, double v_max) {
    Vec3 out;
    for (int a = 0; a < 3; ++a)
        out[a] = std::min(v_target * std::abs(delta[a]), v_max);
    return out;
}

ErrorState update_error_state(const ErrorState& prev, const Vec3& per_axis_error,
                              double alpha) {
    return {alpha * (per_axis_error.x + prev.x_e),
            alpha * (per_axis_error.y + prev.y_e),
            alpha * (per_axis_error.z + prev.z_e)};
}

RewardVector compute_rewards(const Vec3& next_pos, const ErrorState& err,
                             const EnvConfig& cfg) {
    return {-(next_pos - cfg.destination).squared_norm(), -err.squared_norm()};
}

double scalarize_esr(const RewardVector& r, const std::array<double, 2>& weights) {
    return weights[0] * r.r_nav + weights[1] * r.r_err;
}

std::array<double, 2> effective_rewards(const RewardVector& r, Variant variant,
                                        const ActionCommand& action) {
    if (variant == Variant::DIST_ERR_U)
        return {r.r_nav, -action.delta.squared_norm()};
    return {r.r_nav, r.r_err};
}

double scalarize_esr(const RewardVector& r, const std::array<double, 2>& weights,
                     Variant variant, const ActionCommand& action) {
    std::array<double, 2> eff = effective_rewards(r, variant, action);
    std::array<double, 2> w = weights;
    if (variant == Variant::BASELINE || variant == Variant::DIST) w = {1.0, 0.0};
    return w[0] * eff[0] + w[1] * eff[1];
}

std::vector<double> observation_vector(const ExtendedObservation& obs, Variant variant) {
    std::vector<double> v;
    v.reserve(15);
    const KinematicState& k = obs.kinematic;
    for (const Vec3* part : {&k.position, &k.orientation, &k.linear_velocity,
                             &k.angular_velocity})
        for (int a = 0; a < 3; ++a) v.push_back((*part)[a]);
    if (variant == Variant::DIST_ERR || variant == Variant::DIST_ERR_U) {
        v.push_back(obs.error.x_e);
        v.push_back(obs.error.y_e);
        v.push_back(obs.error.z_e);
    }
    return v;
}

Environment::Environment(EnvConfig cfg, DisturbanceSchedule schedule, LowLevelConfig low)
    : cfg_(std::move(cfg)), schedule_(schedule), low_(low) {
    reset();
}

ExtendedObservation Environment::reset() {
    obs_ = ExtendedObservation{};
    obs_.kinematic.position = cfg_.initial_position;
    steps_ = 0;
    // sim_step_ deliberately not reset: the wind schedule keeps flipping
    // across episode boundaries, like a continuously running environment.
    return obs_;
}

ActionCommand Environment::squash(const std::array<double, 4>& raw) const {
    ActionCommand a;
    for (int i = 0; i < 3; ++i) a.delta[i] = cfg_.action_limit * std::tanh(raw[i]);
    // maps R onto (0, 2*v_max/action_limit): full per-axis speed reachable
    double half = cfg_.v_max / cfg_.action_limit;
    a.v_target = half * (1.0 + std::tanh(raw[3]));
    return a;
}

Environment::StepResult Environment::step_raw(const std::array<double, 4>& raw_action) {
    return step(squash(raw_action));
}

Environment::StepResult Environment::step(const ActionCommand& action) {
    ActionCommand a = action;
    for (int i = 0; i < 3; ++i)
        a.delta[i] = std::clamp(a.delta[i], -cfg_.action_limit, cfg_.action_limit);
    a.v_target = std::max(0.0, a.v_target);

    Vec3 wind = sim::wind_at_step(schedule_, sim_step_);
    sim::WaypointCommand cmd;
    cmd.target_position = obs_.kinematic.position + a.delta;
    cmd.axis_velocities = clip_velocity(a.v_target, a.delta, cfg_.v_max);

    TransitionRecord rec = sim::execute_waypoint(obs_.kinematic, cmd, wind, low_);

    obs_.kinematic = rec.end_state;
    obs_.error = update_error_state(obs_.error, rec.per_axis_error, cfg_.alpha);

    StepResult res;
    res.record = rec;
    res.reward = compute_rewards(obs_.kinematic.position, obs_.error, cfg_);
    res.scalar_reward = scalarize_esr(res.reward, cfg_.esr_weights, cfg_.variant, a);
    ++steps_;
    ++sim_step_;
    res.done = steps_ >= cfg_.max_rl_steps;
    res.obs = obs_;
    return res;
}

int Environment::obs_size() const {
    return (cfg_.variant == Variant::DIST_ERR || cfg_.variant == Variant::DIST_ERR_U)
               ? 15
               : 12;
}

std::vector<double> Environment::observation_vector() const {
    return env::observation_vector(obs_, cfg_.variant);
}

Environment::Snapshot Environment::snapshot() const {
    return {obs_.kinematic, obs_.error, steps_, sim_step_};
}

void Environment::restore(const Snapshot& s) {
    obs_.kinematic = s.state;
    obs_.error = s.error;
    steps_ = s.steps;
    sim_step_ = s.sim_step;
}

} // namespace quadnav::env
