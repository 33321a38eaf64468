#include "quadnav/metrics.hpp"

#include <cmath>
#include <sstream>

#include "quadnav/errors.hpp"
#include "quadnav/rng.hpp"

namespace quadnav::metrics {

double distance_traveled(const Trajectory& traj) {
    double total = 0;
    for (size_t i = 1; i < traj.positions.size(); ++i)
        total += (traj.positions[i] - traj.positions[i - 1]).norm();
    return total;
}

double smoothness(const Trajectory& traj) {
    const auto& p = traj.positions;
    if (p.size() < 3)
        throw InsufficientData("smoothness needs at least 3 trajectory points, got " +
                               std::to_string(p.size()));
    double total = 0;
    for (size_t i = 1; i + 1 < p.size(); ++i)
        total += (p[i + 1] - p[i] * 2.0 + p[i - 1]).norm();
    return total / static_cast<double>(p.size() - 2);
}

double avg_ascent_step(const Trajectory& traj, int k) {
    if (k <= 0) throw ConfigError("avg_ascent_step: k must be positive");
    const size_t n = std::min<size_t>(static_cast<size_t>(k), traj.actions.size());
    if (n == 0)
        throw InsufficientData("avg_ascent_step: trajectory has no actions");
    double total = 0;
    for (size_t i = 0; i < n; ++i) total += traj.actions[i].delta.norm();
    return total / static_cast<double>(n);
}

bool converged(const Trajectory& traj, const Vec3& destination, double tol) {
    if (tol <= 0) throw ConfigError("converged: tolerance must be positive");
    if (traj.positions.empty())
        throw InsufficientData("converged: empty trajectory");
    return (traj.positions.back() - destination).norm() <= tol;
}

MetricsReport compute_metrics(const Trajectory& traj, const Vec3& destination,
                              double tol, int ascent_k) {
    MetricsReport rep;
    rep.distance_traveled = distance_traveled(traj);
    rep.smoothness = smoothness(traj);
    rep.avg_ascent_step = avg_ascent_step(traj, ascent_k);
    rep.converged = converged(traj, destination, tol);
    rep.final_distance = (traj.positions.back() - destination).norm();

    double err_acc = 0;
    rep.action_error_series.reserve(traj.actions.size());
    rep.action_norm_series.reserve(traj.actions.size());
    for (size_t t = 0; t < traj.actions.size(); ++t) {
        const double cmd = traj.actions[t].delta.norm();
        const double executed = (traj.positions[t + 1] - traj.positions[t]).norm();
        rep.action_error_series.push_back(cmd - executed);
        rep.action_norm_series.push_back(cmd);
        err_acc += traj.errors[t].norm();
    }
    rep.mean_action_error =
        traj.errors.empty() ? 0.0 : err_acc / static_cast<double>(traj.errors.size());
    return rep;
}

Trajectory rollout_episode(const ppo::TrainedPolicy& policy,
                           const env::EnvConfig& env_cfg,
                           const sim::DisturbanceSchedule& fixed_schedule,
                           const Vec3& initial_position, uint64_t seed,
                           double start_jitter,
                           const sim::LowLevelConfig& low) {
    env::EnvConfig cfg = env_cfg;
    cfg.variant = policy.variant;
    cfg.esr_weights = policy.weights;
    cfg.initial_position = initial_position;

    Rng rng(seed);
    if (start_jitter > 0) {
        cfg.initial_position.x += rng.uniform(-start_jitter, start_jitter);
        cfg.initial_position.y += rng.uniform(-start_jitter, start_jitter);
        cfg.initial_position.z += rng.uniform(-start_jitter, start_jitter);
    }

    env::Environment e(cfg, fixed_schedule, low);
    if (e.obs_size() != policy.params.obs_dim)
        throw ConfigError("rollout_episode: policy expects obs dim " +
                          std::to_string(policy.params.obs_dim) + " but variant '" +
                          env::variant_name(policy.variant) + "' produces " +
                          std::to_string(e.obs_size()));

    Trajectory traj;
    traj.variant = env::variant_name(policy.variant);
    traj.mode = sim::mode_name(fixed_schedule.mode);
    traj.magnitude = fixed_schedule.magnitude;
    traj.seed = seed;

    e.reset();
    traj.positions.push_back(e.observation().kinematic.position);
    bool done = false;
    while (!done) {
        const auto obs_v = e.observation_vector();
        const Eigen::VectorXd obs =
            Eigen::Map<const Eigen::VectorXd>(obs_v.data(), long(obs_v.size()));
        const auto out = ppo::policy_forward(policy.params, obs);
        const auto action =
            e.squash({out.mean[0], out.mean[1], out.mean[2], out.mean[3]});
        const auto res = e.step(action);
        traj.actions.push_back(action);
        traj.positions.push_back(e.observation().kinematic.position);
        traj.errors.push_back(res.record.per_axis_error);
        traj.rewards.push_back({res.reward.r_nav, res.reward.r_err});
        done = res.done;
    }
    return traj;
}

SweepResult run_sweep(const SweepSpec& spec,
                      const std::vector<ppo::TrainedPolicy>& policies,
                      const env::EnvConfig& env_cfg,
                      const sim::LowLevelConfig& low) {
    if (policies.empty()) throw ConfigError("run_sweep: no policies given");
    if (spec.modes.empty()) throw ConfigError("run_sweep: no disturbance modes given");
    if (spec.magnitudes.empty()) throw ConfigError("run_sweep: no magnitudes given");
    if (spec.episodes_per_cell <= 0)
        throw ConfigError("run_sweep: episodes_per_cell must be positive");

    SweepResult result;
    for (size_t pi = 0; pi < policies.size(); ++pi) {
        const auto& policy = policies[pi];
        for (const auto mode : spec.modes) {
            for (const double mag : spec.magnitudes) {
                sim::DisturbanceSchedule sched;
                sched.mode = mode;
                sched.magnitude = mag;
                sched.fixed = true;
                for (int ep = 0; ep < spec.episodes_per_cell; ++ep) {
                    SweepRow row;
                    row.label = env::variant_name(policy.variant);
                    row.mode = sim::mode_name(mode);
                    row.magnitude = mag;
                    row.episode = ep;
                    // seeded per (policy, episode) only, so cells that differ
                    // just in mode/magnitude share start jitter and stay
                    // comparable (and magnitude-0 rows match across modes)
                    row.seed = splitmix64(spec.seed ^
                                          splitmix64((uint64_t(pi) << 32) + uint64_t(ep)));
                    try {
                        const auto traj = rollout_episode(
                            policy, env_cfg, sched, spec.eval_initial_position,
                            row.seed, spec.start_jitter, low);
                        row.metrics = compute_metrics(traj, env_cfg.destination,
                                                      spec.converged_tol,
                                                      spec.ascent_steps);
                        double g = 1.0;
                        for (const auto& r : traj.rewards) {
                            row.discounted_return_nav += g * r[0];
                            row.discounted_return_err += g * r[1];
                            row.discounted_return_scalar +=
                                g * (policy.weights[0] * r[0] + policy.weights[1] * r[1]);
                            g *= spec.gamma;
                        }
                    } catch (const std::exception& ex) {
                        row.error = ex.what();
                        result.any_failed = true;
                    }
                    result.rows.push_back(std::move(row));
                }
            }
        }
    }
    return result;
}

} // namespace quadnav::metrics
