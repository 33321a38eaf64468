#include "quadnav/noise.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "quadnav/errors.hpp"
#include "quadnav/rng.hpp"

namespace quadnav::noise {

std::vector<Vec3> run_random_walk(const RandomWalkConfig& cfg,
                                  const env::EnvConfig& env_cfg,
                                  const sim::LowLevelConfig& low) {
    Rng rng(cfg.seed);
    std::vector<Vec3> errors;
    errors.reserve(size_t(cfg.num_steps));

    sim::KinematicState state;
    state.position = env_cfg.initial_position;
    for (long t = 0; t < cfg.num_steps; ++t) {
        env::ActionCommand a;
        for (int i = 0; i < 3; ++i)
            a.delta[i] = rng.uniform(-env_cfg.action_limit, env_cfg.action_limit);
        a.v_target = rng.uniform(0.0, cfg.v_target_max);

        sim::WaypointCommand cmd;
        cmd.target_position = state.position + a.delta;
        cmd.axis_velocities = env::clip_velocity(a.v_target, a.delta, env_cfg.v_max);
        Vec3 wind = sim::wind_at_step(cfg.schedule, t);
        sim::TransitionRecord rec = sim::execute_waypoint(state, cmd, wind, low);
        errors.push_back(rec.per_axis_error);
        state = rec.end_state;
    }
    return errors;
}

ErrorStats estimate_stats(const std::vector<Vec3>& samples) {
    if (samples.size() < 2)
        throw InsufficientData("estimate_stats needs at least 2 samples, got " +
                               std::to_string(samples.size()));
    const double n = double(samples.size());
    ErrorStats s;
    for (const Vec3& v : samples) s.mean += v;
    s.mean = s.mean / n;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0;
            for (const Vec3& v : samples) acc += v[i] * v[j];
            s.covariance[i][j] = acc / n - s.mean[i] * s.mean[j];
        }
    return s;
}

namespace {

// Symmetric square root with clamping of tiny negative eigenvalues.
Eigen::Matrix3d covariance_sqrt(const ErrorStats& stats) {
    Eigen::Matrix3d cov;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) cov(i, j) = stats.covariance[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Eigen::Vector3d ev = es.eigenvalues();
    for (int i = 0; i < 3; ++i) {
        if (ev[i] < -1e-12)
            throw NumericalInstability("covariance not PSD: eigenvalue " +
                                       std::to_string(ev[i]));
        if (ev[i] < 0) ev[i] = 0;
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

template <typename Fn>
void mvn_stream(const ErrorStats& stats, long n, uint64_t seed, Fn&& emit) {
    Eigen::Matrix3d a = covariance_sqrt(stats);
    Rng rng(seed);
    for (long k = 0; k < n; ++k) {
        Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
        Eigen::Vector3d x = a * z;
        emit(Vec3{stats.mean.x + x[0], stats.mean.y + x[1], stats.mean.z + x[2]});
    }
}

} // namespace

std::vector<Vec3> sample_mvn(const ErrorStats& stats, long n, uint64_t seed) {
    std::vector<Vec3> out;
    out.reserve(size_t(n));
    mvn_stream(stats, n, seed, [&](const Vec3& v) { out.push_back(v); });
    return out;
}

double expected_error_magnitude(const ErrorStats& stats, long n, uint64_t seed) {
    if (n < 1) throw InsufficientData("expected_error_magnitude needs n >= 1");
    double acc = 0;
    mvn_stream(stats, n, seed, [&](const Vec3& v) { acc += v.norm(); });
    return acc / double(n);
}

} // namespace quadnav::noise
