#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quadnav/config.hpp"
#include "quadnav/env.hpp"
#include "quadnav/errors.hpp"
#include "quadnav/io.hpp"
#include "quadnav/metrics.hpp"
#include "quadnav/noise.hpp"
#include "quadnav/ppo.hpp"
#include "quadnav/reach.hpp"
#include "quadnav/sim.hpp"

namespace py = pybind11;
using namespace quadnav;

namespace {

std::array<std::array<double, 3>, 3> cov_get(const noise::ErrorStats& s) {
    return s.covariance;
}

void cov_set(noise::ErrorStats& s, const std::array<std::array<double, 3>, 3>& c) {
    s.covariance = c;
}

reach::Axis axis_from_string(const std::string& name) {
    if (name == "x") return reach::Axis::X;
    if (name == "y") return reach::Axis::Y;
    if (name == "z") return reach::Axis::Z;
    throw ConfigError("axis must be one of x|y|z, got '" + name + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "quadnav core: simulator, RL environment, PPO, error statistics, "
              "and HJ reachability";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SimulationDiverged>(m, "SimulationDiverged",
                                               PyExc_RuntimeError);
    py::register_exception<TrainingDiverged>(m, "TrainingDiverged",
                                             PyExc_RuntimeError);
    py::register_exception<NumericalInstability>(m, "NumericalInstability",
                                                 PyExc_ArithmeticError);
    py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_ValueError);

    py::class_<Vec3>(m, "Vec3")
        .def(py::init<>())
        .def(py::init<double, double, double>())
        .def(py::init([](const std::array<double, 3>& a) {
            return Vec3{a[0], a[1], a[2]};
        }))
        .def_readwrite("x", &Vec3::x)
        .def_readwrite("y", &Vec3::y)
        .def_readwrite("z", &Vec3::z)
        .def("norm", &Vec3::norm)
        .def("__getitem__", [](const Vec3& v, int i) {
            if (i < 0 || i > 2) throw py::index_error();
            return v[i];
        })
        .def("__len__", [](const Vec3&) { return 3; })
        .def("__repr__", [](const Vec3& v) {
            return "Vec3(" + io::fmt9(v.x) + ", " + io::fmt9(v.y) + ", " +
                   io::fmt9(v.z) + ")";
        });
    py::implicitly_convertible<std::array<double, 3>, Vec3>();

    py::enum_<sim::DisturbanceMode>(m, "DisturbanceMode")
        .value("X", sim::DisturbanceMode::X)
        .value("Z", sim::DisturbanceMode::Z)
        .value("XYZ", sim::DisturbanceMode::XYZ)
        .value("NONE", sim::DisturbanceMode::NONE);

    py::class_<sim::DisturbanceSchedule>(m, "DisturbanceSchedule")
        .def(py::init<>())
        .def_readwrite("mode", &sim::DisturbanceSchedule::mode)
        .def_readwrite("magnitude", &sim::DisturbanceSchedule::magnitude)
        .def_readwrite("flip_period", &sim::DisturbanceSchedule::flip_period)
        .def_readwrite("fixed", &sim::DisturbanceSchedule::fixed)
        .def_readwrite("seed", &sim::DisturbanceSchedule::seed);

    m.def("wind_at_step", &sim::wind_at_step, py::arg("schedule"),
          py::arg("sim_step"));

    py::class_<sim::LowLevelConfig>(m, "LowLevelConfig")
        .def(py::init<>())
        .def_readwrite("kp", &sim::LowLevelConfig::kp)
        .def_readwrite("ki", &sim::LowLevelConfig::ki)
        .def_readwrite("kd", &sim::LowLevelConfig::kd)
        .def_readwrite("inner_dt", &sim::LowLevelConfig::inner_dt)
        .def_readwrite("max_inner_steps", &sim::LowLevelConfig::max_inner_steps)
        .def_readwrite("arrival_tolerance", &sim::LowLevelConfig::arrival_tolerance)
        .def_readwrite("mass", &sim::LowLevelConfig::mass)
        .def_readwrite("force_limit", &sim::LowLevelConfig::force_limit);

    py::class_<sim::KinematicState>(m, "KinematicState")
        .def(py::init<>())
        .def_readwrite("position", &sim::KinematicState::position)
        .def_readwrite("orientation", &sim::KinematicState::orientation)
        .def_readwrite("linear_velocity", &sim::KinematicState::linear_velocity)
        .def_readwrite("angular_velocity", &sim::KinematicState::angular_velocity);

    py::class_<sim::WaypointCommand>(m, "WaypointCommand")
        .def(py::init<>())
        .def_readwrite("target_position", &sim::WaypointCommand::target_position)
        .def_readwrite("axis_velocities", &sim::WaypointCommand::axis_velocities);

    py::class_<sim::TransitionRecord>(m, "TransitionRecord")
        .def_readonly("start_state", &sim::TransitionRecord::start_state)
        .def_readonly("end_state", &sim::TransitionRecord::end_state)
        .def_readonly("per_axis_error", &sim::TransitionRecord::per_axis_error)
        .def_readonly("wind_applied", &sim::TransitionRecord::wind_applied)
        .def_readonly("inner_steps_used", &sim::TransitionRecord::inner_steps_used);

    m.def("execute_waypoint", &sim::execute_waypoint, py::arg("state"),
          py::arg("cmd"), py::arg("wind"), py::arg("cfg") = sim::LowLevelConfig{});

    py::enum_<env::Variant>(m, "Variant")
        .value("BASELINE", env::Variant::BASELINE)
        .value("DIST", env::Variant::DIST)
        .value("DIST_ERR", env::Variant::DIST_ERR)
        .value("DIST_ERR_U", env::Variant::DIST_ERR_U);
    m.def("variant_from_name", &env::variant_from_name);
    m.def("variant_name", &env::variant_name);

    py::class_<env::ActionCommand>(m, "ActionCommand")
        .def(py::init<>())
        .def_readwrite("delta", &env::ActionCommand::delta)
        .def_readwrite("v_target", &env::ActionCommand::v_target);

    py::class_<env::EnvConfig>(m, "EnvConfig")
        .def(py::init<>())
        .def_readwrite("destination", &env::EnvConfig::destination)
        .def_readwrite("initial_position", &env::EnvConfig::initial_position)
        .def_readwrite("alpha", &env::EnvConfig::alpha)
        .def_readwrite("v_max", &env::EnvConfig::v_max)
        .def_readwrite("max_rl_steps", &env::EnvConfig::max_rl_steps)
        .def_readwrite("variant", &env::EnvConfig::variant)
        .def_readwrite("esr_weights", &env::EnvConfig::esr_weights)
        .def_readwrite("action_limit", &env::EnvConfig::action_limit);

    py::class_<env::Environment>(m, "Environment")
        .def(py::init<env::EnvConfig, sim::DisturbanceSchedule, sim::LowLevelConfig>(),
             py::arg("config"), py::arg("schedule"),
             py::arg("low_level") = sim::LowLevelConfig{})
        .def("reset",
             [](env::Environment& e) {
                 e.reset();
                 return e.observation_vector();
             })
        .def("step_raw",
             [](env::Environment& e, const std::array<double, 4>& raw) {
                 const auto r = e.step_raw(raw);
                 py::dict info;
                 info["r_nav"] = r.reward.r_nav;
                 info["r_err"] = r.reward.r_err;
                 info["per_axis_error"] = r.record.per_axis_error;
                 info["position"] = r.record.end_state.position;
                 return py::make_tuple(e.observation_vector(), r.scalar_reward,
                                       r.done, info);
             })
        .def("step",
             [](env::Environment& e, const env::ActionCommand& action) {
                 const auto r = e.step(action);
                 py::dict info;
                 info["r_nav"] = r.reward.r_nav;
                 info["r_err"] = r.reward.r_err;
                 info["per_axis_error"] = r.record.per_axis_error;
                 info["position"] = r.record.end_state.position;
                 return py::make_tuple(e.observation_vector(), r.scalar_reward,
                                       r.done, info);
             })
        .def("squash", &env::Environment::squash)
        .def("obs_size", &env::Environment::obs_size)
        .def("steps_taken", &env::Environment::steps_taken);

    py::class_<noise::ErrorStats>(m, "ErrorStats")
        .def(py::init<>())
        .def_readwrite("mean", &noise::ErrorStats::mean)
        .def_property("covariance", &cov_get, &cov_set);

    m.def(
        "run_random_walk",
        [](long num_steps, const sim::DisturbanceSchedule& schedule, uint64_t seed,
           double v_target_max, const env::EnvConfig& env_cfg,
           const sim::LowLevelConfig& low) {
            noise::RandomWalkConfig cfg;
            cfg.num_steps = num_steps;
            cfg.schedule = schedule;
            cfg.seed = seed;
            cfg.v_target_max = v_target_max;
            return noise::run_random_walk(cfg, env_cfg, low);
        },
        py::arg("num_steps"), py::arg("schedule") = sim::DisturbanceSchedule{},
        py::arg("seed") = 0, py::arg("v_target_max") = 20.0,
        py::arg("env_config") = env::EnvConfig{},
        py::arg("low_level") = sim::LowLevelConfig{});
    m.def("estimate_stats", &noise::estimate_stats, py::arg("samples"));
    m.def("sample_mvn", &noise::sample_mvn, py::arg("stats"), py::arg("n"),
          py::arg("seed") = 0);
    m.def("expected_error_magnitude", &noise::expected_error_magnitude,
          py::arg("stats"), py::arg("n") = 1000000, py::arg("seed") = 0);

    py::class_<ppo::PpoConfig>(m, "PpoConfig")
        .def(py::init<>())
        .def_readwrite("total_timesteps", &ppo::PpoConfig::total_timesteps)
        .def_readwrite("rollout_length", &ppo::PpoConfig::rollout_length)
        .def_readwrite("minibatch_size", &ppo::PpoConfig::minibatch_size)
        .def_readwrite("epochs_per_update", &ppo::PpoConfig::epochs_per_update)
        .def_readwrite("clip_epsilon", &ppo::PpoConfig::clip_epsilon)
        .def_readwrite("gamma", &ppo::PpoConfig::gamma)
        .def_readwrite("gae_lambda", &ppo::PpoConfig::gae_lambda)
        .def_readwrite("learning_rate", &ppo::PpoConfig::learning_rate)
        .def_readwrite("entropy_coef", &ppo::PpoConfig::entropy_coef)
        .def_readwrite("value_coef", &ppo::PpoConfig::value_coef)
        .def_readwrite("seed", &ppo::PpoConfig::seed)
        .def_readwrite("checkpoint_every", &ppo::PpoConfig::checkpoint_every);

    py::class_<ppo::TrainedPolicy>(m, "TrainedPolicy")
        .def_readonly("variant", &ppo::TrainedPolicy::variant)
        .def_readonly("weights", &ppo::TrainedPolicy::weights)
        .def_readonly("ser", &ppo::TrainedPolicy::ser)
        .def_readonly("seed", &ppo::TrainedPolicy::seed)
        .def_property_readonly(
            "obs_dim",
            [](const ppo::TrainedPolicy& p) { return p.params.obs_dim; })
        .def("forward",
             [](const ppo::TrainedPolicy& p, const std::vector<double>& obs) {
                 if (int(obs.size()) != p.params.obs_dim)
                     throw ConfigError("expected obs of length " +
                                       std::to_string(p.params.obs_dim));
                 const Eigen::VectorXd x =
                     Eigen::Map<const Eigen::VectorXd>(obs.data(), long(obs.size()));
                 const auto out = ppo::policy_forward(p.params, x);
                 std::array<double, 4> mean{out.mean[0], out.mean[1], out.mean[2],
                                            out.mean[3]};
                 return py::make_tuple(mean, out.value);
             },
             py::arg("obs"), "Deterministic policy head: (raw action mean, value)")
        .def("save", [](const ppo::TrainedPolicy& p, const std::string& path) {
            io::save_policy(path, p);
        });
    m.def("load_policy",
          [](const std::string& path) { return io::load_policy(path); },
          py::arg("path"));

    m.def(
        "train",
        [](env::Variant variant, const env::EnvConfig& env_cfg,
           const sim::DisturbanceSchedule& schedule, const ppo::PpoConfig& cfg,
           const sim::LowLevelConfig& low) {
            py::gil_scoped_release release;
            return ppo::train(variant, env_cfg, schedule, cfg, low);
        },
        py::arg("variant"), py::arg("env_config") = env::EnvConfig{},
        py::arg("schedule") = sim::DisturbanceSchedule{},
        py::arg("ppo_config") = ppo::PpoConfig{},
        py::arg("low_level") = sim::LowLevelConfig{});
    m.def(
        "train_pareto",
        [](const std::vector<std::array<double, 2>>& weights,
           const env::EnvConfig& env_cfg, const sim::DisturbanceSchedule& schedule,
           const ppo::PpoConfig& cfg, const sim::LowLevelConfig& low) {
            py::gil_scoped_release release;
            return ppo::train_pareto(weights, env_cfg, schedule, cfg, low);
        },
        py::arg("weight_set"), py::arg("env_config") = env::EnvConfig{},
        py::arg("schedule") = sim::DisturbanceSchedule{},
        py::arg("ppo_config") = ppo::PpoConfig{},
        py::arg("low_level") = sim::LowLevelConfig{});

    py::class_<metrics::Trajectory>(m, "Trajectory")
        .def_readonly("positions", &metrics::Trajectory::positions)
        .def_readonly("actions", &metrics::Trajectory::actions)
        .def_readonly("errors", &metrics::Trajectory::errors)
        .def_readonly("rewards", &metrics::Trajectory::rewards)
        .def_readonly("mode", &metrics::Trajectory::mode)
        .def_readonly("magnitude", &metrics::Trajectory::magnitude)
        .def_readonly("seed", &metrics::Trajectory::seed);

    py::class_<metrics::MetricsReport>(m, "MetricsReport")
        .def_readonly("distance_traveled", &metrics::MetricsReport::distance_traveled)
        .def_readonly("smoothness", &metrics::MetricsReport::smoothness)
        .def_readonly("avg_ascent_step", &metrics::MetricsReport::avg_ascent_step)
        .def_readonly("converged", &metrics::MetricsReport::converged)
        .def_readonly("final_distance", &metrics::MetricsReport::final_distance)
        .def_readonly("mean_action_error", &metrics::MetricsReport::mean_action_error)
        .def_readonly("action_error_series",
                      &metrics::MetricsReport::action_error_series);

    m.def("rollout_episode", &metrics::rollout_episode, py::arg("policy"),
          py::arg("env_config"), py::arg("schedule"), py::arg("initial_position"),
          py::arg("seed") = 0, py::arg("start_jitter") = 0.0,
          py::arg("low_level") = sim::LowLevelConfig{});
    m.def("compute_metrics", &metrics::compute_metrics, py::arg("trajectory"),
          py::arg("destination"), py::arg("tol") = 0.1, py::arg("ascent_k") = 15);

    py::class_<reach::Grid3>(m, "Grid3")
        .def(py::init<>())
        .def_readwrite("lower", &reach::Grid3::lower)
        .def_readwrite("upper", &reach::Grid3::upper)
        .def_readwrite("resolution", &reach::Grid3::resolution)
        .def("spacing", &reach::Grid3::spacing);

    py::class_<reach::ValueField>(m, "ValueField")
        .def_readonly("grid", &reach::ValueField::grid)
        .def_readonly("values", &reach::ValueField::values)
        .def_readonly("time_label", &reach::ValueField::time_label);

    py::class_<reach::DynamicsBounds>(m, "DynamicsBounds")
        .def(py::init<>())
        .def_readwrite("u_max", &reach::DynamicsBounds::u_max)
        .def_readwrite("d_max", &reach::DynamicsBounds::d_max)
        .def_readwrite("reference", &reach::DynamicsBounds::reference);

    py::class_<reach::BrtResult>(m, "BrtResult")
        .def_readonly("tube", &reach::BrtResult::tube)
        .def_readonly("tau", &reach::BrtResult::tau)
        .def_readonly("target_radius", &reach::BrtResult::target_radius);

    py::class_<reach::SliceResult>(m, "SliceResult")
        .def_property_readonly("axis",
                               [](const reach::SliceResult& s) {
                                   const char* names[3] = {"x", "y", "z"};
                                   return names[int(s.axis)];
                               })
        .def_readonly("coordinate", &reach::SliceResult::coordinate)
        .def_readonly("nu", &reach::SliceResult::nu)
        .def_readonly("nv", &reach::SliceResult::nv)
        .def_readonly("values", &reach::SliceResult::values)
        .def_readonly("contour", &reach::SliceResult::contour)
        .def_readonly("area", &reach::SliceResult::area);

    m.def("signed_distance_sphere", &reach::signed_distance_sphere, py::arg("grid"),
          py::arg("center"), py::arg("radius"));
    m.def("bounds_from_stats", &reach::bounds_from_stats, py::arg("stats"),
          py::arg("step_duration") = 0.1, py::arg("kappa") = 0.25);
    m.def("integrate_brt", &reach::integrate_brt, py::arg("initial"),
          py::arg("bounds"), py::arg("tau"), py::arg("cfl") = 0.8,
          py::arg("target_radius") = 0.1,
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "extract_slice",
        [](const reach::ValueField& field, const std::string& axis, double coord) {
            return reach::extract_slice(field, axis_from_string(axis), coord);
        },
        py::arg("field"), py::arg("axis"), py::arg("coordinate"));
    m.def(
        "slice_contains_disc",
        [](const reach::SliceResult& slice, const reach::Grid3& grid,
           const Vec3& center, double radius) {
            return reach::slice_contains_disc(slice, grid, center, radius);
        },
        py::arg("slice"), py::arg("grid"), py::arg("center"), py::arg("radius"));

    m.def("save_value_field",
          [](const std::string& path, const reach::ValueField& f) {
              io::save_value_field(path, f);
          });
    m.def("load_value_field",
          [](const std::string& path) { return io::load_value_field(path); });
}
