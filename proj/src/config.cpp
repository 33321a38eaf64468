#include "quadnav/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "quadnav/errors.hpp"
#include "quadnav/io.hpp"

namespace quadnav::config {

namespace {

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object())
        throw ConfigError(path + ": expected an object, got " + std::string(j.type_name()));
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    expect_object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(path + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
void get_to(const json& j, const std::string& path, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type (got " +
                          std::string(it->type_name()) + ")");
    }
}

void get_vec3(const json& j, const std::string& path, const char* key, Vec3& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_array() || it->size() != 3)
        throw ConfigError(path + "." + key + ": expected [x, y, z]");
    try {
        out = {(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>()};
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": expected three numbers");
    }
}

void parse_env(const json& j, const std::string& path, env::EnvConfig& cfg) {
    check_keys(j, path,
               {"destination", "initial_position", "alpha", "v_max", "max_rl_steps",
                "variant", "esr_weights", "action_limit"});
    get_vec3(j, path, "destination", cfg.destination);
    get_vec3(j, path, "initial_position", cfg.initial_position);
    get_to(j, path, "alpha", cfg.alpha);
    get_to(j, path, "v_max", cfg.v_max);
    get_to(j, path, "max_rl_steps", cfg.max_rl_steps);
    if (auto it = j.find("variant"); it != j.end())
        cfg.variant = env::variant_from_name(it->get<std::string>());
    if (auto it = j.find("esr_weights"); it != j.end()) {
        if (!it->is_array() || it->size() != 2)
            throw ConfigError(path + ".esr_weights: expected [w_nav, w_err]");
        cfg.esr_weights = {(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
    get_to(j, path, "action_limit", cfg.action_limit);
}

void parse_low(const json& j, const std::string& path, sim::LowLevelConfig& cfg) {
    check_keys(j, path,
               {"kp", "ki", "kd", "inner_dt", "max_inner_steps", "arrival_tolerance",
                "mass", "slow_time", "force_limit", "settle_speed", "settle_steps"});
    get_vec3(j, path, "kp", cfg.kp);
    get_vec3(j, path, "ki", cfg.ki);
    get_vec3(j, path, "kd", cfg.kd);
    get_to(j, path, "inner_dt", cfg.inner_dt);
    get_to(j, path, "max_inner_steps", cfg.max_inner_steps);
    get_to(j, path, "arrival_tolerance", cfg.arrival_tolerance);
    get_to(j, path, "mass", cfg.mass);
    get_to(j, path, "slow_time", cfg.slow_time);
    get_to(j, path, "force_limit", cfg.force_limit);
    get_to(j, path, "settle_speed", cfg.settle_speed);
    get_to(j, path, "settle_steps", cfg.settle_steps);
}

void parse_schedule(const json& j, const std::string& path,
                    sim::DisturbanceSchedule& s) {
    check_keys(j, path, {"mode", "magnitude", "flip_period", "fixed", "seed"});
    if (auto it = j.find("mode"); it != j.end())
        s.mode = sim::mode_from_name(it->get<std::string>());
    get_to(j, path, "magnitude", s.magnitude);
    get_to(j, path, "flip_period", s.flip_period);
    get_to(j, path, "fixed", s.fixed);
    get_to(j, path, "seed", s.seed);
}

void parse_ppo(const json& j, const std::string& path, ppo::PpoConfig& cfg) {
    check_keys(j, path,
               {"total_timesteps", "rollout_length", "minibatch_size",
                "epochs_per_update", "clip_epsilon", "gamma", "gae_lambda",
                "learning_rate", "entropy_coef", "value_coef", "seed",
                "checkpoint_every"});
    get_to(j, path, "total_timesteps", cfg.total_timesteps);
    get_to(j, path, "rollout_length", cfg.rollout_length);
    get_to(j, path, "minibatch_size", cfg.minibatch_size);
    get_to(j, path, "epochs_per_update", cfg.epochs_per_update);
    get_to(j, path, "clip_epsilon", cfg.clip_epsilon);
    get_to(j, path, "gamma", cfg.gamma);
    get_to(j, path, "gae_lambda", cfg.gae_lambda);
    get_to(j, path, "learning_rate", cfg.learning_rate);
    get_to(j, path, "entropy_coef", cfg.entropy_coef);
    get_to(j, path, "value_coef", cfg.value_coef);
    get_to(j, path, "seed", cfg.seed);
    get_to(j, path, "checkpoint_every", cfg.checkpoint_every);
}

void parse_walk(const json& j, const std::string& path, WalkRunConfig& cfg) {
    check_keys(j, path, {"num_steps", "v_target_max"});
    get_to(j, path, "num_steps", cfg.num_steps);
    get_to(j, path, "v_target_max", cfg.v_target_max);
}

void parse_sweep(const json& j, const std::string& path, SweepRunConfig& cfg) {
    check_keys(j, path,
               {"modes", "magnitudes_x", "magnitudes_z", "magnitudes_xyz",
                "eval_initial_position", "episodes_per_cell", "converged_tol",
                "ascent_steps", "start_jitter"});
    get_to(j, path, "modes", cfg.modes);
    get_to(j, path, "magnitudes_x", cfg.magnitudes_x);
    get_to(j, path, "magnitudes_z", cfg.magnitudes_z);
    get_to(j, path, "magnitudes_xyz", cfg.magnitudes_xyz);
    get_vec3(j, path, "eval_initial_position", cfg.eval_initial_position);
    get_to(j, path, "episodes_per_cell", cfg.episodes_per_cell);
    get_to(j, path, "converged_tol", cfg.converged_tol);
    get_to(j, path, "ascent_steps", cfg.ascent_steps);
    get_to(j, path, "start_jitter", cfg.start_jitter);
}

void parse_reach(const json& j, const std::string& path, ReachRunConfig& cfg) {
    check_keys(j, path,
               {"grid", "tau", "kappa", "step_duration", "cfl", "target_radius",
                "target_center", "slice_axis", "slice_coordinate"});
    if (auto it = j.find("grid"); it != j.end()) {
        const std::string gpath = path + ".grid";
        check_keys(*it, gpath, {"lower", "upper", "resolution"});
        get_vec3(*it, gpath, "lower", cfg.grid.lower);
        get_vec3(*it, gpath, "upper", cfg.grid.upper);
        if (auto rit = it->find("resolution"); rit != it->end()) {
            if (!rit->is_array() || rit->size() != 3)
                throw ConfigError(gpath + ".resolution: expected [nx, ny, nz]");
            for (int a = 0; a < 3; ++a)
                cfg.grid.resolution[size_t(a)] = (*rit)[size_t(a)].get<int>();
        }
    }
    get_to(j, path, "tau", cfg.tau);
    get_to(j, path, "kappa", cfg.kappa);
    get_to(j, path, "step_duration", cfg.step_duration);
    get_to(j, path, "cfl", cfg.cfl);
    get_to(j, path, "target_radius", cfg.target_radius);
    get_vec3(j, path, "target_center", cfg.target_center);
    get_to(j, path, "slice_axis", cfg.slice_axis);
    get_to(j, path, "slice_coordinate", cfg.slice_coordinate);
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

} // namespace

RunConfig parse_run_config(const json& j) {
    RunConfig cfg;
    check_keys(j, "config",
               {"experiment", "seed", "output_dir", "env", "low_level", "schedule",
                "ppo", "walk", "sweep", "reach", "weight_set"});
    get_to(j, "config", "experiment", cfg.experiment);
    get_to(j, "config", "seed", cfg.seed);
    get_to(j, "config", "output_dir", cfg.output_dir);
    if (auto it = j.find("env"); it != j.end()) parse_env(*it, "config.env", cfg.env);
    if (auto it = j.find("low_level"); it != j.end())
        parse_low(*it, "config.low_level", cfg.low_level);
    bool schedule_seed_given = false;
    if (auto it = j.find("schedule"); it != j.end()) {
        parse_schedule(*it, "config.schedule", cfg.schedule);
        schedule_seed_given = it->contains("seed");
    }
    bool ppo_seed_given = false;
    if (auto it = j.find("ppo"); it != j.end()) {
        parse_ppo(*it, "config.ppo", cfg.ppo);
        ppo_seed_given = it->contains("seed");
    }
    if (auto it = j.find("walk"); it != j.end())
        parse_walk(*it, "config.walk", cfg.walk);
    if (auto it = j.find("sweep"); it != j.end())
        parse_sweep(*it, "config.sweep", cfg.sweep);
    if (auto it = j.find("reach"); it != j.end())
        parse_reach(*it, "config.reach", cfg.reach);
    if (auto it = j.find("weight_set"); it != j.end()) {
        if (!it->is_array() || it->empty())
            throw ConfigError("config.weight_set: expected a nonempty array of [w_nav, w_err]");
        cfg.weight_set.clear();
        for (const auto& w : *it) {
            if (!w.is_array() || w.size() != 2)
                throw ConfigError("config.weight_set: each entry must be [w_nav, w_err]");
            cfg.weight_set.push_back({w[0].get<double>(), w[1].get<double>()});
        }
    }
    // Sub-seeds derive from the experiment seed unless explicitly pinned.
    if (!schedule_seed_given) cfg.schedule.seed = cfg.seed;
    if (!ppo_seed_given) cfg.ppo.seed = cfg.seed;
    validate(cfg);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::exception& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
    return parse_run_config(j);
}

json run_config_to_json(const RunConfig& cfg) {
    json weight_set = json::array();
    for (const auto& w : cfg.weight_set)
        weight_set.push_back(json::array({w[0], w[1]}));
    return {
        {"experiment", cfg.experiment},
        {"seed", cfg.seed},
        {"output_dir", cfg.output_dir},
        {"env", io::env_config_to_json(cfg.env)},
        {"low_level", io::low_level_to_json(cfg.low_level)},
        {"schedule", io::schedule_to_json(cfg.schedule)},
        {"ppo", io::ppo_config_to_json(cfg.ppo)},
        {"walk", {{"num_steps", cfg.walk.num_steps}, {"v_target_max", cfg.walk.v_target_max}}},
        {"sweep",
         {{"modes", cfg.sweep.modes},
          {"magnitudes_x", cfg.sweep.magnitudes_x},
          {"magnitudes_z", cfg.sweep.magnitudes_z},
          {"magnitudes_xyz", cfg.sweep.magnitudes_xyz},
          {"eval_initial_position", vec3_json(cfg.sweep.eval_initial_position)},
          {"episodes_per_cell", cfg.sweep.episodes_per_cell},
          {"converged_tol", cfg.sweep.converged_tol},
          {"ascent_steps", cfg.sweep.ascent_steps},
          {"start_jitter", cfg.sweep.start_jitter}}},
        {"reach",
         {{"grid",
           {{"lower", vec3_json(cfg.reach.grid.lower)},
            {"upper", vec3_json(cfg.reach.grid.upper)},
            {"resolution", cfg.reach.grid.resolution}}},
          {"tau", cfg.reach.tau},
          {"kappa", cfg.reach.kappa},
          {"step_duration", cfg.reach.step_duration},
          {"cfl", cfg.reach.cfl},
          {"target_radius", cfg.reach.target_radius},
          {"target_center", vec3_json(cfg.reach.target_center)},
          {"slice_axis", cfg.reach.slice_axis},
          {"slice_coordinate", cfg.reach.slice_coordinate}}},
        {"weight_set", weight_set}};
}

void validate(const RunConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };

    if (cfg.experiment.empty()) fail("experiment name must be nonempty");
    if (cfg.output_dir.empty()) fail("output_dir must be nonempty");

    const auto& e = cfg.env;
    if (!(e.alpha >= 0 && e.alpha < 1)) fail("env.alpha must be in [0, 1)");
    if (e.v_max <= 0) fail("env.v_max must be positive");
    if (e.max_rl_steps < 1) fail("env.max_rl_steps must be >= 1");
    if (e.action_limit <= 0) fail("env.action_limit must be positive");
    if (!e.destination.is_finite() || !e.initial_position.is_finite())
        fail("env positions must be finite");

    const auto& l = cfg.low_level;
    if (l.inner_dt <= 0) fail("low_level.inner_dt must be positive");
    if (l.max_inner_steps < 1) fail("low_level.max_inner_steps must be >= 1");
    if (l.arrival_tolerance <= 0) fail("low_level.arrival_tolerance must be positive");
    if (l.mass <= 0) fail("low_level.mass must be positive");
    if (l.slow_time <= 0) fail("low_level.slow_time must be positive");
    if (l.force_limit <= 0) fail("low_level.force_limit must be positive");
    if (l.settle_speed <= 0) fail("low_level.settle_speed must be positive");
    if (l.settle_steps < 1) fail("low_level.settle_steps must be >= 1");

    const auto& s = cfg.schedule;
    if (s.magnitude < 0) fail("schedule.magnitude must be >= 0 (direction comes from mode/flips)");
    if (s.flip_period < 1) fail("schedule.flip_period must be >= 1");

    const auto& p = cfg.ppo;
    if (p.total_timesteps < 1) fail("ppo.total_timesteps must be >= 1");
    if (p.rollout_length < 1) fail("ppo.rollout_length must be >= 1");
    if (p.minibatch_size < 1 || p.minibatch_size > p.rollout_length)
        fail("ppo.minibatch_size must be in [1, rollout_length]");
    if (p.epochs_per_update < 1) fail("ppo.epochs_per_update must be >= 1");
    if (p.clip_epsilon <= 0) fail("ppo.clip_epsilon must be positive");
    if (!(p.gamma > 0 && p.gamma <= 1)) fail("ppo.gamma must be in (0, 1]");
    if (!(p.gae_lambda >= 0 && p.gae_lambda <= 1)) fail("ppo.gae_lambda must be in [0, 1]");
    if (p.learning_rate <= 0) fail("ppo.learning_rate must be positive");
    if (p.value_coef < 0) fail("ppo.value_coef must be >= 0");
    if (p.checkpoint_every < 0) fail("ppo.checkpoint_every must be >= 0");

    if (cfg.walk.num_steps < 1) fail("walk.num_steps must be >= 1");
    if (cfg.walk.v_target_max <= 0) fail("walk.v_target_max must be positive");

    const auto& sw = cfg.sweep;
    if (sw.modes.empty()) fail("sweep.modes must be nonempty");
    for (const auto& m : sw.modes) {
        const auto mode = sim::mode_from_name(m); // throws on bad name
        if (mode == sim::DisturbanceMode::NONE)
            fail("sweep.modes: use magnitude 0 instead of mode 'none'");
    }
    if (sw.magnitudes_x.empty() || sw.magnitudes_z.empty() || sw.magnitudes_xyz.empty())
        fail("sweep magnitude grids must be nonempty");
    if (sw.episodes_per_cell < 1) fail("sweep.episodes_per_cell must be >= 1");
    if (sw.converged_tol <= 0) fail("sweep.converged_tol must be positive");
    if (sw.ascent_steps < 1) fail("sweep.ascent_steps must be >= 1");
    if (sw.start_jitter < 0) fail("sweep.start_jitter must be >= 0");

    const auto& r = cfg.reach;
    r.grid.validate();
    if (r.tau < 0) fail("reach.tau must be >= 0");
    if (r.kappa <= 0) fail("reach.kappa must be positive");
    if (r.step_duration <= 0) fail("reach.step_duration must be positive");
    if (!(r.cfl > 0 && r.cfl <= 1)) fail("reach.cfl must be in (0, 1]");
    if (r.target_radius <= 0) fail("reach.target_radius must be positive");
    if (r.slice_axis != "x" && r.slice_axis != "y" && r.slice_axis != "z")
        fail("reach.slice_axis must be one of x|y|z");

    if (cfg.weight_set.empty()) fail("weight_set must be nonempty");
}

} // namespace quadnav::config
