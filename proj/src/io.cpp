#include "quadnav/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "quadnav/errors.hpp"

namespace quadnav::io {

namespace {

constexpr char kFieldMagic[8] = {'Q', 'N', 'A', 'V', 'V', 'F', '1', '\0'};

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("expected a 3-element array, got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (long r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const long rows = long(j.size());
    if (rows == 0) throw ConfigError("empty matrix in artifact");
    const long cols = long(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (long(j[r].size()) != cols) throw ConfigError("ragged matrix in artifact");
        for (long c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json evec_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (long i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd evec_from_json(const json& j) {
    Eigen::VectorXd v(long(j.size()));
    for (long i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

json mlp_to_json(const ppo::Mlp& net) {
    json layers = json::array();
    for (size_t l = 0; l < net.W.size(); ++l)
        layers.push_back({{"W", matrix_to_json(net.W[l])}, {"b", evec_to_json(net.b[l])}});
    return layers;
}

ppo::Mlp mlp_from_json(const json& j) {
    ppo::Mlp net;
    for (const auto& layer : j) {
        net.W.push_back(matrix_from_json(layer.at("W")));
        net.b.push_back(evec_from_json(layer.at("b")));
        if (net.W.back().rows() != net.b.back().size())
            throw ConfigError("mlp layer shape mismatch in artifact");
    }
    if (net.W.empty()) throw ConfigError("mlp with no layers in artifact");
    return net;
}

void append_raw(std::string& buf, const void* p, size_t n) {
    buf.append(static_cast<const char*>(p), n);
}

template <typename T>
T take_raw(const std::string& buf, size_t& off) {
    if (off + sizeof(T) > buf.size())
        throw ConfigError("value field file truncated");
    T out;
    std::memcpy(&out, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return out;
}

} // namespace

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    write_binary_atomic(path, content);
}

void write_binary_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), std::streamsize(bytes.size()));
        if (!out) throw ConfigError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string render_csv(const CsvTable& table) {
    std::ostringstream os;
    auto emit = [&os](const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) os << ',';
            os << fields[i];
        }
        os << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    return os.str();
}

void write_csv(const fs::path& path, const CsvTable& table) {
    write_text_atomic(path, render_csv(table));
}

json stats_to_json(const noise::ErrorStats& stats) {
    json cov = json::array();
    for (int r = 0; r < 3; ++r)
        cov.push_back(json::array({stats.covariance[r][0], stats.covariance[r][1],
                                   stats.covariance[r][2]}));
    return {{"mean", vec3_to_json(stats.mean)}, {"covariance", cov}};
}

noise::ErrorStats stats_from_json(const json& j) {
    noise::ErrorStats stats;
    try {
        stats.mean = vec3_from_json(j.at("mean"));
        const auto& cov = j.at("covariance");
        if (!cov.is_array() || cov.size() != 3)
            throw ConfigError("covariance must be a 3x3 array");
        for (int r = 0; r < 3; ++r) {
            if (!cov[r].is_array() || cov[r].size() != 3)
                throw ConfigError("covariance must be a 3x3 array");
            for (int c = 0; c < 3; ++c)
                stats.covariance[r][c] = cov[r][c].get<double>();
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad error-stats JSON: ") + ex.what());
    }
    return stats;
}

json env_config_to_json(const env::EnvConfig& cfg) {
    return {{"destination", vec3_to_json(cfg.destination)},
            {"initial_position", vec3_to_json(cfg.initial_position)},
            {"alpha", cfg.alpha},
            {"v_max", cfg.v_max},
            {"max_rl_steps", cfg.max_rl_steps},
            {"variant", env::variant_name(cfg.variant)},
            {"esr_weights", json::array({cfg.esr_weights[0], cfg.esr_weights[1]})},
            {"action_limit", cfg.action_limit}};
}

env::EnvConfig env_config_from_json(const json& j) {
    env::EnvConfig cfg;
    try {
        cfg.destination = vec3_from_json(j.at("destination"));
        cfg.initial_position = vec3_from_json(j.at("initial_position"));
        cfg.alpha = j.at("alpha").get<double>();
        cfg.v_max = j.at("v_max").get<double>();
        cfg.max_rl_steps = j.at("max_rl_steps").get<int>();
        cfg.variant = env::variant_from_name(j.at("variant").get<std::string>());
        cfg.esr_weights = {j.at("esr_weights")[0].get<double>(),
                           j.at("esr_weights")[1].get<double>()};
        cfg.action_limit = j.at("action_limit").get<double>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad env-config JSON: ") + ex.what());
    }
    return cfg;
}

json low_level_to_json(const sim::LowLevelConfig& cfg) {
    return {{"kp", vec3_to_json(cfg.kp)},
            {"ki", vec3_to_json(cfg.ki)},
            {"kd", vec3_to_json(cfg.kd)},
            {"inner_dt", cfg.inner_dt},
            {"max_inner_steps", cfg.max_inner_steps},
            {"arrival_tolerance", cfg.arrival_tolerance},
            {"mass", cfg.mass},
            {"slow_time", cfg.slow_time},
            {"force_limit", cfg.force_limit},
            {"settle_speed", cfg.settle_speed},
            {"settle_steps", cfg.settle_steps}};
}

sim::LowLevelConfig low_level_from_json(const json& j) {
    sim::LowLevelConfig cfg;
    try {
        cfg.kp = vec3_from_json(j.at("kp"));
        cfg.ki = vec3_from_json(j.at("ki"));
        cfg.kd = vec3_from_json(j.at("kd"));
        cfg.inner_dt = j.at("inner_dt").get<double>();
        cfg.max_inner_steps = j.at("max_inner_steps").get<int>();
        cfg.arrival_tolerance = j.at("arrival_tolerance").get<double>();
        cfg.mass = j.at("mass").get<double>();
        cfg.slow_time = j.at("slow_time").get<double>();
        cfg.force_limit = j.at("force_limit").get<double>();
        cfg.settle_speed = j.at("settle_speed").get<double>();
        cfg.settle_steps = j.at("settle_steps").get<int>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad low-level-config JSON: ") + ex.what());
    }
    return cfg;
}

json schedule_to_json(const sim::DisturbanceSchedule& s) {
    return {{"mode", sim::mode_name(s.mode)},
            {"magnitude", s.magnitude},
            {"flip_period", s.flip_period},
            {"fixed", s.fixed},
            {"seed", s.seed}};
}

sim::DisturbanceSchedule schedule_from_json(const json& j) {
    sim::DisturbanceSchedule s;
    try {
        s.mode = sim::mode_from_name(j.at("mode").get<std::string>());
        s.magnitude = j.at("magnitude").get<double>();
        s.flip_period = j.at("flip_period").get<int>();
        s.fixed = j.at("fixed").get<bool>();
        s.seed = j.at("seed").get<uint64_t>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad schedule JSON: ") + ex.what());
    }
    return s;
}

json ppo_config_to_json(const ppo::PpoConfig& cfg) {
    return {{"total_timesteps", cfg.total_timesteps},
            {"rollout_length", cfg.rollout_length},
            {"minibatch_size", cfg.minibatch_size},
            {"epochs_per_update", cfg.epochs_per_update},
            {"clip_epsilon", cfg.clip_epsilon},
            {"gamma", cfg.gamma},
            {"gae_lambda", cfg.gae_lambda},
            {"learning_rate", cfg.learning_rate},
            {"entropy_coef", cfg.entropy_coef},
            {"value_coef", cfg.value_coef},
            {"seed", cfg.seed},
            {"checkpoint_every", cfg.checkpoint_every}};
}

ppo::PpoConfig ppo_config_from_json(const json& j) {
    ppo::PpoConfig cfg;
    try {
        cfg.total_timesteps = j.at("total_timesteps").get<long>();
        cfg.rollout_length = j.at("rollout_length").get<int>();
        cfg.minibatch_size = j.at("minibatch_size").get<int>();
        cfg.epochs_per_update = j.at("epochs_per_update").get<int>();
        cfg.clip_epsilon = j.at("clip_epsilon").get<double>();
        cfg.gamma = j.at("gamma").get<double>();
        cfg.gae_lambda = j.at("gae_lambda").get<double>();
        cfg.learning_rate = j.at("learning_rate").get<double>();
        cfg.entropy_coef = j.at("entropy_coef").get<double>();
        cfg.value_coef = j.at("value_coef").get<double>();
        cfg.seed = j.at("seed").get<uint64_t>();
        cfg.checkpoint_every = j.at("checkpoint_every").get<int>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad ppo-config JSON: ") + ex.what());
    }
    return cfg;
}

json mlp_params_to_json(const ppo::MlpParams& params) {
    return {{"policy", mlp_to_json(params.policy)},
            {"value", mlp_to_json(params.value)},
            {"log_std", evec_to_json(params.log_std)},
            {"obs_dim", params.obs_dim}};
}

ppo::MlpParams mlp_params_from_json(const json& j) {
    ppo::MlpParams params;
    try {
        params.policy = mlp_from_json(j.at("policy"));
        params.value = mlp_from_json(j.at("value"));
        params.log_std = evec_from_json(j.at("log_std"));
        params.obs_dim = j.at("obs_dim").get<int>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad mlp-params JSON: ") + ex.what());
    }
    if (params.policy.input_size() != params.obs_dim ||
        params.value.input_size() != params.obs_dim)
        throw ConfigError("mlp-params obs_dim disagrees with layer shapes");
    return params;
}

json policy_to_json(const ppo::TrainedPolicy& policy) {
    return {{"format", "quadnav-policy-1"},
            {"variant", env::variant_name(policy.variant)},
            {"weights", json::array({policy.weights[0], policy.weights[1]})},
            {"ser", policy.ser},
            {"seed", policy.seed},
            {"ppo_config", ppo_config_to_json(policy.config)},
            {"params", mlp_params_to_json(policy.params)}};
}

ppo::TrainedPolicy policy_from_json(const json& j) {
    ppo::TrainedPolicy policy;
    try {
        if (j.at("format").get<std::string>() != "quadnav-policy-1")
            throw ConfigError("unrecognized policy format '" +
                              j.at("format").get<std::string>() + "'");
        policy.variant = env::variant_from_name(j.at("variant").get<std::string>());
        policy.weights = {j.at("weights")[0].get<double>(),
                          j.at("weights")[1].get<double>()};
        policy.ser = j.at("ser").get<bool>();
        policy.seed = j.at("seed").get<uint64_t>();
        policy.config = ppo_config_from_json(j.at("ppo_config"));
        policy.params = mlp_params_from_json(j.at("params"));
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad policy JSON: ") + ex.what());
    }
    return policy;
}

void save_policy(const fs::path& path, const ppo::TrainedPolicy& policy) {
    write_text_atomic(path, policy_to_json(policy).dump(2) + "\n");
}

ppo::TrainedPolicy load_policy(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
    return policy_from_json(j);
}

CsvTable curve_to_csv(const std::vector<ppo::TrainingCurvePoint>& points) {
    CsvTable t;
    t.header = {"update",      "global_step", "mean_episode_return",
                "policy_loss", "value_loss",  "entropy"};
    for (const auto& p : points)
        t.rows.push_back({std::to_string(p.update), std::to_string(p.global_step),
                          fmt9(p.mean_episode_return), fmt9(p.policy_loss),
                          fmt9(p.value_loss), fmt9(p.entropy)});
    return t;
}

CsvTable trajectory_to_csv(const metrics::Trajectory& traj) {
    CsvTable t;
    t.header = {"step", "x0", "y0", "z0",   "x1",    "y1",    "z1",    "dx",
                "dy",   "dz", "v_target",   "err_x", "err_y", "err_z", "r_nav",
                "r_err"};
    for (size_t i = 0; i < traj.actions.size(); ++i) {
        const auto& p0 = traj.positions[i];
        const auto& p1 = traj.positions[i + 1];
        const auto& a = traj.actions[i];
        const auto& e = traj.errors[i];
        t.rows.push_back({std::to_string(i), fmt9(p0.x), fmt9(p0.y), fmt9(p0.z),
                          fmt9(p1.x), fmt9(p1.y), fmt9(p1.z), fmt9(a.delta.x),
                          fmt9(a.delta.y), fmt9(a.delta.z), fmt9(a.v_target),
                          fmt9(e.x), fmt9(e.y), fmt9(e.z), fmt9(traj.rewards[i][0]),
                          fmt9(traj.rewards[i][1])});
    }
    return t;
}

CsvTable sweep_to_csv(const metrics::SweepResult& sweep) {
    CsvTable t;
    t.header = {"policy",           "mode",
                "magnitude",        "episode",
                "seed",             "converged",
                "final_distance",   "distance_traveled",
                "smoothness",       "avg_ascent_step",
                "mean_action_error", "return_nav",
                "return_err",       "return_scalar",
                "error"};
    for (const auto& row : sweep.rows) {
        const auto& m = row.metrics;
        t.rows.push_back({row.label, row.mode, fmt9(row.magnitude),
                          std::to_string(row.episode), std::to_string(row.seed),
                          row.error.empty() ? (m.converged ? "Yes" : "No") : "",
                          row.error.empty() ? fmt9(m.final_distance) : "",
                          row.error.empty() ? fmt9(m.distance_traveled) : "",
                          row.error.empty() ? fmt9(m.smoothness) : "",
                          row.error.empty() ? fmt9(m.avg_ascent_step) : "",
                          row.error.empty() ? fmt9(m.mean_action_error) : "",
                          row.error.empty() ? fmt9(row.discounted_return_nav) : "",
                          row.error.empty() ? fmt9(row.discounted_return_err) : "",
                          row.error.empty() ? fmt9(row.discounted_return_scalar) : "",
                          row.error});
    }
    return t;
}

CsvTable sweep_traces_to_csv(const metrics::SweepResult& sweep) {
    CsvTable t;
    t.header = {"policy", "mode",        "magnitude",       "episode",
                "step",    "action_norm", "action_exec_gap"};
    for (const auto& row : sweep.rows) {
        if (!row.error.empty()) continue;
        const auto& m = row.metrics;
        for (size_t s = 0; s < m.action_error_series.size(); ++s)
            t.rows.push_back({row.label, row.mode, fmt9(row.magnitude),
                              std::to_string(row.episode), std::to_string(s),
                              fmt9(m.action_norm_series[s]),
                              fmt9(m.action_error_series[s])});
    }
    return t;
}

CsvTable samples_to_csv(const std::vector<Vec3>& samples) {
    CsvTable t;
    t.header = {"err_x", "err_y", "err_z"};
    for (const auto& s : samples)
        t.rows.push_back({fmt9(s.x), fmt9(s.y), fmt9(s.z)});
    return t;
}

void save_value_field(const fs::path& path, const reach::ValueField& field) {
    const auto& g = field.grid;
    if (field.values.size() != g.size())
        throw ConfigError("value field size disagrees with its grid");
    std::string buf;
    buf.reserve(64 + field.values.size() * sizeof(double));
    append_raw(buf, kFieldMagic, sizeof(kFieldMagic));
    for (int a = 0; a < 3; ++a) {
        int32_t n = g.resolution[size_t(a)];
        append_raw(buf, &n, sizeof(n));
    }
    for (int a = 0; a < 3; ++a) {
        double lo = g.lower[a];
        append_raw(buf, &lo, sizeof(lo));
    }
    for (int a = 0; a < 3; ++a) {
        double up = g.upper[a];
        append_raw(buf, &up, sizeof(up));
    }
    append_raw(buf, &field.time_label, sizeof(double));
    append_raw(buf, field.values.data(), field.values.size() * sizeof(double));
    write_binary_atomic(path, buf);
}

reach::ValueField load_value_field(const fs::path& path) {
    const std::string buf = read_text(path);
    size_t off = 0;
    char magic[8];
    if (buf.size() < sizeof(magic)) throw ConfigError(path.string() + ": not a value field file");
    std::memcpy(magic, buf.data(), sizeof(magic));
    off += sizeof(magic);
    if (std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
        throw ConfigError(path.string() + ": bad value field magic");

    reach::ValueField field;
    for (int a = 0; a < 3; ++a)
        field.grid.resolution[size_t(a)] = take_raw<int32_t>(buf, off);
    for (int a = 0; a < 3; ++a) field.grid.lower[a] = take_raw<double>(buf, off);
    for (int a = 0; a < 3; ++a) field.grid.upper[a] = take_raw<double>(buf, off);
    field.time_label = take_raw<double>(buf, off);
    field.grid.validate();

    const size_t n = field.grid.size();
    if (buf.size() - off != n * sizeof(double))
        throw ConfigError(path.string() + ": value payload size mismatch");
    field.values.resize(n);
    std::memcpy(field.values.data(), buf.data() + off, n * sizeof(double));
    return field;
}

json slice_to_json(const reach::SliceResult& slice, bool include_values) {
    const char* axis_names[3] = {"x", "y", "z"};
    json j{{"axis", axis_names[int(slice.axis)]},
           {"coordinate", slice.coordinate},
           {"plane_axes", json::array({axis_names[slice.plane_axes[0]],
                                       axis_names[slice.plane_axes[1]]})},
           {"nu", slice.nu},
           {"nv", slice.nv},
           {"area", slice.area}};
    json contour = json::array();
    for (const auto& seg : slice.contour)
        contour.push_back(json::array({seg[0], seg[1], seg[2], seg[3]}));
    j["contour"] = std::move(contour);
    if (include_values) j["values"] = slice.values;
    return j;
}

void save_checkpoint(const fs::path& path, const ppo::Trainer& trainer) {
    const auto& env = trainer.environment();
    const auto snap = env.snapshot();
    const auto& opt = trainer.optimizer();
    json j{{"format", "quadnav-checkpoint-1"},
           {"variant", env::variant_name(trainer.variant())},
           {"weights", json::array({trainer.weights()[0], trainer.weights()[1]})},
           {"ser", trainer.ser()},
           {"env_config", env_config_to_json(env.config())},
           {"schedule", schedule_to_json(env.schedule())},
           {"low_level", low_level_to_json(env.low_level())},
           {"ppo_config", ppo_config_to_json(trainer.config())},
           {"params", mlp_params_to_json(trainer.params())},
           {"adam",
            {{"m", mlp_params_to_json(opt.m)},
             {"v", mlp_params_to_json(opt.v)},
             {"t", opt.t}}},
           {"rng", trainer.rng().serialize()},
           {"env_state",
            {{"position", vec3_to_json(snap.state.position)},
             {"orientation", vec3_to_json(snap.state.orientation)},
             {"linear_velocity", vec3_to_json(snap.state.linear_velocity)},
             {"angular_velocity", vec3_to_json(snap.state.angular_velocity)},
             {"error", json::array({snap.error.x_e, snap.error.y_e, snap.error.z_e})},
             {"steps", snap.steps},
             {"sim_step", snap.sim_step}}},
           {"counters",
            {{"global_step", trainer.global_step()},
             {"update_index", trainer.update_index()},
             {"episode_return_acc", trainer.episode_return_acc()},
             {"episode_length_acc", trainer.episode_length_acc()}}}};
    write_text_atomic(path, j.dump() + "\n");
}

std::unique_ptr<ppo::Trainer> load_checkpoint(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
    try {
        if (j.at("format").get<std::string>() != "quadnav-checkpoint-1")
            throw ConfigError(path.string() + ": unrecognized checkpoint format");
        const auto variant = env::variant_from_name(j.at("variant").get<std::string>());
        auto trainer = std::make_unique<ppo::Trainer>(
            variant, env_config_from_json(j.at("env_config")),
            schedule_from_json(j.at("schedule")),
            ppo_config_from_json(j.at("ppo_config")),
            low_level_from_json(j.at("low_level")));

        if (j.at("ser").get<bool>())
            trainer->set_ser_weights({j.at("weights")[0].get<double>(),
                                      j.at("weights")[1].get<double>()});

        trainer->params() = mlp_params_from_json(j.at("params"));
        auto& opt = trainer->optimizer();
        opt.m = mlp_params_from_json(j.at("adam").at("m"));
        opt.v = mlp_params_from_json(j.at("adam").at("v"));
        opt.t = j.at("adam").at("t").get<long>();
        trainer->rng().deserialize(j.at("rng").get<std::string>());

        const auto& es = j.at("env_state");
        env::Environment::Snapshot snap;
        snap.state.position = vec3_from_json(es.at("position"));
        snap.state.orientation = vec3_from_json(es.at("orientation"));
        snap.state.linear_velocity = vec3_from_json(es.at("linear_velocity"));
        snap.state.angular_velocity = vec3_from_json(es.at("angular_velocity"));
        snap.error.x_e = es.at("error")[0].get<double>();
        snap.error.y_e = es.at("error")[1].get<double>();
        snap.error.z_e = es.at("error")[2].get<double>();
        snap.steps = es.at("steps").get<int>();
        snap.sim_step = es.at("sim_step").get<long>();
        trainer->environment().restore(snap);

        const auto& c = j.at("counters");
        trainer->restore_counters(c.at("global_step").get<long>(),
                                  c.at("update_index").get<long>(),
                                  c.at("episode_return_acc").get<double>(),
                                  c.at("episode_length_acc").get<int>());
        return trainer;
    } catch (const json::exception& ex) {
        throw ConfigError(path.string() + ": bad checkpoint: " + ex.what());
    }
}

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
    for (const char* sub : {"policies", "traces", "stats", "brt", "reports"})
        fs::create_directories(root_ / sub);
}

fs::path ArtifactStore::resolve(const std::string& relative) const {
    fs::path p = root_ / relative;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

void ArtifactStore::write_text(const std::string& relative,
                               const std::string& content) const {
    write_text_atomic(resolve(relative), content);
}

void ArtifactStore::write_json(const std::string& relative, const json& j) const {
    write_text_atomic(resolve(relative), j.dump(2) + "\n");
}

json ArtifactStore::read_json(const std::string& relative) const {
    const fs::path p = root_ / relative;
    try {
        return json::parse(read_text(p));
    } catch (const json::exception& ex) {
        throw ConfigError(p.string() + ": " + ex.what());
    }
}

bool ArtifactStore::exists(const std::string& relative) const {
    return fs::exists(root_ / relative);
}

void ArtifactStore::record_run(const std::string& name, const std::string& command,
                               uint64_t seed, const json& config) const {
    write_json("reports/" + name + ".run.json",
               {{"command", command}, {"seed", seed}, {"config", config}});
}

std::string svg_line_chart(const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& series,
                           const std::string& title, int width, int height) {
    static const char* palette[] = {"#1976d2", "#d32f2f", "#388e3c",
                                    "#f57c00", "#7b1fa2", "#00838f"};
    const int ml = 60, mr = 16, mt = 28, mb = 32;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double lo = 0, hi = 1;
    size_t longest = 2;
    bool any = false;
    for (const auto& s : series)
        for (double v : s) {
            if (!std::isfinite(v)) continue;
            if (!any) { lo = hi = v; any = true; }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    for (const auto& s : series) longest = std::max(longest, s.size());
    if (hi - lo < 1e-12) { hi += 1; lo -= 1; }

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
       << height << "' font-family='sans-serif' font-size='11'>\n"
       << "<rect width='100%' height='100%' fill='white'/>\n"
       << "<text x='" << ml << "' y='16' font-size='13'>" << title << "</text>\n"
       << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
       << mt + ph << "' stroke='#888'/>\n"
       << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw << "' y2='"
       << mt + ph << "' stroke='#888'/>\n"
       << "<text x='4' y='" << mt + 8 << "'>" << fmt9(hi) << "</text>\n"
       << "<text x='4' y='" << mt + ph << "'>" << fmt9(lo) << "</text>\n"
       << "<text x='" << ml + pw - 30 << "' y='" << height - 8 << "'>"
       << longest - 1 << "</text>\n";
    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        if (s.size() < 2) continue;
        os << "<polyline fill='none' stroke='" << palette[si % 6]
           << "' stroke-width='1.5' points='";
        for (size_t i = 0; i < s.size(); ++i) {
            if (!std::isfinite(s[i])) continue;
            const double x = ml + pw * double(i) / double(longest - 1);
            const double y = mt + ph * (1.0 - (s[i] - lo) / (hi - lo));
            os << x << ',' << y << ' ';
        }
        os << "'/>\n";
        if (si < names.size())
            os << "<text x='" << ml + 8 << "' y='" << mt + 14 + 14 * si
               << "' fill='" << palette[si % 6] << "'>" << names[si] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace quadnav::io
