#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "quadnav/config.hpp"
#include "quadnav/errors.hpp"
#include "quadnav/io.hpp"

using namespace quadnav;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("quadnav_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

double params_max_diff(const ppo::MlpParams& a, const ppo::MlpParams& b) {
    double m = (a.log_std - b.log_std).cwiseAbs().maxCoeff();
    for (size_t l = 0; l < a.policy.W.size(); ++l)
        m = std::max(m, (a.policy.W[l] - b.policy.W[l]).cwiseAbs().maxCoeff());
    for (size_t l = 0; l < a.value.W.size(); ++l)
        m = std::max(m, (a.value.W[l] - b.value.W[l]).cwiseAbs().maxCoeff());
    return m;
}

} // namespace

TEST_CASE("fmt9 prints compact repeatable floats") {
    CHECK(io::fmt9(0.0) == "0");
    CHECK(io::fmt9(1.5) == "1.5");
    CHECK(io::fmt9(-0.080279999) == "-0.080279999");
    CHECK(io::fmt9(1e-12) == "1e-12");
}

TEST_CASE("render_csv emits header plus rows with trailing newline") {
    io::CsvTable t;
    t.header = {"a", "b"};
    t.rows = {{"1", "2"}, {"3", "4"}};
    CHECK(io::render_csv(t) == "a,b\n1,2\n3,4\n");
}

TEST_CASE("atomic text writes land complete with no temp residue") {
    const fs::path dir = fresh_dir("atomic");
    const fs::path target = dir / "nested" / "artifact.csv";
    io::write_text_atomic(target, "x,y\n1,2\n");
    CHECK(io::read_text(target) == "x,y\n1,2\n");
    int entries = 0;
    for (const auto& e : fs::directory_iterator(target.parent_path())) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1); // no .tmp sibling left behind
}

TEST_CASE("stats JSON round-trips") {
    noise::ErrorStats stats;
    stats.mean = {-0.0017, 0.0027, 0.0055};
    stats.covariance = {{{0.072, 0.027, 0.019}, {0.027, 0.037, 0.016},
                         {0.019, 0.016, 0.036}}};
    const noise::ErrorStats back = io::stats_from_json(io::stats_to_json(stats));
    CHECK(back.mean.x == stats.mean.x);
    CHECK(back.mean.z == stats.mean.z);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(back.covariance[i][j] == stats.covariance[i][j]);

    CHECK_THROWS_AS(io::stats_from_json(json::parse(R"({"mean": [1, 2]})")),
                    ConfigError);
}

TEST_CASE("policy files round-trip exactly") {
    const fs::path dir = fresh_dir("policy");
    Rng rng(3);
    ppo::TrainedPolicy p;
    p.params = ppo::MlpParams::make(15, 4, rng);
    p.variant = env::Variant::DIST_ERR;
    p.weights = {1.0, 0.75};
    p.ser = true;
    p.seed = 42;
    p.config.total_timesteps = 12345;

    io::save_policy(dir / "p.policy", p);
    const ppo::TrainedPolicy q = io::load_policy(dir / "p.policy");
    CHECK(params_max_diff(p.params, q.params) == 0.0);
    CHECK(q.variant == env::Variant::DIST_ERR);
    CHECK(q.weights[1] == 0.75);
    CHECK(q.ser);
    CHECK(q.seed == 42);
    CHECK(q.config.total_timesteps == 12345);
    CHECK(q.params.obs_dim == 15);
}

TEST_CASE("malformed policy files are rejected") {
    const fs::path dir = fresh_dir("badpolicy");
    io::write_text_atomic(dir / "bad.policy", R"({"format": "something-else"})");
    CHECK_THROWS_AS(io::load_policy(dir / "bad.policy"), ConfigError);
    io::write_text_atomic(dir / "garbage.policy", "not json at all");
    CHECK_THROWS_AS(io::load_policy(dir / "garbage.policy"), ConfigError);
}

TEST_CASE("value fields round-trip through the binary format") {
    const fs::path dir = fresh_dir("vf");
    reach::Grid3 g;
    g.lower = {-1, -1, 0};
    g.upper = {1, 1, 2};
    g.resolution = {9, 8, 11};
    reach::ValueField f;
    f.grid = g;
    f.time_label = 2.5;
    f.values.resize(g.size());
    Rng rng(4);
    for (double& v : f.values) v = rng.uniform(-1, 1);

    io::save_value_field(dir / "f.vf", f);
    const reach::ValueField back = io::load_value_field(dir / "f.vf");
    CHECK(back.grid.resolution == g.resolution);
    CHECK(back.grid.lower.x == g.lower.x);
    CHECK(back.grid.upper.z == g.upper.z);
    CHECK(back.time_label == 2.5);
    REQUIRE(back.values.size() == f.values.size());
    for (size_t i = 0; i < f.values.size(); ++i) CHECK(back.values[i] == f.values[i]);
}

TEST_CASE("corrupt value-field files are rejected") {
    const fs::path dir = fresh_dir("badvf");
    io::write_binary_atomic(dir / "bad.vf", "WRONGMAGIC and then some");
    CHECK_THROWS_AS(io::load_value_field(dir / "bad.vf"), ConfigError);

    reach::ValueField f;
    f.grid.resolution = {8, 8, 8};
    f.grid.lower = {0, 0, 0};
    f.grid.upper = {1, 1, 1};
    f.values.assign(f.grid.size(), 0.0);
    io::save_value_field(dir / "ok.vf", f);
    std::string bytes = io::read_text(dir / "ok.vf");
    bytes.resize(bytes.size() / 2); // truncate
    io::write_binary_atomic(dir / "trunc.vf", bytes);
    CHECK_THROWS_AS(io::load_value_field(dir / "trunc.vf"), ConfigError);
}

TEST_CASE("interrupted training resumes to the identical result") {
    const fs::path dir = fresh_dir("ckpt");
    env::EnvConfig env_cfg;
    sim::DisturbanceSchedule sched;
    sched.mode = sim::DisturbanceMode::XYZ;
    sched.magnitude = 0.025;
    ppo::PpoConfig cfg;
    cfg.total_timesteps = 512;
    cfg.rollout_length = 128;
    cfg.minibatch_size = 32;
    cfg.epochs_per_update = 2;
    cfg.seed = 99;
    cfg.checkpoint_every = 1;

    ppo::Trainer straight(env::Variant::DIST_ERR, env_cfg, sched, cfg);
    straight.run();

    ppo::Trainer interrupted(env::Variant::DIST_ERR, env_cfg, sched, cfg);
    const fs::path ckpt = dir / "mid.ckpt";
    interrupted.run(nullptr, [&](const ppo::Trainer& t) {
        if (t.update_index() == 2) io::save_checkpoint(ckpt, t);
    });
    REQUIRE(fs::exists(ckpt));

    const auto resumed = io::load_checkpoint(ckpt);
    CHECK(resumed->global_step() == 256);
    CHECK(resumed->update_index() == 2);
    resumed->run();
    CHECK(params_max_diff(resumed->params(), straight.params()) == 0.0);
    CHECK(resumed->global_step() == straight.global_step());
}

TEST_CASE("artifact store lays out the run directory") {
    const fs::path dir = fresh_dir("store");
    io::ArtifactStore store(dir / "out");
    for (const char* sub : {"policies", "traces", "stats", "brt", "reports"})
        CHECK(fs::is_directory(dir / "out" / sub));

    store.write_text("traces/t.csv", "a\n1\n");
    CHECK(store.exists("traces/t.csv"));
    CHECK(io::read_text(store.resolve("traces/t.csv")) == "a\n1\n");

    store.record_run("exp", "train", 7, json{{"experiment", "exp"}});
    const json run = store.read_json("reports/exp.run.json");
    CHECK(run.at("command") == "train");
    CHECK(run.at("seed") == 7);
    CHECK(run.at("config").at("experiment") == "exp");
}

TEST_CASE("sweep and curve tables carry the expected columns") {
    metrics::SweepResult sweep;
    metrics::SweepRow row;
    row.label = "baseline";
    row.mode = "xyz";
    row.magnitude = 0.075;
    row.metrics.converged = true;
    sweep.rows.push_back(row);
    metrics::SweepRow failed = row;
    failed.error = "boom";
    sweep.rows.push_back(failed);

    const io::CsvTable t = io::sweep_to_csv(sweep);
    REQUIRE(!t.header.empty());
    CHECK(t.header.front() == "policy");
    size_t conv_col = 0;
    for (size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == "converged") conv_col = i;
    REQUIRE(conv_col > 0);
    CHECK(t.rows[0][conv_col] == "Yes");
    CHECK(t.rows[1].back() == "boom");
    CHECK(t.rows[1][conv_col] == ""); // failed cells leave metrics empty

    const io::CsvTable c = io::curve_to_csv({{1, 128, -55.5, 0.1, 2.0, 5.6}});
    CHECK(c.header.front() == "update");
    CHECK(c.rows.size() == 1);
}

TEST_CASE("run config parses strictly and round-trips") {
    const config::RunConfig defaults = config::parse_run_config(json::object());
    CHECK(defaults.seed == 0);
    CHECK(defaults.ppo.total_timesteps == 200000);
    CHECK(defaults.sweep.magnitudes_xyz.size() == 5);

    // top-level seed flows into subsystem seeds unless they are explicit
    const auto seeded = config::parse_run_config(json::parse(R"({"seed": 9})"));
    CHECK(seeded.ppo.seed == 9);
    CHECK(seeded.schedule.seed == 9);
    const auto split = config::parse_run_config(
        json::parse(R"({"seed": 9, "ppo": {"seed": 3}})"));
    CHECK(split.ppo.seed == 3);
    CHECK(split.schedule.seed == 9);

    const config::RunConfig back =
        config::parse_run_config(config::run_config_to_json(defaults));
    CHECK(config::run_config_to_json(back) == config::run_config_to_json(defaults));
}

TEST_CASE("unknown config keys are rejected with their dotted path") {
    CHECK_THROWS_WITH_AS(config::parse_run_config(json::parse(R"({"sede": 1})")),
                         doctest::Contains("sede"), ConfigError);
    CHECK_THROWS_WITH_AS(
        config::parse_run_config(json::parse(R"({"reach": {"kapa": 0.3}})")),
        doctest::Contains("kapa"), ConfigError);
    CHECK_THROWS_WITH_AS(
        config::parse_run_config(json::parse(R"({"env": {"alpha": "hot"}})")),
        doctest::Contains("env.alpha"), ConfigError);
}

TEST_CASE("run config validation rejects broken invariants") {
    config::RunConfig cfg;
    cfg.env.alpha = 1.0;
    CHECK_THROWS_AS(config::validate(cfg), ConfigError);

    cfg = {};
    cfg.ppo.minibatch_size = 4096;
    cfg.ppo.rollout_length = 128;
    CHECK_THROWS_AS(config::validate(cfg), ConfigError);

    cfg = {};
    cfg.sweep.modes = {"none"};
    CHECK_THROWS_WITH_AS(config::validate(cfg), doctest::Contains("magnitude 0"),
                         ConfigError);

    cfg = {};
    cfg.weight_set.clear();
    CHECK_THROWS_AS(config::validate(cfg), ConfigError);

    cfg = {};
    CHECK_NOTHROW(config::validate(cfg));
}

TEST_CASE("svg chart renders polylines") {
    const std::string svg =
        io::svg_line_chart({"a"}, {{0.0, 1.0, 0.5, 2.0}}, "test chart");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("test chart") != std::string::npos);
}
