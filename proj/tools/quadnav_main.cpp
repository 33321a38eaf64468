#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadnav/config.hpp"
#include "quadnav/errors.hpp"
#include "quadnav/io.hpp"
#include "quadnav/metrics.hpp"
#include "quadnav/noise.hpp"
#include "quadnav/ppo.hpp"
#include "quadnav/reach.hpp"

namespace {

using namespace quadnav;
using config::RunConfig;
using io::ArtifactStore;
using io::fmt9;
using io::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitPartial = 4;

struct CommonArgs {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string output_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run-config file");
    cmd->add_option("--seed", args.seed, "Override the experiment seed");
    cmd->add_option("--output-dir", args.output_dir,
                    "Artifact directory (overrides config and QUADNAV_OUTPUT_DIR)");
}

RunConfig load_config(const CommonArgs& args) {
    RunConfig cfg = args.config_path.empty()
                        ? RunConfig{}
                        : config::load_run_config(args.config_path);
    if (args.seed) {
        cfg.seed = *args.seed;
        cfg.ppo.seed = *args.seed;
        cfg.schedule.seed = *args.seed;
    }
    if (const char* env = std::getenv("QUADNAV_OUTPUT_DIR"); env && *env)
        cfg.output_dir = env;
    if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
    config::validate(cfg);
    return cfg;
}

std::string file_label(const fs::path& p) {
    std::string name = p.filename().string();
    return name.substr(0, name.find('.'));
}

std::vector<fs::path> sorted_glob(const fs::path& dir, const std::string& suffix) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Per-step action errors of a trained policy acting in the configured
// environment (episodes chained back to back), for stats capture.
std::vector<Vec3> policy_error_walk(const ppo::TrainedPolicy& policy,
                                    const RunConfig& cfg, long num_steps) {
    env::EnvConfig ec = cfg.env;
    ec.variant = policy.variant;
    ec.esr_weights = policy.weights;
    env::Environment e(ec, cfg.schedule, cfg.low_level);
    e.reset();
    std::vector<Vec3> errors;
    errors.reserve(size_t(num_steps));
    for (long t = 0; t < num_steps; ++t) {
        const auto obs_v = e.observation_vector();
        const Eigen::VectorXd obs =
            Eigen::Map<const Eigen::VectorXd>(obs_v.data(), long(obs_v.size()));
        const auto out = ppo::policy_forward(policy.params, obs);
        const auto res =
            e.step(e.squash({out.mean[0], out.mean[1], out.mean[2], out.mean[3]}));
        errors.push_back(res.record.per_axis_error);
        if (res.done) e.reset();
    }
    return errors;
}

int cmd_random_walk(const CommonArgs& common, const std::string& label,
                    const std::string& policy_path, long mc_samples) {
    const RunConfig cfg = load_config(common);
    ArtifactStore store(cfg.output_dir);
    store.record_run("random_walk_" + label, "random-walk", cfg.seed,
                     config::run_config_to_json(cfg));

    std::vector<Vec3> errors;
    if (policy_path.empty()) {
        noise::RandomWalkConfig wc;
        wc.num_steps = cfg.walk.num_steps;
        wc.schedule = cfg.schedule;
        wc.seed = cfg.seed;
        wc.v_target_max = cfg.walk.v_target_max;
        errors = noise::run_random_walk(wc, cfg.env, cfg.low_level);
    } else {
        const auto policy = io::load_policy(policy_path);
        errors = policy_error_walk(policy, cfg, cfg.walk.num_steps);
    }

    const auto stats = noise::estimate_stats(errors);
    const double expected = noise::expected_error_magnitude(stats, mc_samples, cfg.seed);

    const std::string base = "stats/" + label + "/";
    store.write_text(base + "errors.csv", io::render_csv(io::samples_to_csv(errors)));
    store.write_json(base + "stats.json", io::stats_to_json(stats));
    store.write_json(base + "expected_magnitude.json",
                     {{"expected_error_magnitude", expected},
                      {"num_samples", mc_samples},
                      {"seed", cfg.seed},
                      {"walk_steps", long(errors.size())}});

    std::cout << "collected " << errors.size() << " per-step errors under mode="
              << sim::mode_name(cfg.schedule.mode) << " magnitude="
              << fmt9(cfg.schedule.magnitude) << "\n"
              << "mean error = (" << fmt9(stats.mean.x) << ", " << fmt9(stats.mean.y)
              << ", " << fmt9(stats.mean.z) << ")\n"
              << "expected error magnitude E|e| = " << fmt9(expected) << " ("
              << mc_samples << " MC samples)\n"
              << "wrote " << store.resolve(base).string() << "{errors.csv, stats.json, "
                 "expected_magnitude.json}\n";
    return kExitOk;
}

int cmd_train(const CommonArgs& common, std::string variant_name, bool pareto,
              const std::string& resume_path, std::string label, bool svg) {
    const RunConfig cfg = load_config(common);
    ArtifactStore store(cfg.output_dir);

    if (pareto) {
        store.record_run("train_pareto", "train", cfg.seed,
                         config::run_config_to_json(cfg));
        std::cout << "training " << cfg.weight_set.size()
                  << " SER policies on the dist-err task, "
                  << cfg.ppo.total_timesteps << " steps each\n";
        ppo::train_pareto(
            cfg.weight_set, cfg.env, cfg.schedule, cfg.ppo, cfg.low_level,
            [&](size_t i, const ppo::TrainedPolicy& policy) {
                const std::string name = "pareto_" + std::to_string(i);
                io::save_policy(store.resolve("policies/" + name + ".policy"), policy);
                std::cout << "  [" << i << "] weights (" << fmt9(policy.weights[0])
                          << ", " << fmt9(policy.weights[1]) << ") -> policies/"
                          << name << ".policy\n";
            });
        return kExitOk;
    }

    std::unique_ptr<ppo::Trainer> trainer;
    if (!resume_path.empty()) {
        trainer = io::load_checkpoint(resume_path);
        if (label.empty()) label = env::variant_name(trainer->variant());
        std::cout << "resuming " << label << " from update " << trainer->update_index()
                  << " (step " << trainer->global_step() << ")\n";
    } else {
        const env::Variant variant = variant_name.empty()
                                         ? cfg.env.variant
                                         : env::variant_from_name(variant_name);
        if (label.empty()) label = env::variant_name(variant);
        trainer = std::make_unique<ppo::Trainer>(variant, cfg.env, cfg.schedule,
                                                 cfg.ppo, cfg.low_level);
    }
    store.record_run("train_" + label, "train", cfg.seed,
                     config::run_config_to_json(cfg));

    std::vector<ppo::TrainingCurvePoint> curve;
    const auto on_update = [&](const ppo::TrainingCurvePoint& p) {
        curve.push_back(p);
        std::cout << "update " << p.update << " step " << p.global_step
                  << " return " << fmt9(p.mean_episode_return) << " ploss "
                  << fmt9(p.policy_loss) << " vloss " << fmt9(p.value_loss) << "\n";
    };
    const std::string ckpt_rel = "policies/" + label + ".ckpt";
    const auto on_checkpoint = [&](const ppo::Trainer& t) {
        io::save_checkpoint(store.resolve(ckpt_rel), t);
    };

    const auto finish_curve = [&] {
        io::write_csv(store.resolve("traces/" + label + "_curve.csv"),
                      io::curve_to_csv(curve));
        if (svg) {
            std::vector<double> returns;
            for (const auto& p : curve) returns.push_back(p.mean_episode_return);
            store.write_text("reports/" + label + "_curve.svg",
                             io::svg_line_chart({"mean episode return"}, {returns},
                                                label + " training curve"));
        }
    };

    try {
        trainer->run(on_update, on_checkpoint);
    } catch (const TrainingDiverged& ex) {
        finish_curve();
        std::cerr << "training diverged: " << ex.what() << "\n";
        if (store.exists(ckpt_rel))
            std::cerr << "last checkpoint kept at "
                      << store.resolve(ckpt_rel).string() << "\n";
        return kExitDiverged;
    }

    io::save_policy(store.resolve("policies/" + label + ".policy"), trainer->result());
    finish_curve();
    std::cout << "wrote policies/" << label << ".policy and traces/" << label
              << "_curve.csv\n";
    return kExitOk;
}

sim::DisturbanceMode parse_mode(const std::string& name) {
    return sim::mode_from_name(name);
}

const std::vector<double>& magnitudes_for(const RunConfig& cfg,
                                          sim::DisturbanceMode mode) {
    switch (mode) {
    case sim::DisturbanceMode::X: return cfg.sweep.magnitudes_x;
    case sim::DisturbanceMode::Z: return cfg.sweep.magnitudes_z;
    default: return cfg.sweep.magnitudes_xyz;
    }
}

json sweep_summary_json(const metrics::SweepResult& sweep) {
    // group rows by (label, mode, magnitude); arrays keep insertion order
    struct Acc {
        int n = 0, converged = 0, failed = 0;
        double final_distance = 0, distance = 0, smooth = 0, ascent = 0;
        double action_error = 0, ret_nav = 0, ret_err = 0, ret_scalar = 0;
    };
    std::map<std::string, std::map<std::string, std::map<double, Acc>>> cells;
    for (const auto& row : sweep.rows) {
        Acc& a = cells[row.label][row.mode][row.magnitude];
        if (!row.error.empty()) {
            ++a.failed;
            continue;
        }
        ++a.n;
        a.converged += row.metrics.converged ? 1 : 0;
        a.final_distance += row.metrics.final_distance;
        a.distance += row.metrics.distance_traveled;
        a.smooth += row.metrics.smoothness;
        a.ascent += row.metrics.avg_ascent_step;
        a.action_error += row.metrics.mean_action_error;
        a.ret_nav += row.discounted_return_nav;
        a.ret_err += row.discounted_return_err;
        a.ret_scalar += row.discounted_return_scalar;
    }
    json out;
    out["any_failed"] = sweep.any_failed;
    json entries = json::array();
    for (const auto& [label, modes] : cells)
        for (const auto& [mode, mags] : modes)
            for (const auto& [mag, a] : mags) {
                json e{{"policy", label}, {"mode", mode}, {"magnitude", mag},
                       {"episodes", a.n},  {"failed", a.failed}};
                if (a.n > 0) {
                    const double n = a.n;
                    e["converged_fraction"] = a.converged / n;
                    e["mean_final_distance"] = a.final_distance / n;
                    e["mean_distance_traveled"] = a.distance / n;
                    e["mean_smoothness"] = a.smooth / n;
                    e["mean_avg_ascent_step"] = a.ascent / n;
                    e["mean_action_error"] = a.action_error / n;
                    e["mean_return_nav"] = a.ret_nav / n;
                    e["mean_return_err"] = a.ret_err / n;
                    e["mean_return_scalar"] = a.ret_scalar / n;
                }
                entries.push_back(std::move(e));
            }
    out["cells"] = std::move(entries);
    return out;
}

// x = magnitude, one column per policy; y = the chosen cell mean.
io::CsvTable plot_table(const json& summary, const std::string& mode,
                        const std::string& field) {
    std::set<std::string> labels;
    std::set<double> mags;
    std::map<std::pair<std::string, double>, double> value;
    for (const auto& cell : summary.at("cells")) {
        if (cell.at("mode").get<std::string>() != mode) continue;
        if (!cell.contains(field)) continue;
        const auto label = cell.at("policy").get<std::string>();
        const double mag = cell.at("magnitude").get<double>();
        labels.insert(label);
        mags.insert(mag);
        value[{label, mag}] = cell.at(field).get<double>();
    }
    io::CsvTable t;
    t.header = {"magnitude"};
    for (const auto& l : labels) t.header.push_back(l);
    for (const double mag : mags) {
        std::vector<std::string> row{fmt9(mag)};
        for (const auto& l : labels) {
            auto it = value.find({l, mag});
            row.push_back(it == value.end() ? "" : fmt9(it->second));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

int cmd_sweep(const CommonArgs& common, std::vector<std::string> policy_paths,
              bool svg) {
    const RunConfig cfg = load_config(common);
    ArtifactStore store(cfg.output_dir);
    store.record_run("sweep", "sweep", cfg.seed, config::run_config_to_json(cfg));

    if (policy_paths.empty()) {
        for (const auto& p : sorted_glob(store.root() / "policies", ".policy"))
            policy_paths.push_back(p.string());
        if (policy_paths.empty())
            throw ConfigError("no policy files given and none found under " +
                              (store.root() / "policies").string());
    }

    metrics::SweepResult combined;
    for (const auto& path : policy_paths) {
        const auto policy = io::load_policy(path);
        const std::string label = file_label(path);
        for (const auto& mode_name : cfg.sweep.modes) {
            metrics::SweepSpec spec;
            spec.variants = {policy.variant};
            spec.modes = {parse_mode(mode_name)};
            spec.magnitudes = magnitudes_for(cfg, spec.modes[0]);
            spec.eval_initial_position = cfg.sweep.eval_initial_position;
            spec.episodes_per_cell = cfg.sweep.episodes_per_cell;
            spec.seed = cfg.seed;
            spec.gamma = cfg.ppo.gamma;
            spec.converged_tol = cfg.sweep.converged_tol;
            spec.ascent_steps = cfg.sweep.ascent_steps;
            spec.start_jitter = cfg.sweep.start_jitter;
            auto result = metrics::run_sweep(spec, {policy}, cfg.env, cfg.low_level);
            for (auto& row : result.rows) {
                row.label = label;
                combined.rows.push_back(std::move(row));
            }
            combined.any_failed = combined.any_failed || result.any_failed;
        }
        std::cout << "evaluated " << label << " (" << path << ")\n";
    }

    io::write_csv(store.resolve("traces/sweep.csv"), io::sweep_to_csv(combined));
    io::write_csv(store.resolve("traces/sweep_traces.csv"),
                  io::sweep_traces_to_csv(combined));
    const json summary = sweep_summary_json(combined);
    store.write_json("reports/sweep_summary.json", summary);

    const std::pair<const char*, const char*> plot_fields[] = {
        {"mean_return_scalar", "return"},
        {"mean_action_error", "action_error"},
        {"converged_fraction", "converged"}};
    for (const auto& mode_name : cfg.sweep.modes) {
        for (const auto& [field, stem] : plot_fields) {
            const auto table = plot_table(summary, mode_name, field);
            io::write_csv(store.resolve("reports/plot_" + std::string(stem) + "_" +
                                        mode_name + ".csv"),
                          table);
            if (svg && table.header.size() > 1 && !table.rows.empty()) {
                std::vector<std::string> names(table.header.begin() + 1,
                                               table.header.end());
                std::vector<std::vector<double>> series(names.size());
                for (const auto& row : table.rows)
                    for (size_t c = 1; c < row.size(); ++c)
                        series[c - 1].push_back(row[c].empty()
                                                    ? std::nan("")
                                                    : std::stod(row[c]));
                store.write_text("reports/plot_" + std::string(stem) + "_" +
                                     mode_name + ".svg",
                                 io::svg_line_chart(names, series,
                                                    std::string(stem) + " vs |wind|, mode " +
                                                        mode_name));
            }
        }
    }

    int failed = 0;
    for (const auto& row : combined.rows)
        if (!row.error.empty()) ++failed;
    std::cout << combined.rows.size() << " sweep episodes, " << failed
              << " failed; wrote traces/sweep.csv, traces/sweep_traces.csv, "
                 "reports/sweep_summary.json\n";
    if (combined.any_failed) {
        std::cerr << "some sweep cells errored; see the error column of "
                     "traces/sweep.csv\n";
        return kExitPartial;
    }
    return kExitOk;
}

reach::Axis axis_from_name(const std::string& name) {
    if (name == "x") return reach::Axis::X;
    if (name == "y") return reach::Axis::Y;
    return reach::Axis::Z;
}

int cmd_brt(const CommonArgs& common, std::vector<std::string> stats_paths,
            bool svg) {
    const RunConfig cfg = load_config(common);
    ArtifactStore store(cfg.output_dir);
    store.record_run("brt", "brt", cfg.seed, config::run_config_to_json(cfg));

    if (stats_paths.empty()) {
        if (fs::exists(store.root() / "stats"))
            for (const auto& entry :
                 fs::directory_iterator(store.root() / "stats"))
                if (entry.is_directory() && fs::exists(entry.path() / "stats.json"))
                    stats_paths.push_back((entry.path() / "stats.json").string());
        std::sort(stats_paths.begin(), stats_paths.end());
        if (stats_paths.empty())
            throw ConfigError("no stats files given and none found under " +
                              (store.root() / "stats").string());
    }

    const auto& rc = cfg.reach;
    const auto initial =
        reach::signed_distance_sphere(rc.grid, rc.target_center, rc.target_radius);
    const auto axis = axis_from_name(rc.slice_axis);

    json entries = json::array();
    for (const auto& path : stats_paths) {
        const fs::path p(path);
        std::string name = file_label(p);
        if (name == "stats" && p.has_parent_path())
            name = p.parent_path().filename().string(); // stats/<label>/stats.json
        const auto stats = io::stats_from_json(json::parse(io::read_text(p)));
        const auto bounds =
            reach::bounds_from_stats(stats, rc.step_duration, rc.kappa);
        auto brt = reach::integrate_brt(initial, bounds, rc.tau, rc.cfl,
                                        rc.target_radius);
        io::save_value_field(store.resolve("brt/" + name + ".vf"), brt.tube);

        const auto slice = reach::extract_slice(brt, axis, rc.slice_coordinate);
        store.write_json("brt/" + name + ".slice.json", io::slice_to_json(slice));
        io::CsvTable contour;
        contour.header = {"u1", "v1", "u2", "v2"};
        for (const auto& seg : slice.contour)
            contour.rows.push_back(
                {fmt9(seg[0]), fmt9(seg[1]), fmt9(seg[2]), fmt9(seg[3])});
        io::write_csv(store.resolve("brt/" + name + ".slice.csv"), contour);

        const bool contains = reach::slice_contains_disc(
            slice, rc.grid, rc.target_center, rc.target_radius);
        entries.push_back({{"name", name},
                           {"stats_file", path},
                           {"area", slice.area},
                           {"contains_target_disc", contains},
                           {"u_max", bounds.u_max},
                           {"d_max", {bounds.d_max.x, bounds.d_max.y, bounds.d_max.z}}});
        std::cout << name << ": slice area " << fmt9(slice.area) << " m^2, d_max = ("
                  << fmt9(bounds.d_max.x) << ", " << fmt9(bounds.d_max.y) << ", "
                  << fmt9(bounds.d_max.z) << ")\n";

        if (svg) {
            std::ostringstream os;
            os << "<svg xmlns='http://www.w3.org/2000/svg' width='480' height='480' "
                  "viewBox='" << rc.grid.lower[slice.plane_axes[0]] << ' '
               << rc.grid.lower[slice.plane_axes[1]] << ' '
               << rc.grid.upper[slice.plane_axes[0]] -
                      rc.grid.lower[slice.plane_axes[0]]
               << ' '
               << rc.grid.upper[slice.plane_axes[1]] -
                      rc.grid.lower[slice.plane_axes[1]]
               << "'>\n<rect x='" << rc.grid.lower[slice.plane_axes[0]] << "' y='"
               << rc.grid.lower[slice.plane_axes[1]]
               << "' width='100%' height='100%' fill='white'/>\n";
            for (const auto& seg : slice.contour)
                os << "<line x1='" << seg[0] << "' y1='" << seg[1] << "' x2='"
                   << seg[2] << "' y2='" << seg[3]
                   << "' stroke='#1976d2' stroke-width='0.01'/>\n";
            os << "</svg>\n";
            store.write_text("brt/" + name + ".slice.svg", os.str());
        }
    }

    store.write_json("reports/brt_summary.json",
                     {{"tau", rc.tau},
                      {"kappa", rc.kappa},
                      {"step_duration", rc.step_duration},
                      {"slice_axis", rc.slice_axis},
                      {"slice_coordinate", rc.slice_coordinate},
                      {"target_radius", rc.target_radius},
                      {"entries", entries}});
    std::cout << "wrote reports/brt_summary.json (" << entries.size()
              << " tubes)\n";
    return kExitOk;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) row.push_back(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_report(const CommonArgs& common, bool svg) {
    const RunConfig cfg = load_config(common);
    ArtifactStore store(cfg.output_dir);

    std::ostringstream md;
    md << "# Experiment report: " << cfg.experiment << "\n\nSeed " << cfg.seed
       << ", artifacts under `" << store.root().string() << "`.\n";

    // error statistics
    std::vector<fs::path> stat_dirs;
    if (fs::exists(store.root() / "stats"))
        for (const auto& entry : fs::directory_iterator(store.root() / "stats"))
            if (entry.is_directory() && fs::exists(entry.path() / "stats.json"))
                stat_dirs.push_back(entry.path());
    std::sort(stat_dirs.begin(), stat_dirs.end());
    if (!stat_dirs.empty()) {
        md << "\n## Action-error statistics\n\n"
           << "| capture | mean (m) | cov diagonal (m^2) | E\\|e\\| (m) |\n"
           << "|---|---|---|---|\n";
        for (const auto& dir : stat_dirs) {
            const auto stats = io::stats_from_json(
                json::parse(io::read_text(dir / "stats.json")));
            std::string expected = "-";
            if (fs::exists(dir / "expected_magnitude.json")) {
                const auto j = json::parse(io::read_text(dir / "expected_magnitude.json"));
                expected = fmt9(j.at("expected_error_magnitude").get<double>());
            }
            md << "| " << dir.filename().string() << " | (" << fmt9(stats.mean.x)
               << ", " << fmt9(stats.mean.y) << ", " << fmt9(stats.mean.z) << ") | ("
               << fmt9(stats.covariance[0][0]) << ", " << fmt9(stats.covariance[1][1])
               << ", " << fmt9(stats.covariance[2][2]) << ") | " << expected
               << " |\n";
        }
    }

    // training curves
    const auto curves = sorted_glob(store.root() / "traces", "_curve.csv");
    if (!curves.empty()) {
        md << "\n## Training\n\n| policy | updates | final mean return |\n|---|---|---|\n";
        for (const auto& path : curves) {
            const auto rows = parse_csv(io::read_text(path));
            std::string last = rows.size() > 1 ? rows.back()[2] : "-";
            md << "| " << file_label(path) << " | "
               << (rows.empty() ? 0 : rows.size() - 1) << " | " << last << " |\n";
            if (svg && rows.size() > 2) {
                std::vector<double> returns;
                for (size_t i = 1; i < rows.size(); ++i)
                    returns.push_back(std::stod(rows[i][2]));
                store.write_text("reports/" + file_label(path) + "_curve.svg",
                                 io::svg_line_chart({"mean episode return"},
                                                    {returns},
                                                    file_label(path) +
                                                        " training curve"));
            }
        }
    }

    // sweep summary
    if (store.exists("reports/sweep_summary.json")) {
        const auto summary = store.read_json("reports/sweep_summary.json");
        md << "\n## Disturbance sweep\n\n"
           << "| policy | mode | magnitude (N) | converged | final dist (m) | "
              "action err (m) | return |\n|---|---|---|---|---|---|---|\n";
        for (const auto& cell : summary.at("cells")) {
            md << "| " << cell.at("policy").get<std::string>() << " | "
               << cell.at("mode").get<std::string>() << " | "
               << fmt9(cell.at("magnitude").get<double>()) << " | ";
            if (cell.contains("converged_fraction"))
                md << fmt9(cell.at("converged_fraction").get<double>()) << " | "
                   << fmt9(cell.at("mean_final_distance").get<double>()) << " | "
                   << fmt9(cell.at("mean_action_error").get<double>()) << " | "
                   << fmt9(cell.at("mean_return_scalar").get<double>()) << " |\n";
            else
                md << "- | - | - | - |\n";
        }
        if (summary.at("any_failed").get<bool>())
            md << "\nSome sweep cells errored; see traces/sweep.csv.\n";
    }

    // BRT comparison
    if (store.exists("reports/brt_summary.json")) {
        const auto summary = store.read_json("reports/brt_summary.json");
        md << "\n## Backward reachable tubes (slice " << summary.at("slice_axis").get<std::string>()
           << " = " << fmt9(summary.at("slice_coordinate").get<double>()) << ", tau = "
           << fmt9(summary.at("tau").get<double>()) << " s, kappa = "
           << fmt9(summary.at("kappa").get<double>()) << ")\n\n"
           << "| model | slice area (m^2) | contains target disc |\n|---|---|---|\n";
        for (const auto& e : summary.at("entries"))
            md << "| " << e.at("name").get<std::string>() << " | "
               << fmt9(e.at("area").get<double>()) << " | "
               << (e.at("contains_target_disc").get<bool>() ? "yes" : "no")
               << " |\n";
    }

    store.write_text("reports/report.md", md.str());
    std::cout << "wrote " << store.resolve("reports/report.md").string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadnav: waypoint-navigation RL with action-error statistics and "
                 "reachability analysis"};
    app.require_subcommand(1);

    CommonArgs walk_args;
    std::string walk_label = "walk", walk_policy;
    long walk_mc = 1000000;
    auto* walk = app.add_subcommand(
        "random-walk", "Collect per-step action-error statistics and E|e|");
    add_common(walk, walk_args);
    walk->add_option("--label", walk_label, "Capture name (stats/<label>/...)");
    walk->add_option("--policy", walk_policy,
                     "Use a trained policy's actions instead of uniform random ones");
    walk->add_option("--mc-samples", walk_mc,
                     "Monte Carlo samples for the expected error magnitude");

    CommonArgs train_args;
    std::string train_variant, train_resume, train_label;
    bool train_pareto = false, train_svg = false;
    auto* train = app.add_subcommand("train", "Train PPO policies");
    add_common(train, train_args);
    train->add_option("--variant", train_variant,
                      "baseline | dist | dist-err | dist-err-u");
    train->add_flag("--pareto", train_pareto,
                    "Train one SER policy per configured weight vector");
    train->add_option("--resume", train_resume, "Checkpoint file to resume from");
    train->add_option("--label", train_label, "Artifact name (default: variant)");
    train->add_flag("--svg", train_svg, "Also write an SVG training curve");

    CommonArgs sweep_args;
    std::vector<std::string> sweep_policies;
    bool sweep_svg = false;
    auto* sweep = app.add_subcommand(
        "sweep", "Evaluate policies across disturbance modes/magnitudes");
    add_common(sweep, sweep_args);
    sweep->add_option("policies", sweep_policies,
                      "Policy files (default: <output-dir>/policies/*.policy)");
    sweep->add_flag("--svg", sweep_svg, "Also write SVG plot files");

    CommonArgs brt_args;
    std::vector<std::string> brt_stats;
    bool brt_svg = false;
    auto* brt = app.add_subcommand(
        "brt", "Compute backward reachable tubes from error statistics");
    add_common(brt, brt_args);
    brt->add_option("stats", brt_stats,
                    "Error-stats JSON files (default: <output-dir>/stats/*/stats.json)");
    brt->add_flag("--svg", brt_svg, "Also write slice contour SVGs");

    CommonArgs report_args;
    bool report_svg = false;
    auto* report = app.add_subcommand(
        "report", "Summarize the artifacts in the output directory");
    add_common(report, report_args);
    report->add_flag("--svg", report_svg, "Also write SVG charts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (walk->parsed())
            return cmd_random_walk(walk_args, walk_label, walk_policy, walk_mc);
        if (train->parsed())
            return cmd_train(train_args, train_variant, train_pareto, train_resume,
                             train_label, train_svg);
        if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_policies, sweep_svg);
        if (brt->parsed()) return cmd_brt(brt_args, brt_stats, brt_svg);
        if (report->parsed()) return cmd_report(report_args, report_svg);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const InsufficientData& ex) {
        std::cerr << "insufficient data: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const SimulationDiverged& ex) {
        std::cerr << "simulation diverged: " << ex.what() << "\n";
        return kExitDiverged;
    } catch (const TrainingDiverged& ex) {
        std::cerr << "training diverged: " << ex.what() << "\n";
        return kExitDiverged;
    } catch (const NumericalInstability& ex) {
        std::cerr << "numerical instability: " << ex.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitDiverged;
    }
    return kExitOk;
}
