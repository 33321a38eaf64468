#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadnav/metrics.hpp"
#include "quadnav/noise.hpp"
#include "quadnav/ppo.hpp"
#include "quadnav/reach.hpp"

namespace quadnav::io {

namespace fs = std::filesystem;
using nlohmann::json;

// %.9g — enough digits to see desk-scale (1e-4 m) structure without noise.
std::string fmt9(double v);

// Write-to-temp-then-rename so partially written artifacts never appear
// under the final name.
void write_text_atomic(const fs::path& path, const std::string& content);
void write_binary_atomic(const fs::path& path, const std::string& bytes);
std::string read_text(const fs::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
std::string render_csv(const CsvTable& table);
void write_csv(const fs::path& path, const CsvTable& table);

// --- JSON codecs ---------------------------------------------------------

json stats_to_json(const noise::ErrorStats& stats);
noise::ErrorStats stats_from_json(const json& j);

json env_config_to_json(const env::EnvConfig& cfg);
env::EnvConfig env_config_from_json(const json& j);

json low_level_to_json(const sim::LowLevelConfig& cfg);
sim::LowLevelConfig low_level_from_json(const json& j);

json schedule_to_json(const sim::DisturbanceSchedule& s);
sim::DisturbanceSchedule schedule_from_json(const json& j);

json ppo_config_to_json(const ppo::PpoConfig& cfg);
ppo::PpoConfig ppo_config_from_json(const json& j);

json mlp_params_to_json(const ppo::MlpParams& params);
ppo::MlpParams mlp_params_from_json(const json& j);

json policy_to_json(const ppo::TrainedPolicy& policy);
ppo::TrainedPolicy policy_from_json(const json& j);

void save_policy(const fs::path& path, const ppo::TrainedPolicy& policy);
ppo::TrainedPolicy load_policy(const fs::path& path);

// --- tabular artifacts ---------------------------------------------------

CsvTable curve_to_csv(const std::vector<ppo::TrainingCurvePoint>& points);
CsvTable trajectory_to_csv(const metrics::Trajectory& traj);
CsvTable sweep_to_csv(const metrics::SweepResult& sweep);
// Long-format per-step traces: one row per (cell episode, step) carrying the
// commanded |action|2 and the commanded-minus-executed magnitude gap.
CsvTable sweep_traces_to_csv(const metrics::SweepResult& sweep);
CsvTable samples_to_csv(const std::vector<Vec3>& samples);

// --- value fields --------------------------------------------------------

// Binary layout: "QNAVVF1\0", int32 nx/ny/nz, lower[3], upper[3],
// time_label, then nx*ny*nz doubles with z fastest.
void save_value_field(const fs::path& path, const reach::ValueField& field);
reach::ValueField load_value_field(const fs::path& path);

json slice_to_json(const reach::SliceResult& slice, bool include_values = true);

// --- training checkpoints ------------------------------------------------

void save_checkpoint(const fs::path& path, const ppo::Trainer& trainer);
// Rebuilds a trainer mid-run; continuing it reproduces the uninterrupted run.
std::unique_ptr<ppo::Trainer> load_checkpoint(const fs::path& path);

// --- output layout -------------------------------------------------------

// Flat artifact root with fixed subdirectories. resolve() creates parents.
class ArtifactStore {
  public:
    explicit ArtifactStore(fs::path root);

    const fs::path& root() const { return root_; }
    fs::path resolve(const std::string& relative) const;

    void write_text(const std::string& relative, const std::string& content) const;
    void write_json(const std::string& relative, const json& j) const;
    json read_json(const std::string& relative) const;
    bool exists(const std::string& relative) const;

    // reports/<name>.run.json: command, seed and full config snapshot.
    void record_run(const std::string& name, const std::string& command,
                    uint64_t seed, const json& config) const;

  private:
    fs::path root_;
};

// Minimal inline-styled polyline chart (one series per column).
std::string svg_line_chart(const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& series,
                           const std::string& title, int width = 720,
                           int height = 360);

} // namespace quadnav::io
