#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "railvib/geo_align.hpp"
#include "railvib/ingest.hpp"
#include "railvib/model_io.hpp"
#include "railvib/synth.hpp"

namespace railvib {

struct ExperimentConfig {
    std::string passes_file;       // index CSV listing the per-pass data files
    std::string centerline_file;
    std::string manifest_file;     // labels straight from a manifest (optional)
    std::string maintenance_file;  // labels derived from the work log (optional)
    double segment_start_m = 0.0;
    double segment_end_m = 0.0;
    double cell_m = 0.25;
    double window_m = 25.0;
    int n_select = 50;
    AxesMode axes = AxesMode::triaxial_concat;
    Task task = Task::binary;
    Method method = Method::knn;
    int folds = 0;  // 0 = automatic
    double split_ratio = 0.8;
    std::uint64_t seed = 1;
    int horizon_days = 60;
    std::string direction = "both";  // both | inbound | outbound
    IcpConfig icp;
};

// Everything except file-path presence (streamed runs carry their own data).
void validate_params(const ExperimentConfig& cfg);
// validate_params plus the path requirements of a disk run.
void validate_config(const ExperimentConfig& cfg);

// key = value files with # comments; relative paths resolve against the
// config file's directory.
ExperimentConfig load_experiment_config(const std::string& path);
SynthConfig load_synth_config(const std::string& path);

struct PassIndexRow {
    PassMeta meta;
    std::string accel_file;  // resolved
    std::string gps_file;    // resolved
};

// header "pass_id,date,direction,accel_file,gps_file"
std::vector<PassIndexRow> parse_pass_index(const std::string& file);

// header "pass_id,date,tamping,surfacing"
std::map<std::string, LabelVector> parse_manifest(const std::string& file);

struct PassRecord {
    RawPass pass;
    LabelVector labels;
};

// Yields one pass at a time; an empty optional ends the stream. Only one
// pass is held in memory at once.
using PassSource = std::function<std::optional<PassRecord>()>;

struct BoundaryModel {
    Eigen::Vector2d score_min = Eigen::Vector2d::Zero();  // train-score bounds
    Eigen::Vector2d score_max = Eigen::Vector2d::Zero();
    std::function<std::string(const Eigen::Vector2d&)> label_at;
};

struct RunOutputs {
    nlohmann::json report;
    // Present for binary-task runs without voting; these are what --save-model
    // and the boundary export consume.
    std::optional<ModelBundle> bundle;
    std::optional<BoundaryModel> boundary;
};

RunOutputs run_experiment_stream(const ExperimentConfig& cfg,
                                 const LoadedCenterline& track,
                                 const PassSource& source);
RunOutputs run_experiment(const ExperimentConfig& cfg);

// Predicted label on a regular grid_res x grid_res grid spanning the score
// box plus a 10% margin per side. Header "pc1,pc2,label".
void write_boundary_csv(const BoundaryModel& boundary, const std::string& file,
                        int grid_res = 200);

BoundaryModel boundary_from_bundle(const ModelBundle& bundle);

}  // namespace railvib
