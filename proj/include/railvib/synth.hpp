#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "railvib/geo_align.hpp"
#include "railvib/ingest.hpp"

namespace railvib {

struct ClassCounts {
    int none = 27;
    int tamping = 17;
    int surfacing = 14;
    int both = 29;

    int total() const { return none + tamping + surfacing + both; }
};

struct SynthConfig {
    std::uint64_t seed = 1;
    double segment_length_m = 250.0;
    // Maintenance-relevant irregularities live in the first part of the
    // segment regardless of its total length.
    double signature_region_m = 250.0;
    ClassCounts counts;
    double speed_min_mps = 8.0;
    double speed_max_mps = 15.0;
    double gps_sigma_m = 3.0;
    double gps_bias_max_m = 10.0;
    // Scale of class signatures relative to the base roughness; 0 removes all
    // label-dependent content.
    double snr = 3.0;
    double roughness_amp_m = 0.0015;
    double accel_noise_g = 0.002;
    double sample_rate_hz = 1600.0;
    double gps_rate_hz = 1.0;
    int n_corrupt = 0;  // passes whose GPS is unusably corrupted
    Date start_date{std::chrono::year(2017), std::chrono::month(1), std::chrono::day(5)};
};

void validate_config(const SynthConfig& cfg);

// Chainage layout of a synthetic dataset: the centerline spans
// [0, segment + 2 * lead] and the labeled segment is [lead, lead + segment].
inline constexpr double kSynthLeadM = 40.0;

struct TrackProfile {
    double s0 = 0.0;
    double ds = 0.05;
    Eigen::ArrayXd x, y, z;  // irregularity per grid point, meters
    LabelVector labels;

    double value_at(Axis axis, double s) const;  // clamped linear interpolation
};

// Dataset-level structure shared by every pass: fixed base roughness and a
// fixed damage layout, both derived from the seed alone. Per-pass content
// (roughness noise, kinematics, sensor noise) comes from substreams keyed by
// the pass index, so any pass can be produced in isolation.
class ProfileGenerator {
public:
    explicit ProfileGenerator(const SynthConfig& cfg);
    TrackProfile generate(LabelVector labels, std::uint64_t pass_index) const;
    double grid_length_m() const { return length_m_; }

private:
    SynthConfig cfg_;
    double length_m_ = 0.0;
    Eigen::ArrayXd base_x_, base_y_, base_z_;
    Eigen::ArrayXd tamp_y_, tamp_z_;
    Eigen::ArrayXd surf_z_;
};

TrackProfile generate_profile(const SynthConfig& cfg, LabelVector labels,
                              std::uint64_t pass_index);

struct SynthTrack {
    TrackCenterline centerline;
    GeoOrigin origin;
};

// Gentle S-curve with arc-length chainage, deterministic for a given config.
SynthTrack make_synth_track(const SynthConfig& cfg);

struct PassPlan {
    LabelVector labels;
    Date date{};
    bool corrupt_gps = false;
};

// Pass order: both, tamping-only, surfacing-only, none. Labeled groups sit in
// separate date windows so the maintenance log reproduces the labels exactly.
std::vector<PassPlan> dataset_plan(const SynthConfig& cfg);

// The maintenance events that make dataset_plan's labels come out under the
// default 60-day horizon.
std::vector<MaintenanceRecord> dataset_maintenance(const SynthConfig& cfg);

struct SimulatedPass {
    RawPass pass;
    LabelVector labels;
    bool gps_corrupted = false;
    std::vector<double> true_chainage;  // one entry per accelerometer sample
};

// One train pass over the profile: axle response integrated at the sample
// rate, measured in g with sensor noise, plus GPS fixes with bias and jitter.
SimulatedPass simulate_pass(const TrackProfile& profile, const SynthTrack& track,
                            const SynthConfig& cfg, std::uint64_t pass_index,
                            const PassPlan& plan);

class DatasetSimulator {
public:
    explicit DatasetSimulator(const SynthConfig& cfg);

    const SynthConfig& config() const { return cfg_; }
    const SynthTrack& track() const { return track_; }
    const std::vector<PassPlan>& plan() const { return plan_; }
    std::size_t size() const { return plan_.size(); }

    SimulatedPass simulate(std::size_t index) const;

private:
    SynthConfig cfg_;
    SynthTrack track_;
    ProfileGenerator generator_;
    std::vector<PassPlan> plan_;
};

// Writes centerline.csv, passes.csv, manifest.csv, maintenance.csv,
// dataset.cfg and per-pass accel/GPS files under out_dir.
void write_dataset(const SynthConfig& cfg, const std::string& out_dir);

void write_pass(const RawPass& pass, const std::string& accel_file,
                const std::string& gps_file);

}  // namespace railvib
