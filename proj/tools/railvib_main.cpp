#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "railvib/detail/csv.hpp"
#include "railvib/model_io.hpp"
#include "railvib/pipeline.hpp"

namespace {

using railvib::ExperimentConfig;
using railvib::SynthConfig;

// Flag overrides sit on top of whatever the config file set.
struct RunFlags {
    std::string config, passes, centerline, manifest, maintenance;
    double segment_start = 0, segment_end = 0, cell = 0, window = 0, split_ratio = 0;
    double icp_tol = 0, icp_reject_rms = 0;
    int n_select = 0, folds = 0, horizon_days = 0, icp_max_iter = 0;
    std::uint64_t seed = 0;
    std::string axes, task, method, direction;

    CLI::Option *o_passes = nullptr, *o_centerline = nullptr, *o_manifest = nullptr,
                *o_maintenance = nullptr, *o_segment_start = nullptr,
                *o_segment_end = nullptr, *o_cell = nullptr, *o_window = nullptr,
                *o_n_select = nullptr, *o_axes = nullptr, *o_task = nullptr,
                *o_method = nullptr, *o_folds = nullptr, *o_split_ratio = nullptr,
                *o_seed = nullptr, *o_horizon = nullptr, *o_direction = nullptr,
                *o_icp_max_iter = nullptr, *o_icp_tol = nullptr,
                *o_icp_reject_rms = nullptr;

    void wire(CLI::App* cmd) {
        cmd->add_option("--config", config, "experiment config file");
        o_passes = cmd->add_option("--passes", passes, "pass index CSV");
        o_centerline = cmd->add_option("--centerline", centerline, "centerline CSV");
        o_manifest = cmd->add_option("--manifest", manifest, "label manifest CSV");
        o_maintenance =
            cmd->add_option("--maintenance", maintenance, "maintenance log CSV");
        o_segment_start =
            cmd->add_option("--segment-start", segment_start, "segment start [m]");
        o_segment_end = cmd->add_option("--segment-end", segment_end, "segment end [m]");
        o_cell = cmd->add_option("--cell", cell, "resampling cell size [m]");
        o_window = cmd->add_option("--window", window, "moving-average window [m]");
        o_n_select = cmd->add_option("--n-select", n_select, "indices kept per axis");
        o_axes = cmd->add_option(
            "--axes", axes, "x | y | z | uniaxial | triaxial-concat | triaxial-vote");
        o_task = cmd->add_option("--task", task, "binary | multilabel");
        o_method = cmd->add_option("--method", method,
                                   "knn | logreg | svm | binary-relevance | "
                                   "classifier-chain | label-powerset | ml-knn");
        o_folds = cmd->add_option("--folds", folds, "CV folds (0 = automatic)");
        o_split_ratio = cmd->add_option("--split-ratio", split_ratio, "train fraction");
        o_seed = cmd->add_option("--seed", seed, "experiment seed");
        o_horizon = cmd->add_option("--horizon-days", horizon_days,
                                    "maintenance label horizon [days]");
        o_direction =
            cmd->add_option("--direction", direction, "both | inbound | outbound");
        o_icp_max_iter = cmd->add_option("--icp-max-iter", icp_max_iter, "ICP iterations");
        o_icp_tol = cmd->add_option("--icp-tol", icp_tol, "ICP convergence tol [m]");
        o_icp_reject_rms =
            cmd->add_option("--icp-reject-rms", icp_reject_rms, "ICP rejection RMS [m]");
    }

    ExperimentConfig build() const {
        ExperimentConfig cfg;
        if (!config.empty()) cfg = railvib::load_experiment_config(config);
        if (o_passes->count()) cfg.passes_file = passes;
        if (o_centerline->count()) cfg.centerline_file = centerline;
        if (o_manifest->count()) cfg.manifest_file = manifest;
        if (o_maintenance->count()) cfg.maintenance_file = maintenance;
        if (o_segment_start->count()) cfg.segment_start_m = segment_start;
        if (o_segment_end->count()) cfg.segment_end_m = segment_end;
        if (o_cell->count()) cfg.cell_m = cell;
        if (o_window->count()) cfg.window_m = window;
        if (o_n_select->count()) cfg.n_select = n_select;
        if (o_axes->count()) cfg.axes = railvib::parse_axes_mode(axes);
        if (o_task->count()) cfg.task = railvib::parse_task(task);
        if (o_method->count()) cfg.method = railvib::parse_method(method);
        if (o_folds->count()) cfg.folds = folds;
        if (o_split_ratio->count()) cfg.split_ratio = split_ratio;
        if (o_seed->count()) cfg.seed = seed;
        if (o_horizon->count()) cfg.horizon_days = horizon_days;
        if (o_direction->count()) cfg.direction = direction;
        if (o_icp_max_iter->count()) cfg.icp.max_iter = icp_max_iter;
        if (o_icp_tol->count()) cfg.icp.tol_m = icp_tol;
        if (o_icp_reject_rms->count()) cfg.icp.reject_rms_m = icp_reject_rms;
        return cfg;
    }
};

struct SimFlags {
    std::string config, start_date;
    std::uint64_t seed = 0;
    double segment_length = 0, signature_region = 0, speed_min = 0, speed_max = 0;
    double gps_sigma = 0, gps_bias_max = 0, snr = 0, roughness_amp = 0, accel_noise = 0;
    double sample_rate = 0, gps_rate = 0;
    int count_none = 0, count_tamping = 0, count_surfacing = 0, count_both = 0;
    int n_corrupt = 0;

    CLI::Option *o_seed = nullptr, *o_segment_length = nullptr,
                *o_signature_region = nullptr, *o_count_none = nullptr,
                *o_count_tamping = nullptr, *o_count_surfacing = nullptr,
                *o_count_both = nullptr, *o_speed_min = nullptr, *o_speed_max = nullptr,
                *o_gps_sigma = nullptr, *o_gps_bias_max = nullptr, *o_snr = nullptr,
                *o_roughness_amp = nullptr, *o_accel_noise = nullptr,
                *o_sample_rate = nullptr, *o_gps_rate = nullptr, *o_n_corrupt = nullptr,
                *o_start_date = nullptr;

    void wire(CLI::App* cmd) {
        cmd->add_option("--config", config, "synthesis config file");
        o_seed = cmd->add_option("--seed", seed, "dataset seed");
        o_segment_length =
            cmd->add_option("--segment-length", segment_length, "labeled segment [m]");
        o_signature_region = cmd->add_option("--signature-region", signature_region,
                                             "damage signature region [m]");
        o_count_none = cmd->add_option("--count-none", count_none, "passes without work");
        o_count_tamping =
            cmd->add_option("--count-tamping", count_tamping, "tamping-only passes");
        o_count_surfacing = cmd->add_option("--count-surfacing", count_surfacing,
                                            "surfacing-only passes");
        o_count_both = cmd->add_option("--count-both", count_both, "both-label passes");
        o_speed_min = cmd->add_option("--speed-min", speed_min, "minimum speed [m/s]");
        o_speed_max = cmd->add_option("--speed-max", speed_max, "maximum speed [m/s]");
        o_gps_sigma = cmd->add_option("--gps-sigma", gps_sigma, "GPS noise sigma [m]");
        o_gps_bias_max =
            cmd->add_option("--gps-bias-max", gps_bias_max, "per-pass GPS bias cap [m]");
        o_snr = cmd->add_option("--snr", snr, "signature strength relative to roughness");
        o_roughness_amp =
            cmd->add_option("--roughness-amp", roughness_amp, "base roughness RMS [m]");
        o_accel_noise =
            cmd->add_option("--accel-noise", accel_noise, "sensor noise sigma [g]");
        o_sample_rate =
            cmd->add_option("--sample-rate", sample_rate, "accelerometer rate [Hz]");
        o_gps_rate = cmd->add_option("--gps-rate", gps_rate, "GPS fix rate [Hz]");
        o_n_corrupt =
            cmd->add_option("--n-corrupt", n_corrupt, "passes with corrupted GPS");
        o_start_date =
            cmd->add_option("--start-date", start_date, "first pass date (YYYY-MM-DD)");
    }

    SynthConfig build() const {
        SynthConfig cfg;
        if (!config.empty()) cfg = railvib::load_synth_config(config);
        if (o_seed->count()) cfg.seed = seed;
        if (o_segment_length->count()) cfg.segment_length_m = segment_length;
        if (o_signature_region->count()) cfg.signature_region_m = signature_region;
        if (o_count_none->count()) cfg.counts.none = count_none;
        if (o_count_tamping->count()) cfg.counts.tamping = count_tamping;
        if (o_count_surfacing->count()) cfg.counts.surfacing = count_surfacing;
        if (o_count_both->count()) cfg.counts.both = count_both;
        if (o_speed_min->count()) cfg.speed_min_mps = speed_min;
        if (o_speed_max->count()) cfg.speed_max_mps = speed_max;
        if (o_gps_sigma->count()) cfg.gps_sigma_m = gps_sigma;
        if (o_gps_bias_max->count()) cfg.gps_bias_max_m = gps_bias_max;
        if (o_snr->count()) cfg.snr = snr;
        if (o_roughness_amp->count()) cfg.roughness_amp_m = roughness_amp;
        if (o_accel_noise->count()) cfg.accel_noise_g = accel_noise;
        if (o_sample_rate->count()) cfg.sample_rate_hz = sample_rate;
        if (o_gps_rate->count()) cfg.gps_rate_hz = gps_rate;
        if (o_n_corrupt->count()) cfg.n_corrupt = n_corrupt;
        if (o_start_date->count()) cfg.start_date = railvib::parse_date(start_date);
        return cfg;
    }
};

void emit_report(const nlohmann::json& report, const std::string& report_file) {
    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (!report_file.empty()) railvib::detail::write_file(report_file, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"track maintenance detection from in-service train vibration"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    std::string sim_out;
    sim->add_option("--out", sim_out, "output directory")->required();
    SimFlags sim_flags;
    sim_flags.wire(sim);

    auto* run = app.add_subcommand("run", "run one experiment, print a JSON report");
    RunFlags run_flags;
    run_flags.wire(run);
    std::string run_report, run_save_model, run_boundary;
    int run_grid_res = 200;
    run->add_option("--report", run_report, "also write the report to this file");
    run->add_option("--save-model", run_save_model, "write the fitted model here");
    run->add_option("--boundary", run_boundary, "write a decision-boundary CSV here");
    run->add_option("--grid-res", run_grid_res, "boundary grid resolution per axis");

    auto* bnd = app.add_subcommand("boundary", "export a decision-boundary grid");
    std::string bnd_model, bnd_out;
    int bnd_grid_res = 200;
    RunFlags bnd_flags;
    bnd_flags.wire(bnd);
    auto* o_bnd_model =
        bnd->add_option("--model", bnd_model, "saved model file to evaluate");
    bnd->add_option("--out", bnd_out, "output CSV")->required();
    bnd->add_option("--grid-res", bnd_grid_res, "grid resolution per axis");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(sim)) {
            const SynthConfig cfg = sim_flags.build();
            railvib::validate_config(cfg);
            railvib::write_dataset(cfg, sim_out);
            std::cout << "wrote " << cfg.counts.total() << " passes under " << sim_out
                      << "\n";
        } else if (app.got_subcommand(run)) {
            const ExperimentConfig cfg = run_flags.build();
            railvib::RunOutputs outputs = railvib::run_experiment(cfg);
            if (!run_save_model.empty()) {
                if (!outputs.bundle) {
                    throw railvib::ValidationError(
                        "model: only binary-task runs without voting can be saved");
                }
                railvib::save_model(*outputs.bundle, run_save_model);
            }
            if (!run_boundary.empty()) {
                if (!outputs.boundary) {
                    throw railvib::ValidationError(
                        "boundary: voting runs have no single feature plane");
                }
                railvib::write_boundary_csv(*outputs.boundary, run_boundary,
                                            run_grid_res);
                outputs.report["boundary_csv"] = run_boundary;
            }
            emit_report(outputs.report, run_report);
        } else {
            if ((o_bnd_model->count() != 0) == !bnd_flags.config.empty()) {
                throw railvib::ValidationError(
                    "boundary needs exactly one of --model or --config");
            }
            if (o_bnd_model->count()) {
                const railvib::ModelBundle bundle = railvib::load_model(bnd_model);
                railvib::write_boundary_csv(railvib::boundary_from_bundle(bundle),
                                            bnd_out, bnd_grid_res);
            } else {
                const ExperimentConfig cfg = bnd_flags.build();
                railvib::RunOutputs outputs = railvib::run_experiment(cfg);
                if (!outputs.boundary) {
                    throw railvib::ValidationError(
                        "boundary: voting runs have no single feature plane");
                }
                railvib::write_boundary_csv(*outputs.boundary, bnd_out, bnd_grid_res);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
