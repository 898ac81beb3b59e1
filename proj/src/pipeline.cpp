#include "railvib/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <utility>

#include "railvib/detail/csv.hpp"
#include "railvib/features.hpp"
#include "railvib/multilabel.hpp"
#include "railvib/rng.hpp"
#include "railvib/spatial.hpp"

namespace railvib {
namespace {

using nlohmann::json;

std::string tagged(const char* stg, const std::exception& e) {
    return std::string(stg) + ": " + e.what();
}

// Prefixes errors with the pipeline stage they came from, keeping the type.
template <class F>
auto stage(const char* stg, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ParseError(tagged(stg, e));
    } catch (const ValidationError& e) {
        throw ValidationError(tagged(stg, e));
    } catch (const IoError& e) {
        throw IoError(tagged(stg, e));
    } catch (const std::exception& e) {
        throw std::runtime_error(tagged(stg, e));
    }
}

bool try_parse_u64(std::string_view s, std::uint64_t& out) {
    s = detail::trim(s);
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

// ---- key = value config files ----

struct KvEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct KvFile {
    std::string path;
    std::string dir;
    std::vector<KvEntry> entries;
};

KvFile read_kv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open file");
    KvFile kv;
    kv.path = path;
    kv.dir = std::filesystem::path(path).parent_path().string();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(path + ": line " + std::to_string(lineno) +
                             ": expected 'key = value'");
        }
        KvEntry e;
        e.key = std::string(detail::trim(sv.substr(0, eq)));
        e.value = std::string(detail::trim(sv.substr(eq + 1)));
        e.line = lineno;
        if (e.key.empty()) {
            throw ParseError(path + ": line " + std::to_string(lineno) + ": empty key");
        }
        kv.entries.push_back(std::move(e));
    }
    return kv;
}

[[noreturn]] void kv_fail(const KvFile& kv, const KvEntry& e, const std::string& msg) {
    throw ParseError(kv.path + ": line " + std::to_string(e.line) + ": key '" + e.key +
                     "': " + msg);
}

std::string kv_path(const KvFile& kv, const KvEntry& e) {
    std::filesystem::path p(e.value);
    if (e.value.empty()) kv_fail(kv, e, "empty path");
    if (p.is_absolute() || kv.dir.empty()) return e.value;
    return (std::filesystem::path(kv.dir) / p).string();
}

double kv_double(const KvFile& kv, const KvEntry& e) {
    double v;
    if (!detail::try_parse_double(e.value, v)) kv_fail(kv, e, "not a number");
    return v;
}

int kv_int(const KvFile& kv, const KvEntry& e) {
    long v;
    if (!detail::try_parse_long(e.value, v) || v < std::numeric_limits<int>::min() ||
        v > std::numeric_limits<int>::max()) {
        kv_fail(kv, e, "not an integer");
    }
    return static_cast<int>(v);
}

std::uint64_t kv_u64(const KvFile& kv, const KvEntry& e) {
    std::uint64_t v;
    if (!try_parse_u64(e.value, v)) kv_fail(kv, e, "not an unsigned integer");
    return v;
}

// ---- shared row/element gathers ----

template <class T>
std::vector<T> take(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    }
    return out;
}

std::string combo_name(LabelVector v) {
    if (v.tamping && v.surfacing) return "both";
    if (v.tamping) return "tamping";
    if (v.surfacing) return "surfacing";
    return "none";
}

// ---- binary classifier fitting with CV ----

struct FittedBinary {
    std::vector<std::string> grid_desc;
    std::optional<CvReport> cv;
    std::size_t chosen = 0;
    std::string chosen_desc;
    std::optional<KnnModel> knn;
    std::optional<LogRegModel> logreg;
    std::optional<SvmModel> svm;

    int predict(const Eigen::VectorXd& q) const {
        if (knn) return knn_predict(*knn, q);
        if (logreg) return logreg_predict(*logreg, q);
        return svm_predict(*svm, q);
    }
};

FittedBinary fit_binary(Method method, const Eigen::MatrixXd& xtr,
                        const std::vector<int>& ytr, int requested_folds,
                        std::uint64_t cv_seed) {
    FittedBinary out;
    std::vector<int> k_grid;
    std::vector<double> c_grid;
    std::vector<std::pair<double, double>> svm_grid;
    std::unique_ptr<ClassifierFamily> family;
    switch (method) {
        case Method::knn:
            k_grid = default_k_grid(ytr.size());
            family = std::make_unique<KnnFamily>(k_grid);
            break;
        case Method::logreg:
            c_grid = default_c_grid();
            family = std::make_unique<LogRegFamily>(c_grid);
            break;
        case Method::svm:
            svm_grid = default_svm_grid();
            family = std::make_unique<SvmFamily>(svm_grid);
            break;
        default:
            throw ValidationError("not a binary classifier method");
    }
    for (std::size_t i = 0; i < family->grid_size(); ++i) {
        out.grid_desc.push_back(family->describe(i));
    }
    const int folds = choose_folds(ytr, requested_folds);
    if (folds >= 2) {
        out.cv = cross_validate(*family, xtr, ytr, folds, cv_seed);
        out.chosen = out.cv->chosen;
    }
    out.chosen_desc = out.grid_desc[out.chosen];
    switch (method) {
        case Method::knn:
            out.knn = make_knn(k_grid[out.chosen], xtr, ytr);
            break;
        case Method::logreg:
            out.logreg = logreg_fit(xtr, ytr, c_grid[out.chosen]);
            break;
        default:
            out.svm = svm_fit(xtr, ytr, svm_grid[out.chosen].first,
                              svm_grid[out.chosen].second);
            break;
    }
    return out;
}

json cv_json(const FittedBinary& f) {
    if (!f.cv) return nullptr;
    json grid = json::array();
    for (std::size_t i = 0; i < f.grid_desc.size(); ++i) {
        grid.push_back({{"params", f.grid_desc[i]},
                        {"mean_accuracy", f.cv->mean_accuracy[i]}});
    }
    return {{"folds", f.cv->folds}, {"grid", grid}, {"chosen", f.chosen_desc}};
}

// ---- multilabel fitting ----

struct FittedMl {
    std::string chosen_desc;
    std::function<LabelVector(const Eigen::VectorXd&)> predict;
};

FittedMl fit_multilabel(Method method, const MultiLabelDataset& data,
                        const MlTuning& tuning) {
    FittedMl out;
    switch (method) {
        case Method::binary_relevance: {
            auto m = std::make_shared<BinaryRelevance>(binary_relevance_fit(data, tuning));
            out.chosen_desc = "k_tamping=" + std::to_string(m->tamping.k) +
                              ",k_surfacing=" + std::to_string(m->surfacing.k);
            out.predict = [m](const Eigen::VectorXd& q) {
                return binary_relevance_predict(*m, q);
            };
            break;
        }
        case Method::classifier_chain: {
            auto m = std::make_shared<ClassifierChain>(classifier_chain_fit(data, tuning));
            out.chosen_desc = "k_first=" + std::to_string(m->first.k) +
                              ",k_second=" + std::to_string(m->second.k);
            out.predict = [m](const Eigen::VectorXd& q) {
                return classifier_chain_predict(*m, q);
            };
            break;
        }
        case Method::label_powerset: {
            auto m = std::make_shared<LabelPowerset>(label_powerset_fit(data, tuning));
            out.chosen_desc = "k=" + std::to_string(m->model.k);
            out.predict = [m](const Eigen::VectorXd& q) {
                return label_powerset_predict(*m, q);
            };
            break;
        }
        case Method::mlknn: {
            auto m = std::make_shared<MlknnModel>(mlknn_fit_tuned(data, tuning));
            out.chosen_desc =
                "k=" + std::to_string(m->k) + ",s=" + detail::format_double(m->s);
            out.predict = [m](const Eigen::VectorXd& q) { return mlknn_predict(*m, q); };
            break;
        }
        default:
            throw ValidationError("not a multilabel method");
    }
    return out;
}

// ---- metrics blocks ----

json confusion_json(const ConfusionMatrix& cm) {
    return {{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
}

json binary_metrics_json(const std::vector<int>& pred, const std::vector<int>& truth) {
    json m;
    m["accuracy"] = accuracy(pred, truth);
    m["confusion_matrix"] = confusion_json(confusion_matrix(pred, truth));
    return m;
}

// Multilabel block keeps all three set metrics plus the binarized (label OR)
// accuracy and confusion so runs stay comparable with the binary task.
json multilabel_metrics_json(const std::vector<LabelVector>& pred,
                             const std::vector<LabelVector>& truth) {
    std::vector<int> pred_or(pred.size()), truth_or(truth.size());
    for (std::size_t i = 0; i < pred.size(); ++i) pred_or[i] = pred[i].any() ? 1 : 0;
    for (std::size_t i = 0; i < truth.size(); ++i) truth_or[i] = truth[i].any() ? 1 : 0;
    json m;
    m["accuracy"] = accuracy(pred_or, truth_or);
    m["exact_match_ratio"] = exact_match_ratio(pred, truth);
    m["hamming_loss"] = hamming_loss(pred, truth);
    m["confusion_matrix"] = confusion_json(confusion_matrix(pred_or, truth_or));
    return m;
}

json config_echo(const ExperimentConfig& cfg) {
    json c;
    c["passes"] = cfg.passes_file;
    c["centerline"] = cfg.centerline_file;
    c["manifest"] = cfg.manifest_file;
    c["maintenance"] = cfg.maintenance_file;
    c["segment_start"] = cfg.segment_start_m;
    c["segment_end"] = cfg.segment_end_m;
    c["cell"] = cfg.cell_m;
    c["window"] = cfg.window_m;
    c["n_select"] = cfg.n_select;
    c["axes"] = to_string(cfg.axes);
    c["task"] = to_string(cfg.task);
    c["method"] = to_string(cfg.method);
    c["folds"] = cfg.folds;
    c["split_ratio"] = cfg.split_ratio;
    c["seed"] = cfg.seed;
    c["horizon_days"] = cfg.horizon_days;
    c["direction"] = cfg.direction;
    c["icp_max_iter"] = cfg.icp.max_iter;
    c["icp_tol"] = cfg.icp.tol_m;
    c["icp_reject_rms"] = cfg.icp.reject_rms_m;
    return c;
}

}  // namespace

void validate_params(const ExperimentConfig& cfg) {
    const double len = cfg.segment_end_m - cfg.segment_start_m;
    if (!(len > 0.0)) throw ValidationError("segment_end must exceed segment_start");
    if (!(cfg.cell_m > 0.0)) throw ValidationError("cell size must be positive");
    if (!(cfg.window_m > 0.0)) throw ValidationError("window must be positive");
    const long n_cells = std::llround(len / cfg.cell_m);
    if (n_cells < 1) throw ValidationError("segment spans less than one cell");
    if (cfg.n_select < 1) throw ValidationError("n_select must be positive");
    if (cfg.n_select > n_cells) {
        throw ValidationError("n_select exceeds the segment's cell count (" +
                              std::to_string(n_cells) + ")");
    }
    if (cfg.folds != 0 && cfg.folds < 2) {
        throw ValidationError("folds must be 0 (automatic) or at least 2");
    }
    if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) {
        throw ValidationError("split_ratio must be strictly between 0 and 1");
    }
    if (cfg.horizon_days < 1) throw ValidationError("horizon_days must be positive");
    if (cfg.direction != "both" && cfg.direction != "inbound" &&
        cfg.direction != "outbound") {
        throw ValidationError("direction must be both, inbound or outbound");
    }
    if (cfg.icp.max_iter < 1) throw ValidationError("icp_max_iter must be positive");
    if (!(cfg.icp.tol_m > 0.0)) throw ValidationError("icp_tol must be positive");
    if (!(cfg.icp.reject_rms_m > 0.0)) {
        throw ValidationError("icp_reject_rms must be positive");
    }
    if (cfg.task == Task::binary && !is_binary_method(cfg.method)) {
        throw ValidationError(std::string("method '") + to_string(cfg.method) +
                              "' requires the multilabel task");
    }
    if (cfg.task == Task::multilabel && is_binary_method(cfg.method)) {
        throw ValidationError(std::string("method '") + to_string(cfg.method) +
                              "' handles only the binary task");
    }
    if (cfg.task == Task::multilabel && cfg.axes == AxesMode::triaxial_vote) {
        throw ValidationError("voting combines binary labels; use the binary task");
    }
}

void validate_config(const ExperimentConfig& cfg) {
    validate_params(cfg);
    if (cfg.passes_file.empty()) throw ValidationError("no passes index configured");
    if (cfg.centerline_file.empty()) throw ValidationError("no centerline configured");
    if (cfg.manifest_file.empty() && cfg.maintenance_file.empty()) {
        throw ValidationError("labels need a manifest or a maintenance log");
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    const KvFile kv = read_kv(path);
    ExperimentConfig cfg;
    for (const KvEntry& e : kv.entries) {
        try {
            if (e.key == "passes") {
                cfg.passes_file = kv_path(kv, e);
            } else if (e.key == "centerline") {
                cfg.centerline_file = kv_path(kv, e);
            } else if (e.key == "manifest") {
                cfg.manifest_file = kv_path(kv, e);
            } else if (e.key == "maintenance") {
                cfg.maintenance_file = kv_path(kv, e);
            } else if (e.key == "segment_start") {
                cfg.segment_start_m = kv_double(kv, e);
            } else if (e.key == "segment_end") {
                cfg.segment_end_m = kv_double(kv, e);
            } else if (e.key == "cell") {
                cfg.cell_m = kv_double(kv, e);
            } else if (e.key == "window") {
                cfg.window_m = kv_double(kv, e);
            } else if (e.key == "n_select") {
                cfg.n_select = kv_int(kv, e);
            } else if (e.key == "axes") {
                cfg.axes = parse_axes_mode(e.value);
            } else if (e.key == "task") {
                cfg.task = parse_task(e.value);
            } else if (e.key == "method") {
                cfg.method = parse_method(e.value);
            } else if (e.key == "folds") {
                cfg.folds = kv_int(kv, e);
            } else if (e.key == "split_ratio") {
                cfg.split_ratio = kv_double(kv, e);
            } else if (e.key == "seed") {
                cfg.seed = kv_u64(kv, e);
            } else if (e.key == "horizon_days") {
                cfg.horizon_days = kv_int(kv, e);
            } else if (e.key == "direction") {
                cfg.direction = e.value;
            } else if (e.key == "icp_max_iter") {
                cfg.icp.max_iter = kv_int(kv, e);
            } else if (e.key == "icp_tol") {
                cfg.icp.tol_m = kv_double(kv, e);
            } else if (e.key == "icp_reject_rms") {
                cfg.icp.reject_rms_m = kv_double(kv, e);
            } else {
                throw ParseError(path + ": line " + std::to_string(e.line) +
                                 ": unknown key '" + e.key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& ex) {
            kv_fail(kv, e, ex.what());
        }
    }
    return cfg;
}

SynthConfig load_synth_config(const std::string& path) {
    const KvFile kv = read_kv(path);
    SynthConfig cfg;
    for (const KvEntry& e : kv.entries) {
        try {
            if (e.key == "seed") {
                cfg.seed = kv_u64(kv, e);
            } else if (e.key == "segment_length") {
                cfg.segment_length_m = kv_double(kv, e);
            } else if (e.key == "signature_region") {
                cfg.signature_region_m = kv_double(kv, e);
            } else if (e.key == "count_none") {
                cfg.counts.none = kv_int(kv, e);
            } else if (e.key == "count_tamping") {
                cfg.counts.tamping = kv_int(kv, e);
            } else if (e.key == "count_surfacing") {
                cfg.counts.surfacing = kv_int(kv, e);
            } else if (e.key == "count_both") {
                cfg.counts.both = kv_int(kv, e);
            } else if (e.key == "speed_min") {
                cfg.speed_min_mps = kv_double(kv, e);
            } else if (e.key == "speed_max") {
                cfg.speed_max_mps = kv_double(kv, e);
            } else if (e.key == "gps_sigma") {
                cfg.gps_sigma_m = kv_double(kv, e);
            } else if (e.key == "gps_bias_max") {
                cfg.gps_bias_max_m = kv_double(kv, e);
            } else if (e.key == "snr") {
                cfg.snr = kv_double(kv, e);
            } else if (e.key == "roughness_amp") {
                cfg.roughness_amp_m = kv_double(kv, e);
            } else if (e.key == "accel_noise") {
                cfg.accel_noise_g = kv_double(kv, e);
            } else if (e.key == "sample_rate") {
                cfg.sample_rate_hz = kv_double(kv, e);
            } else if (e.key == "gps_rate") {
                cfg.gps_rate_hz = kv_double(kv, e);
            } else if (e.key == "n_corrupt") {
                cfg.n_corrupt = kv_int(kv, e);
            } else if (e.key == "start_date") {
                cfg.start_date = parse_date(e.value);
            } else {
                throw ParseError(path + ": line " + std::to_string(e.line) +
                                 ": unknown key '" + e.key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& ex) {
            kv_fail(kv, e, ex.what());
        }
    }
    return cfg;
}

std::vector<PassIndexRow> parse_pass_index(const std::string& file) {
    detail::CsvReader reader(file,
                             {"pass_id", "date", "direction", "accel_file", "gps_file"});
    const std::string dir = std::filesystem::path(file).parent_path().string();
    const auto resolve = [&dir](std::string_view rel) {
        std::filesystem::path p{std::string(rel)};
        if (p.is_absolute() || dir.empty()) return p.string();
        return (std::filesystem::path(dir) / p).string();
    };
    std::vector<PassIndexRow> rows;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        PassIndexRow row;
        row.meta.pass_id = std::string(detail::trim(f[0]));
        if (row.meta.pass_id.empty()) reader.fail("empty pass_id");
        try {
            row.meta.date = parse_date(detail::trim(f[1]));
            row.meta.direction = parse_direction(detail::trim(f[2]));
        } catch (const std::exception& e) {
            reader.fail(e.what());
        }
        if (detail::trim(f[3]).empty() || detail::trim(f[4]).empty()) {
            reader.fail("empty file path");
        }
        row.accel_file = resolve(detail::trim(f[3]));
        row.gps_file = resolve(detail::trim(f[4]));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::map<std::string, LabelVector> parse_manifest(const std::string& file) {
    detail::CsvReader reader(file, {"pass_id", "date", "tamping", "surfacing"});
    std::map<std::string, LabelVector> out;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        const std::string id(detail::trim(f[0]));
        if (id.empty()) reader.fail("empty pass_id");
        LabelVector v;
        const long t = reader.integer(f[2], "tamping");
        const long s = reader.integer(f[3], "surfacing");
        if ((t != 0 && t != 1) || (s != 0 && s != 1)) {
            reader.fail("labels must be 0 or 1");
        }
        v.tamping = t == 1;
        v.surfacing = s == 1;
        if (!out.emplace(id, v).second) reader.fail("duplicate pass_id '" + id + "'");
    }
    return out;
}

RunOutputs run_experiment_stream(const ExperimentConfig& cfg,
                                 const LoadedCenterline& track,
                                 const PassSource& source) {
    stage("config", [&] {
        validate_params(cfg);
        return 0;
    });

    const std::vector<Axis> axes = axes_for_mode(cfg.axes);
    const ChainageInterval segment{cfg.segment_start_m, cfg.segment_end_m};

    long parsed = 0, aligned_count = 0, rejected = 0;
    std::vector<std::string> rejected_ids;
    std::vector<LabelVector> labels;
    std::vector<std::vector<Eigen::VectorXd>> rows(axes.size());

    for (;;) {
        std::optional<PassRecord> rec = stage("ingest", [&] { return source(); });
        if (!rec) break;
        ++parsed;
        const std::string id = rec->pass.pass_id;
        stage("ingest", [&] {
            validate_pass(rec->pass);
            for (Axis a : axes) {
                if (!rec->pass.has_channel(a)) {
                    throw ValidationError(std::string("pass ") + id + " has no a" +
                                          to_string(a) + " channel");
                }
            }
            return 0;
        });

        std::vector<PlanarPoint> pts;
        const AlignmentResult align = stage("geo_align", [&] {
            try {
                pts = project_to_plane(rec->pass.gps, track.origin);
                return icp_align(pts, track.centerline, cfg.icp);
            } catch (const std::exception& e) {
                throw ValidationError("pass " + id + ": " + e.what());
            }
        });
        if (!align.accepted) {
            ++rejected;
            rejected_ids.push_back(id);
            continue;
        }
        ++aligned_count;

        stage("spatial", [&] {
            try {
                std::vector<double> fix_times;
                fix_times.reserve(rec->pass.gps.size());
                for (const GpsFix& fx : rec->pass.gps) fix_times.push_back(fx.t);
                for (PlanarPoint& p : pts) p = align.transform.apply(p);
                const std::vector<double>& sample_times =
                    rec->pass.channels.begin()->second.t;
                const InterpolatedPositions positions = interpolate_positions(
                    fix_times, pts, sample_times, track.centerline);
                for (std::size_t a = 0; a < axes.size(); ++a) {
                    const AccelChannel& ch = rec->pass.channel(axes[a]);
                    const SpatialSignal sig =
                        spatial_resample(ch.value, positions, segment, cfg.cell_m);
                    rows[a].push_back(moving_window_average(sig, cfg.window_m).values);
                }
            } catch (const std::exception& e) {
                throw ValidationError("pass " + id + ": " + e.what());
            }
            return 0;
        });
        labels.push_back(rec->labels);
    }

    const std::size_t n = labels.size();
    if (n < 5) {
        throw ValidationError("ingest: only " + std::to_string(n) +
                              " usable passes after rejection; need at least 5");
    }

    std::vector<Eigen::MatrixXd> profile(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) {
        profile[a].resize(static_cast<Eigen::Index>(n), rows[a][0].size());
        for (std::size_t i = 0; i < n; ++i) {
            profile[a].row(static_cast<Eigen::Index>(i)) = rows[a][i];
        }
        rows[a].clear();
    }

    std::vector<int> strat(n);
    for (std::size_t i = 0; i < n; ++i) strat[i] = labels[i].any() ? 1 : 0;
    const TrainTestSplit split = stage("split", [&] {
        return split_train_test(strat, cfg.split_ratio, mix_seed(cfg.seed, 101));
    });
    const std::vector<int> y_train = take(strat, split.train);
    const std::vector<int> y_test = take(strat, split.test);

    // Selector and PCA are fit on training passes only.
    struct Space {
        std::string name;
        PcaModel pca;
        Eigen::MatrixXd scores;  // all passes x 2
    };
    std::vector<IndexSelector> selectors(axes.size());
    std::vector<Space> spaces;
    stage("features", [&] {
        std::vector<Eigen::MatrixXd> reduced(axes.size());
        for (std::size_t a = 0; a < axes.size(); ++a) {
            selectors[a] =
                fit_index_selector(take_rows(profile[a], split.train), cfg.n_select);
            reduced[a] = apply_selector(selectors[a], profile[a]);
        }
        std::vector<std::pair<std::string, Eigen::MatrixXd>> feats;
        if (cfg.axes == AxesMode::triaxial_concat) {
            Eigen::MatrixXd f(static_cast<Eigen::Index>(n),
                              reduced[0].cols() + reduced[1].cols() + reduced[2].cols());
            f << reduced[0], reduced[1], reduced[2];
            feats.emplace_back("xyz", std::move(f));
        } else if (cfg.axes == AxesMode::triaxial_vote) {
            for (std::size_t a = 0; a < axes.size(); ++a) {
                feats.emplace_back(to_string(axes[a]), std::move(reduced[a]));
            }
        } else {
            feats.emplace_back(to_string(axes[0]), std::move(reduced[0]));
        }
        for (auto& [name, f] : feats) {
            Space sp;
            sp.name = name;
            sp.pca = pca_fit(take_rows(f, split.train), 2);
            sp.scores = pca_transform(sp.pca, f);
            spaces.push_back(std::move(sp));
        }
        return 0;
    });

    json model_json;
    model_json["selected_indices"] = json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) {
        json idx = json::array();
        for (Eigen::Index i : selectors[a].indices) idx.push_back(i);
        model_json["selected_indices"][to_string(axes[a])] = std::move(idx);
    }

    json metrics_train, metrics_test;
    std::optional<ModelBundle> bundle;
    std::optional<BoundaryModel> boundary;

    const auto score_row = [](const Space& sp, std::size_t i) {
        return Eigen::VectorXd(sp.scores.row(static_cast<Eigen::Index>(i)).transpose());
    };

    if (cfg.task == Task::binary && cfg.axes != AxesMode::triaxial_vote) {
        const Space& sp = spaces[0];
        const Eigen::MatrixXd xtr = take_rows(sp.scores, split.train);
        auto fitted = std::make_shared<FittedBinary>(stage("model", [&] {
            return fit_binary(cfg.method, xtr, y_train, cfg.folds,
                              mix_seed(cfg.seed, 102));
        }));
        const auto predict_set = [&](const std::vector<std::size_t>& idx) {
            std::vector<int> out;
            out.reserve(idx.size());
            for (std::size_t i : idx) out.push_back(fitted->predict(score_row(sp, i)));
            return out;
        };
        const std::vector<int> pred_train = predict_set(split.train);
        const std::vector<int> pred_test = predict_set(split.test);
        metrics_train = binary_metrics_json(pred_train, y_train);
        metrics_test = binary_metrics_json(pred_test, y_test);
        json sj;
        sj["axis"] = sp.name;
        sj["pca_explained_variance_ratio"] = std::vector<double>(
            sp.pca.explained_variance_ratio.data(),
            sp.pca.explained_variance_ratio.data() + sp.pca.explained_variance_ratio.size());
        sj["cv"] = cv_json(*fitted);
        sj["chosen"] = fitted->chosen_desc;
        model_json["spaces"] = json::array({sj});
        model_json["chosen"] = fitted->chosen_desc;

        ModelBundle mb;
        mb.axes = cfg.axes;
        mb.method = cfg.method;
        mb.selectors = selectors;
        mb.pca = sp.pca;
        mb.knn = fitted->knn;
        mb.logreg = fitted->logreg;
        mb.svm = fitted->svm;
        mb.score_min = xtr.colwise().minCoeff().transpose();
        mb.score_max = xtr.colwise().maxCoeff().transpose();
        bundle = std::move(mb);

        BoundaryModel bm;
        bm.score_min = bundle->score_min;
        bm.score_max = bundle->score_max;
        bm.label_at = [fitted](const Eigen::Vector2d& p) {
            const Eigen::VectorXd q = p;
            return std::to_string(fitted->predict(q));
        };
        boundary = std::move(bm);
    } else if (cfg.task == Task::binary) {
        // triaxial voting: one classifier per axis, majority of the three
        std::vector<std::shared_ptr<FittedBinary>> per_axis;
        json spaces_json = json::array();
        json chosen_json = json::array();
        for (std::size_t s = 0; s < spaces.size(); ++s) {
            const Space& sp = spaces[s];
            auto fitted = std::make_shared<FittedBinary>(stage("model", [&] {
                return fit_binary(cfg.method, take_rows(sp.scores, split.train), y_train,
                                  cfg.folds, mix_seed(cfg.seed, 110 + s));
            }));
            json sj;
            sj["axis"] = sp.name;
            sj["pca_explained_variance_ratio"] = std::vector<double>(
                sp.pca.explained_variance_ratio.data(),
                sp.pca.explained_variance_ratio.data() +
                    sp.pca.explained_variance_ratio.size());
            sj["cv"] = cv_json(*fitted);
            sj["chosen"] = fitted->chosen_desc;
            spaces_json.push_back(std::move(sj));
            chosen_json.push_back(fitted->chosen_desc);
            per_axis.push_back(std::move(fitted));
        }
        model_json["spaces"] = std::move(spaces_json);
        model_json["chosen"] = std::move(chosen_json);
        const auto predict_set = [&](const std::vector<std::size_t>& idx) {
            std::vector<int> out;
            out.reserve(idx.size());
            for (std::size_t i : idx) {
                std::array<int, 3> votes{};
                for (std::size_t s = 0; s < 3; ++s) {
                    votes[s] = per_axis[s]->predict(score_row(spaces[s], i));
                }
                out.push_back(major_vote(votes));
            }
            return out;
        };
        metrics_train = binary_metrics_json(predict_set(split.train), y_train);
        metrics_test = binary_metrics_json(predict_set(split.test), y_test);
    } else {
        const Space& sp = spaces[0];
        MultiLabelDataset data;
        data.x = take_rows(sp.scores, split.train);
        data.y = take(labels, split.train);
        MlTuning tuning;
        tuning.folds = cfg.folds;
        tuning.seed = mix_seed(cfg.seed, 103);
        auto fitted = std::make_shared<FittedMl>(
            stage("model", [&] { return fit_multilabel(cfg.method, data, tuning); }));
        const auto predict_set = [&](const std::vector<std::size_t>& idx) {
            std::vector<LabelVector> out;
            out.reserve(idx.size());
            for (std::size_t i : idx) out.push_back(fitted->predict(score_row(sp, i)));
            return out;
        };
        metrics_train = multilabel_metrics_json(predict_set(split.train),
                                                take(labels, split.train));
        metrics_test =
            multilabel_metrics_json(predict_set(split.test), take(labels, split.test));
        json sj;
        sj["axis"] = sp.name;
        sj["pca_explained_variance_ratio"] = std::vector<double>(
            sp.pca.explained_variance_ratio.data(),
            sp.pca.explained_variance_ratio.data() + sp.pca.explained_variance_ratio.size());
        sj["cv"] = nullptr;
        sj["chosen"] = fitted->chosen_desc;
        model_json["spaces"] = json::array({sj});
        model_json["chosen"] = fitted->chosen_desc;

        const Eigen::MatrixXd xtr = take_rows(sp.scores, split.train);
        BoundaryModel bm;
        bm.score_min = xtr.colwise().minCoeff().transpose();
        bm.score_max = xtr.colwise().maxCoeff().transpose();
        bm.label_at = [fitted](const Eigen::Vector2d& p) {
            const Eigen::VectorXd q = p;
            return combo_name(fitted->predict(q));
        };
        boundary = std::move(bm);
    }

    json report;
    report["schema"] = 1;
    report["config"] = config_echo(cfg);
    report["stages"] = {{"parsed", parsed},
                        {"aligned", aligned_count},
                        {"rejected", rejected},
                        {"rejected_ids", rejected_ids},
                        {"train", split.train.size()},
                        {"test", split.test.size()}};
    report["model"] = std::move(model_json);
    report["metrics"] = {{"train", metrics_train}, {"test", metrics_test}};
    report["boundary_csv"] = nullptr;

    RunOutputs out;
    out.report = std::move(report);
    out.bundle = std::move(bundle);
    out.boundary = std::move(boundary);
    return out;
}

RunOutputs run_experiment(const ExperimentConfig& cfg) {
    stage("config", [&] {
        validate_config(cfg);
        return 0;
    });
    const LoadedCenterline track =
        stage("ingest", [&] { return load_centerline(cfg.centerline_file); });
    std::vector<PassIndexRow> index =
        stage("ingest", [&] { return parse_pass_index(cfg.passes_file); });

    if (cfg.direction != "both") {
        const Direction want = parse_direction(cfg.direction);
        std::erase_if(index,
                      [want](const PassIndexRow& r) { return r.meta.direction != want; });
    }

    const bool use_manifest = !cfg.manifest_file.empty();
    std::map<std::string, LabelVector> manifest;
    std::vector<MaintenanceRecord> records;
    stage("ingest", [&] {
        if (use_manifest) {
            manifest = parse_manifest(cfg.manifest_file);
        } else {
            records = parse_maintenance_log(cfg.maintenance_file);
        }
        return 0;
    });

    const ChainageInterval segment{cfg.segment_start_m, cfg.segment_end_m};
    std::size_t next = 0;
    const PassSource source = [&]() -> std::optional<PassRecord> {
        if (next >= index.size()) return std::nullopt;
        const PassIndexRow& row = index[next++];
        PassRecord rec;
        rec.pass = parse_pass(row.accel_file, row.gps_file, row.meta);
        if (use_manifest) {
            const auto it = manifest.find(row.meta.pass_id);
            if (it == manifest.end()) {
                throw ParseError(cfg.manifest_file + ": no entry for pass '" +
                                 row.meta.pass_id + "'");
            }
            rec.labels = it->second;
        } else {
            rec.labels = assign_labels(row.meta.date, row.meta.direction, records,
                                       segment, cfg.horizon_days);
        }
        return rec;
    };
    return run_experiment_stream(cfg, track, source);
}

void write_boundary_csv(const BoundaryModel& boundary, const std::string& file,
                        int grid_res) {
    if (grid_res < 2) throw ValidationError("grid resolution must be at least 2");
    if (!boundary.label_at) throw ValidationError("no fitted model to evaluate");
    double lo[2], hi[2];
    for (int d = 0; d < 2; ++d) {
        const double span = boundary.score_max[d] - boundary.score_min[d];
        if (span > 0.0) {
            lo[d] = boundary.score_min[d] - 0.1 * span;
            hi[d] = boundary.score_max[d] + 0.1 * span;
        } else {
            lo[d] = boundary.score_min[d] - 0.5;
            hi[d] = boundary.score_max[d] + 0.5;
        }
    }
    std::string out = "pc1,pc2,label\n";
    for (int i = 0; i < grid_res; ++i) {
        const double x = lo[0] + (hi[0] - lo[0]) * i / (grid_res - 1);
        for (int j = 0; j < grid_res; ++j) {
            const double y = lo[1] + (hi[1] - lo[1]) * j / (grid_res - 1);
            out += detail::format_double(x);
            out += ',';
            out += detail::format_double(y);
            out += ',';
            out += boundary.label_at(Eigen::Vector2d(x, y));
            out += '\n';
        }
    }
    detail::write_file(file, out);
}

BoundaryModel boundary_from_bundle(const ModelBundle& bundle) {
    BoundaryModel b;
    b.score_min = bundle.score_min;
    b.score_max = bundle.score_max;
    const auto shared = std::make_shared<ModelBundle>(bundle);
    b.label_at = [shared](const Eigen::Vector2d& p) {
        const Eigen::VectorXd q = p;
        return std::to_string(shared->predict_score(q));
    };
    return b;
}

}  // namespace railvib
