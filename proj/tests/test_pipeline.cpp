#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "railvib/pipeline.hpp"
#include "railvib/rng.hpp"
#include "support/temp.hpp"

using namespace railvib;
namespace fs = std::filesystem;

namespace {

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> file_lines(const std::string& path) {
    std::istringstream in(slurp_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// 4 clean passes per class (both / none), cheap sample rate
SynthConfig tiny_synth() {
    SynthConfig cfg;
    cfg.seed = 9;
    cfg.segment_length_m = 100.0;
    cfg.signature_region_m = 100.0;
    cfg.counts.none = 4;
    cfg.counts.tamping = 0;
    cfg.counts.surfacing = 0;
    cfg.counts.both = 4;
    cfg.sample_rate_hz = 800.0;
    return cfg;
}

ExperimentConfig valid_params() {
    ExperimentConfig cfg;
    cfg.segment_start_m = 0.0;
    cfg.segment_end_m = 100.0;
    return cfg;
}

// fitted 2D scores over two separated clusters, for model-file round trips
struct ScoredFixture {
    IndexSelector selector;
    PcaModel pca;
    Eigen::MatrixXd scores;
    std::vector<int> y;
};

ScoredFixture scored_fixture() {
    Rng rng(21);
    Eigen::MatrixXd x(10, 4);
    ScoredFixture fx;
    for (int i = 0; i < 10; ++i) {
        const double center = i < 5 ? 0.0 : 3.0;
        for (int j = 0; j < 4; ++j) x(i, j) = center + rng.uniform(-0.4, 0.4);
        fx.y.push_back(i < 5 ? 0 : 1);
    }
    fx.selector = fit_index_selector(x, 3);
    const Eigen::MatrixXd xs = apply_selector(fx.selector, x);
    fx.pca = pca_fit(xs, 2);
    fx.scores = pca_transform(fx.pca, xs);
    return fx;
}

ModelBundle base_bundle(const ScoredFixture& fx, Method method) {
    ModelBundle b;
    b.axes = AxesMode::z_only;
    b.method = method;
    b.selectors = {fx.selector};
    b.pca = fx.pca;
    b.score_min = fx.scores.colwise().minCoeff().transpose();
    b.score_max = fx.scores.colwise().maxCoeff().transpose();
    return b;
}

std::vector<Eigen::VectorXd> probe_grid(const ModelBundle& b) {
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            Eigen::VectorXd q(2);
            q[0] = b.score_min.x() +
                   (b.score_max.x() - b.score_min.x()) * static_cast<double>(i) / 3.0;
            q[1] = b.score_min.y() +
                   (b.score_max.y() - b.score_min.y()) * static_cast<double>(j) / 3.0;
            out.push_back(q);
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("experiment config files load with resolved paths and strict keys") {
    testutil::TempDir dir;
    const std::string path = dir.write("exp.cfg",
                                       "# experiment\n"
                                       "passes = data/passes.csv\n"
                                       "centerline = /abs/center.csv\n"
                                       "manifest = m.csv\n"
                                       "segment_start = 40\n"
                                       "segment_end = 140\n"
                                       "cell = 0.5\n"
                                       "window = 10\n"
                                       "n_select = 20\n"
                                       "axes = z\n"
                                       "task = multilabel\n"
                                       "method = ml-knn\n"
                                       "folds = 3\n"
                                       "split_ratio = 0.75\n"
                                       "seed = 77\n"
                                       "horizon_days = 30\n"
                                       "direction = inbound\n"
                                       "icp_max_iter = 25\n"
                                       "icp_tol = 0.001\n"
                                       "icp_reject_rms = 5\n");
    const ExperimentConfig cfg = load_experiment_config(path);
    CHECK(cfg.passes_file == (fs::path(dir.path()) / "data/passes.csv").string());
    CHECK(cfg.centerline_file == "/abs/center.csv");  // absolute stays put
    CHECK(cfg.manifest_file == (fs::path(dir.path()) / "m.csv").string());
    CHECK(cfg.segment_start_m == 40.0);
    CHECK(cfg.segment_end_m == 140.0);
    CHECK(cfg.cell_m == 0.5);
    CHECK(cfg.window_m == 10.0);
    CHECK(cfg.n_select == 20);
    CHECK(cfg.axes == AxesMode::z_only);
    CHECK(cfg.task == Task::multilabel);
    CHECK(cfg.method == Method::mlknn);
    CHECK(cfg.folds == 3);
    CHECK(cfg.split_ratio == 0.75);
    CHECK(cfg.seed == 77);
    CHECK(cfg.horizon_days == 30);
    CHECK(cfg.direction == "inbound");
    CHECK(cfg.icp.max_iter == 25);
    CHECK(cfg.icp.tol_m == 0.001);
    CHECK(cfg.icp.reject_rms_m == 5.0);

    SUBCASE("an empty file keeps every default") {
        const ExperimentConfig d = load_experiment_config(dir.write("empty.cfg", "\n"));
        CHECK(d.cell_m == 0.25);
        CHECK(d.window_m == 25.0);
        CHECK(d.n_select == 50);
        CHECK(d.axes == AxesMode::triaxial_concat);
        CHECK(d.task == Task::binary);
        CHECK(d.method == Method::knn);
        CHECK(d.split_ratio == 0.8);
        CHECK(d.direction == "both");
    }
    SUBCASE("malformed files are rejected") {
        CHECK_THROWS_AS(load_experiment_config(dir.write("a.cfg", "bogus_key = 1\n")),
                        ParseError);
        CHECK_THROWS_AS(load_experiment_config(dir.write("b.cfg", "folds = abc\n")),
                        ParseError);
        CHECK_THROWS_AS(load_experiment_config(dir.write("c.cfg", "no equals sign\n")),
                        ParseError);
        CHECK_THROWS_AS(load_experiment_config(dir.write("d.cfg", "= 3\n")), ParseError);
        CHECK_THROWS_AS(load_experiment_config(dir.write("e.cfg", "seed = -1\n")),
                        ParseError);
        CHECK_THROWS_AS(load_experiment_config(dir.write("f.cfg", "axes = spiral\n")),
                        ParseError);
        CHECK_THROWS_AS(load_experiment_config(dir.file("absent.cfg")), IoError);
    }
}

TEST_CASE("generator config files cover every knob") {
    testutil::TempDir dir;
    const std::string path = dir.write("synth.cfg",
                                       "seed = 3\n"
                                       "segment_length = 120\n"
                                       "signature_region = 100\n"
                                       "count_none = 1\n"
                                       "count_tamping = 2\n"
                                       "count_surfacing = 3\n"
                                       "count_both = 4\n"
                                       "speed_min = 9\n"
                                       "speed_max = 14\n"
                                       "gps_sigma = 2\n"
                                       "gps_bias_max = 5\n"
                                       "snr = 1.5\n"
                                       "roughness_amp = 0.001\n"
                                       "accel_noise = 0.0005\n"
                                       "sample_rate = 800\n"
                                       "gps_rate = 2\n"
                                       "n_corrupt = 1\n"
                                       "start_date = 2018-03-01\n");
    const SynthConfig cfg = load_synth_config(path);
    CHECK(cfg.seed == 3);
    CHECK(cfg.segment_length_m == 120.0);
    CHECK(cfg.signature_region_m == 100.0);
    CHECK(cfg.counts.none == 1);
    CHECK(cfg.counts.tamping == 2);
    CHECK(cfg.counts.surfacing == 3);
    CHECK(cfg.counts.both == 4);
    CHECK(cfg.speed_min_mps == 9.0);
    CHECK(cfg.speed_max_mps == 14.0);
    CHECK(cfg.gps_sigma_m == 2.0);
    CHECK(cfg.gps_bias_max_m == 5.0);
    CHECK(cfg.snr == 1.5);
    CHECK(cfg.roughness_amp_m == 0.001);
    CHECK(cfg.accel_noise_g == 0.0005);
    CHECK(cfg.sample_rate_hz == 800.0);
    CHECK(cfg.gps_rate_hz == 2.0);
    CHECK(cfg.n_corrupt == 1);
    CHECK(format_date(cfg.start_date) == "2018-03-01");

    CHECK_THROWS_AS(load_synth_config(dir.write("s2.cfg", "cell = 0.25\n")), ParseError);
    CHECK_THROWS_AS(load_synth_config(dir.write("s3.cfg", "start_date = 2018-13-01\n")),
                    ParseError);
}

TEST_CASE("experiment parameter validation rejects each bad combination") {
    CHECK_NOTHROW(validate_params(valid_params()));

    ExperimentConfig cfg = valid_params();
    cfg.segment_end_m = cfg.segment_start_m;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.cell_m = 0.0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.window_m = -1.0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.n_select = 0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.n_select = 401;  // segment has 400 cells
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.folds = 1;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.split_ratio = 1.0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.split_ratio = 0.0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.horizon_days = 0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.direction = "sideways";
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.icp.max_iter = 0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.icp.tol_m = 0.0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    cfg = valid_params();
    cfg.icp.reject_rms_m = 0.0;
    CHECK_THROWS_AS(validate_params(cfg), ValidationError);

    SUBCASE("task and method must agree") {
        cfg = valid_params();
        cfg.task = Task::binary;
        cfg.method = Method::mlknn;
        CHECK_THROWS_AS(validate_params(cfg), ValidationError);
        cfg.task = Task::multilabel;
        CHECK_NOTHROW(validate_params(cfg));
        cfg.method = Method::svm;
        CHECK_THROWS_AS(validate_params(cfg), ValidationError);
        cfg.task = Task::binary;
        CHECK_NOTHROW(validate_params(cfg));

        cfg = valid_params();
        cfg.task = Task::multilabel;
        cfg.method = Method::binary_relevance;
        cfg.axes = AxesMode::triaxial_vote;
        CHECK_THROWS_AS(validate_params(cfg), ValidationError);
    }
    SUBCASE("disk runs also need their input files") {
        cfg = valid_params();
        CHECK_THROWS_AS(validate_config(cfg), ValidationError);
        cfg.passes_file = "p.csv";
        CHECK_THROWS_AS(validate_config(cfg), ValidationError);
        cfg.centerline_file = "c.csv";
        CHECK_THROWS_AS(validate_config(cfg), ValidationError);  // no label source
        cfg.maintenance_file = "m.csv";
        CHECK_NOTHROW(validate_config(cfg));
    }
}

TEST_CASE("pass index and manifest parsers resolve and validate rows") {
    testutil::TempDir dir;
    const std::string index = dir.write("passes.csv",
                                        "pass_id,date,direction,accel_file,gps_file\n"
                                        "p1,2017-01-05,inbound,sub/a.csv,sub/g.csv\n"
                                        "p2,2017-01-06,outbound,/abs/a.csv,/abs/g.csv\n");
    const std::vector<PassIndexRow> rows = parse_pass_index(index);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].meta.pass_id == "p1");
    CHECK(format_date(rows[0].meta.date) == "2017-01-05");
    CHECK(rows[0].meta.direction == Direction::inbound);
    CHECK(rows[0].accel_file == (fs::path(dir.path()) / "sub/a.csv").string());
    CHECK(rows[0].gps_file == (fs::path(dir.path()) / "sub/g.csv").string());
    CHECK(rows[1].meta.direction == Direction::outbound);
    CHECK(rows[1].accel_file == "/abs/a.csv");

    CHECK_THROWS_AS(parse_pass_index(dir.write(
                        "bad_date.csv",
                        "pass_id,date,direction,accel_file,gps_file\n"
                        "p1,2017-99-05,inbound,a.csv,g.csv\n")),
                    ParseError);
    CHECK_THROWS_AS(parse_pass_index(dir.write(
                        "no_id.csv",
                        "pass_id,date,direction,accel_file,gps_file\n"
                        ",2017-01-05,inbound,a.csv,g.csv\n")),
                    ParseError);
    CHECK_THROWS_AS(parse_pass_index(dir.write(
                        "no_file.csv",
                        "pass_id,date,direction,accel_file,gps_file\n"
                        "p1,2017-01-05,inbound,,g.csv\n")),
                    ParseError);
    CHECK_THROWS_AS(parse_pass_index(dir.write("hdr.csv", "pass_id,date\np1,2017-01-05\n")),
                    ParseError);

    SUBCASE("manifest labels") {
        const auto m = parse_manifest(dir.write("manifest.csv",
                                                "pass_id,date,tamping,surfacing\n"
                                                "p1,2017-01-05,1,0\n"
                                                "p2,2017-01-06,0,1\n"
                                                "p3,2017-01-07,0,0\n"));
        REQUIRE(m.size() == 3);
        CHECK(m.at("p1") == LabelVector{true, false});
        CHECK(m.at("p2") == LabelVector{false, true});
        CHECK(m.at("p3") == LabelVector{false, false});

        CHECK_THROWS_AS(parse_manifest(dir.write("dup.csv",
                                                 "pass_id,date,tamping,surfacing\n"
                                                 "p1,2017-01-05,1,0\n"
                                                 "p1,2017-01-06,0,1\n")),
                        ParseError);
        CHECK_THROWS_AS(parse_manifest(dir.write("two.csv",
                                                 "pass_id,date,tamping,surfacing\n"
                                                 "p1,2017-01-05,2,0\n")),
                        ParseError);
        CHECK_THROWS_AS(parse_manifest(dir.file("absent.csv")), IoError);
    }
}

TEST_CASE("an end-to-end run produces a complete deterministic report") {
    testutil::TempDir dir;
    write_dataset(tiny_synth(), dir.path());
    ExperimentConfig cfg =
        load_experiment_config((fs::path(dir.path()) / "dataset.cfg").string());
    cfg.seed = 4;

    const RunOutputs run = run_experiment(cfg);
    const nlohmann::json& rep = run.report;

    CHECK(rep.at("schema") == 1);
    CHECK(rep.at("stages").at("parsed") == 8);
    CHECK(rep.at("stages").at("aligned") == 8);
    CHECK(rep.at("stages").at("rejected") == 0);
    CHECK(rep.at("stages").at("rejected_ids").empty());
    CHECK(rep.at("stages").at("train") == 6);
    CHECK(rep.at("stages").at("test") == 2);

    // 400 cells per axis, 50 kept, indices sorted and in range
    for (const char* axis : {"x", "y", "z"}) {
        const auto& idx = rep.at("model").at("selected_indices").at(axis);
        REQUIRE(idx.size() == 50);
        long prev = -1;
        for (const auto& v : idx) {
            const long i = v.get<long>();
            CHECK(i > prev);
            CHECK(i < 400);
            prev = i;
        }
    }

    const auto& space = rep.at("model").at("spaces").at(0);
    CHECK(space.at("axis") == "xyz");
    const auto evr = space.at("pca_explained_variance_ratio").get<std::vector<double>>();
    REQUIRE(evr.size() == 2);
    CHECK(evr[0] >= evr[1]);
    CHECK(evr[1] >= 0.0);
    CHECK(evr[0] + evr[1] <= 1.0 + 1e-9);

    // 6 training passes split 3/3 means 3-fold CV over k = 1..6
    CHECK(space.at("cv").at("folds") == 3);
    CHECK(space.at("cv").at("grid").size() == 6);
    CHECK(space.at("cv").at("chosen") == rep.at("model").at("chosen"));

    for (const char* part : {"train", "test"}) {
        const auto& m = rep.at("metrics").at(part);
        const double acc = m.at("accuracy").get<double>();
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
        const auto& cm = m.at("confusion_matrix");
        const int total = cm.at("tp").get<int>() + cm.at("tn").get<int>() +
                          cm.at("fp").get<int>() + cm.at("fn").get<int>();
        CHECK(total == (std::string(part) == "train" ? 6 : 2));
    }

    REQUIRE(run.bundle.has_value());
    REQUIRE(run.boundary.has_value());

    // byte-for-byte reproducible in process
    CHECK(run_experiment(cfg).report == rep);

    // the saved model file reloads into an identical predictor
    const std::string model_file = dir.file("model.txt");
    save_model(*run.bundle, model_file);
    const ModelBundle loaded = load_model(model_file);
    CHECK(loaded.axes == run.bundle->axes);
    CHECK(loaded.method == run.bundle->method);
    REQUIRE(loaded.selectors.size() == 3);
    for (std::size_t a = 0; a < 3; ++a) {
        CHECK(loaded.selectors[a].indices == run.bundle->selectors[a].indices);
    }
    CHECK(loaded.pca.mean == run.bundle->pca.mean);
    CHECK(loaded.pca.components == run.bundle->pca.components);
    CHECK(loaded.knn.has_value());
    CHECK(loaded.knn->k == run.bundle->knn->k);
    for (const Eigen::VectorXd& q : probe_grid(loaded)) {
        CHECK(loaded.predict_score(q) == run.bundle->predict_score(q));
    }

    // decision-boundary export from the live run and from the reloaded bundle
    const std::string grid_file = dir.file("grid.csv");
    write_boundary_csv(*run.boundary, grid_file, 5);
    const std::vector<std::string> lines = file_lines(grid_file);
    REQUIRE(lines.size() == 26);
    CHECK(lines[0] == "pc1,pc2,label");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const char lbl = lines[i].back();
        CHECK((lbl == '0' || lbl == '1'));
    }
    const std::string grid_file2 = dir.file("grid2.csv");
    write_boundary_csv(boundary_from_bundle(loaded), grid_file2, 5);
    CHECK(slurp_file(grid_file2) == slurp_file(grid_file));

    // maintenance-log labeling agrees with the manifest on this dataset
    ExperimentConfig from_log = cfg;
    from_log.manifest_file.clear();
    CHECK(run_experiment(from_log).report.at("metrics") == rep.at("metrics"));

    // direction filter can empty the dataset
    ExperimentConfig filtered = cfg;
    filtered.direction = "outbound";
    CHECK_THROWS_AS(run_experiment(filtered), ValidationError);

    // every indexed pass must appear in the manifest
    ExperimentConfig missing = cfg;
    missing.manifest_file = dir.write("short_manifest.csv",
                                      "pass_id,date,tamping,surfacing\n"
                                      "p0000,2017-01-05,1,1\n");
    CHECK_THROWS_AS(run_experiment(missing), ParseError);
}

TEST_CASE("voting and multilabel runs shape their reports accordingly") {
    testutil::TempDir dir;
    write_dataset(tiny_synth(), dir.path());
    const ExperimentConfig base =
        load_experiment_config((fs::path(dir.path()) / "dataset.cfg").string());

    ExperimentConfig vote = base;
    vote.axes = AxesMode::triaxial_vote;
    const RunOutputs rv = run_experiment(vote);
    CHECK(rv.report.at("model").at("spaces").size() == 3);
    CHECK(rv.report.at("model").at("spaces").at(2).at("axis") == "z");
    CHECK(rv.report.at("model").at("chosen").is_array());
    CHECK_FALSE(rv.bundle.has_value());
    CHECK_FALSE(rv.boundary.has_value());
    const double acc = rv.report.at("metrics").at("test").at("accuracy").get<double>();
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);

    ExperimentConfig ml = base;
    ml.task = Task::multilabel;
    const std::pair<Method, const char*> methods[] = {
        {Method::binary_relevance, "k_tamping="},
        {Method::classifier_chain, "k_first="},
        {Method::label_powerset, "k="},
        {Method::mlknn, "k="},
    };
    for (const auto& [method, prefix] : methods) {
        CAPTURE(to_string(method));
        ml.method = method;
        const RunOutputs r = run_experiment(ml);
        const auto& metrics = r.report.at("metrics").at("test");
        for (const char* key : {"accuracy", "exact_match_ratio", "hamming_loss"}) {
            const double v = metrics.at(key).get<double>();
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(r.report.at("model").at("chosen").get<std::string>().find(prefix) == 0);
        CHECK_FALSE(r.bundle.has_value());
        REQUIRE(r.boundary.has_value());
    }

    // multilabel boundary grids carry combo names
    const RunOutputs last = run_experiment(ml);
    const std::string grid_file = dir.file("combo_grid.csv");
    write_boundary_csv(*last.boundary, grid_file, 4);
    const std::vector<std::string> lines = file_lines(grid_file);
    REQUIRE(lines.size() == 17);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string label = lines[i].substr(lines[i].rfind(',') + 1);
        CHECK((label == "none" || label == "tamping" || label == "surfacing" ||
               label == "both"));
    }
}

TEST_CASE("streamed runs validate their input passes") {
    const SynthConfig scfg = tiny_synth();
    DatasetSimulator sim(scfg);
    LoadedCenterline track;
    track.centerline = sim.track().centerline;
    track.origin = sim.track().origin;

    ExperimentConfig cfg = valid_params();
    cfg.segment_start_m = kSynthLeadM;
    cfg.segment_end_m = kSynthLeadM + scfg.segment_length_m;

    SUBCASE("too few usable passes") {
        std::size_t next = 0;
        const PassSource source = [&]() -> std::optional<PassRecord> {
            if (next >= 4) return std::nullopt;
            const SimulatedPass sp = sim.simulate(next++);
            return PassRecord{sp.pass, sp.labels};
        };
        CHECK_THROWS_WITH_AS(run_experiment_stream(cfg, track, source),
                             doctest::Contains("need at least 5"), ValidationError);
    }
    SUBCASE("a pass missing a required channel is refused") {
        std::size_t next = 0;
        const PassSource source = [&]() -> std::optional<PassRecord> {
            if (next >= sim.size()) return std::nullopt;
            SimulatedPass sp = sim.simulate(next++);
            sp.pass.channels.erase(Axis::y);
            return PassRecord{sp.pass, sp.labels};
        };
        CHECK_THROWS_WITH_AS(run_experiment_stream(cfg, track, source),
                             doctest::Contains("has no ay channel"), ValidationError);
    }
}

TEST_CASE("boundary grids honor the margin and reject bad setups") {
    testutil::TempDir dir;
    BoundaryModel bm;
    bm.score_min = Eigen::Vector2d(0.0, 0.0);
    bm.score_max = Eigen::Vector2d(1.0, 2.0);
    bm.label_at = [](const Eigen::Vector2d& p) {
        return p.x() + p.y() > 1.0 ? "1" : "0";
    };

    const std::string file = dir.file("bm.csv");
    write_boundary_csv(bm, file, 3);
    const std::vector<std::string> lines = file_lines(file);
    REQUIRE(lines.size() == 10);
    CHECK(lines[0] == "pc1,pc2,label");
    // 10% margin per side: pc1 spans [-0.1, 1.1], pc2 spans [-0.2, 2.2]
    CHECK(lines[1] == "-0.1,-0.2,0");
    CHECK(lines[9] == "1.1,2.2,1");
    // middle row: pc1 near 0.5, pc2 back at the low edge
    CHECK(lines[4].substr(lines[4].find(',')) == ",-0.2,0");
    CHECK(lines[3] == "-0.1,2.2,1");

    SUBCASE("a degenerate score box widens to a unit window") {
        BoundaryModel flat = bm;
        flat.score_min = Eigen::Vector2d(3.0, 4.0);
        flat.score_max = flat.score_min;
        const std::string f2 = dir.file("flat.csv");
        write_boundary_csv(flat, f2, 2);
        const std::vector<std::string> l2 = file_lines(f2);
        REQUIRE(l2.size() == 5);
        CHECK(l2[1].substr(0, 8) == "2.5,3.5,");
        CHECK(l2[4].substr(0, 8) == "3.5,4.5,");
    }
    SUBCASE("invalid grids throw") {
        CHECK_THROWS_AS(write_boundary_csv(bm, dir.file("x.csv"), 1), ValidationError);
        BoundaryModel hollow;
        hollow.score_max = Eigen::Vector2d(1.0, 1.0);
        CHECK_THROWS_AS(write_boundary_csv(hollow, dir.file("y.csv"), 3),
                        ValidationError);
    }
}

TEST_CASE("model files round trip each classifier exactly") {
    testutil::TempDir dir;
    const ScoredFixture fx = scored_fixture();

    SUBCASE("nearest neighbors") {
        ModelBundle b = base_bundle(fx, Method::knn);
        b.knn = make_knn(3, fx.scores, fx.y);
        const std::string file = dir.file("knn.txt");
        save_model(b, file);
        const ModelBundle r = load_model(file);
        CHECK(r.axes == AxesMode::z_only);
        CHECK(r.method == Method::knn);
        CHECK(r.selectors.at(0).indices == fx.selector.indices);
        CHECK(r.pca.mean == b.pca.mean);
        CHECK(r.pca.components == b.pca.components);
        CHECK(r.pca.eigenvalues == b.pca.eigenvalues);
        CHECK(r.score_min == b.score_min);
        CHECK(r.score_max == b.score_max);
        REQUIRE(r.knn.has_value());
        CHECK(r.knn->k == 3);
        CHECK(r.knn->x == b.knn->x);
        CHECK(r.knn->y == b.knn->y);
        for (const Eigen::VectorXd& q : probe_grid(b)) {
            CHECK(r.predict_score(q) == b.predict_score(q));
        }
    }
    SUBCASE("logistic regression") {
        ModelBundle b = base_bundle(fx, Method::logreg);
        b.logreg = logreg_fit(fx.scores, fx.y, 1.0);
        const std::string file = dir.file("lr.txt");
        save_model(b, file);
        const ModelBundle r = load_model(file);
        REQUIRE(r.logreg.has_value());
        CHECK(r.logreg->w == b.logreg->w);
        CHECK(r.logreg->b == b.logreg->b);
        CHECK(r.logreg->c == b.logreg->c);
        for (const Eigen::VectorXd& q : probe_grid(b)) {
            CHECK(r.predict_score(q) == b.predict_score(q));
        }
    }
    SUBCASE("support vector machine") {
        ModelBundle b = base_bundle(fx, Method::svm);
        b.svm = svm_fit(fx.scores, fx.y, 5.0, 0.7);
        const std::string file = dir.file("svm.txt");
        save_model(b, file);
        const ModelBundle r = load_model(file);
        REQUIRE(r.svm.has_value());
        CHECK(r.svm->support_vectors == b.svm->support_vectors);
        CHECK(r.svm->coeffs == b.svm->coeffs);
        CHECK(r.svm->b == b.svm->b);
        CHECK(r.svm->gamma == b.svm->gamma);
        CHECK(r.svm->c == b.svm->c);
        for (const Eigen::VectorXd& q : probe_grid(b)) {
            CHECK(r.predict_score(q) == b.predict_score(q));
        }
    }
    SUBCASE("unserializable bundles are refused") {
        ModelBundle b = base_bundle(fx, Method::knn);
        b.knn = make_knn(1, fx.scores, fx.y);
        b.axes = AxesMode::triaxial_vote;
        CHECK_THROWS_AS(save_model(b, dir.file("v.txt")), ValidationError);

        b = base_bundle(fx, Method::binary_relevance);
        CHECK_THROWS_AS(save_model(b, dir.file("m.txt")), ValidationError);

        b = base_bundle(fx, Method::knn);
        b.knn = make_knn(1, fx.scores, fx.y);
        b.selectors.push_back(fx.selector);  // one too many for z-only
        CHECK_THROWS_AS(save_model(b, dir.file("s.txt")), ValidationError);
    }
    SUBCASE("corrupt model files are rejected") {
        CHECK_THROWS_AS(load_model(dir.write("junk.txt", "hello world\n")), ParseError);
        CHECK_THROWS_AS(load_model(dir.write("ver.txt", "railvib-model 2\n")), ParseError);
        CHECK_THROWS_AS(load_model(dir.file("missing.txt")), ParseError);

        ModelBundle b = base_bundle(fx, Method::knn);
        b.knn = make_knn(3, fx.scores, fx.y);
        const std::string good = dir.file("good.txt");
        save_model(b, good);
        const std::string text = slurp_file(good);

        const auto cut = text.rfind("sample");
        CHECK_THROWS_AS(load_model(dir.write("trunc.txt", text.substr(0, cut))),
                        ParseError);
        CHECK_THROWS_AS(load_model(dir.write("trail.txt", text + "extra\n")), ParseError);
    }
}

}  // TEST_SUITE
