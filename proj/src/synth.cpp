#include "railvib/synth.hpp"

#include <cmath>
#include <filesystem>

#include "railvib/detail/csv.hpp"
#include "railvib/rng.hpp"

namespace railvib {

namespace {

constexpr double kProfileDs = 0.05;
constexpr double kNatFreqHz = 5.0;
constexpr double kDampingRatio = 0.3;
constexpr double kGravityMps2 = 9.80665;
constexpr double kKnotSpacingS = 5.0;  // speed profile knot interval
constexpr int kLabelHorizonDays = 60;

// RNG stream layout: dataset-level streams below 0x100, per-pass streams at
// 0x100 + 8 * index + purpose. Strict segregation keeps every pass (and every
// purpose within a pass) independent of what else was generated.
constexpr std::uint64_t kStreamTrackBase = 1;
constexpr std::uint64_t kStreamTampingLayout = 2;
constexpr std::uint64_t kStreamSurfacingLayout = 3;
constexpr std::uint64_t kStreamPassBase = 0x100;
constexpr std::uint64_t kPurposeRoughness = 0;
constexpr std::uint64_t kPurposeKinematics = 1;
constexpr std::uint64_t kPurposeAccelNoise = 2;
constexpr std::uint64_t kPurposeGps = 3;

Rng pass_stream(const SynthConfig& cfg, std::uint64_t index, std::uint64_t purpose) {
    return Rng(mix_seed(cfg.seed, kStreamPassBase + 8 * index + purpose));
}

// Adds a sum of n_comp sinusoids with wavelengths drawn from [lo, hi] and an
// overall RMS of about `rms`. Wavelengths stay short enough that the axle
// response is nearly speed-invariant over the operating range.
void add_sine_band(Eigen::ArrayXd& out, double s0, double ds, int n_comp,
                   double lambda_lo, double lambda_hi, double rms, Rng& rng) {
    const double per_amp = rms * std::sqrt(2.0 / static_cast<double>(n_comp));
    const Eigen::Index n = out.size();
    for (int c = 0; c < n_comp; ++c) {
        const double lambda = rng.uniform(lambda_lo, lambda_hi);
        const double kw = 2.0 * M_PI / lambda;
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        for (Eigen::Index i = 0; i < n; ++i) {
            out[i] += per_amp * std::sin(kw * (s0 + ds * static_cast<double>(i)) + phase);
        }
    }
}

}  // namespace

void validate_config(const SynthConfig& cfg) {
    const ClassCounts& c = cfg.counts;
    if (c.none < 0 || c.tamping < 0 || c.surfacing < 0 || c.both < 0) {
        throw ValidationError("class counts must be non-negative");
    }
    if (c.total() < 1) throw ValidationError("at least one pass required");
    if (c.tamping > kLabelHorizonDays || c.surfacing > kLabelHorizonDays ||
        c.both > kLabelHorizonDays) {
        throw ValidationError("labeled class counts above 60 cannot fit one "
                              "maintenance window at one pass per day");
    }
    if (cfg.segment_length_m < 50.0) {
        throw ValidationError("segment must be at least 50 m");
    }
    if (cfg.signature_region_m < 50.0 || cfg.signature_region_m > cfg.segment_length_m) {
        throw ValidationError("signature region must be in [50, segment length]");
    }
    if (!(cfg.speed_min_mps > 0.0) || cfg.speed_max_mps < cfg.speed_min_mps) {
        throw ValidationError("speed range must satisfy 0 < min <= max");
    }
    if (cfg.gps_sigma_m < 0.0 || cfg.gps_bias_max_m < 0.0) {
        throw ValidationError("GPS noise parameters must be non-negative");
    }
    if (cfg.snr < 0.0) throw ValidationError("snr must be non-negative");
    if (!(cfg.roughness_amp_m > 0.0)) throw ValidationError("roughness amplitude must be positive");
    if (cfg.accel_noise_g < 0.0) throw ValidationError("sensor noise must be non-negative");
    if (!(cfg.sample_rate_hz > 0.0) || !(cfg.gps_rate_hz > 0.0)) {
        throw ValidationError("rates must be positive");
    }
    if (cfg.sample_rate_hz < cfg.gps_rate_hz) {
        throw ValidationError("sample rate must be at least the GPS rate");
    }
    if (cfg.n_corrupt < 0 || cfg.n_corrupt > c.total()) {
        throw ValidationError("n_corrupt must be in [0, total passes]");
    }
    if (!cfg.start_date.ok()) throw ValidationError("invalid start date");
}

double TrackProfile::value_at(Axis axis, double s) const {
    const Eigen::ArrayXd& arr = axis == Axis::x ? x : (axis == Axis::y ? y : z);
    const double pos = (s - s0) / ds;
    const auto n = arr.size();
    if (pos <= 0.0) return arr[0];
    if (pos >= static_cast<double>(n - 1)) return arr[n - 1];
    const auto i = static_cast<Eigen::Index>(pos);
    const double u = pos - static_cast<double>(i);
    return arr[i] + u * (arr[i + 1] - arr[i]);
}

ProfileGenerator::ProfileGenerator(const SynthConfig& cfg) : cfg_(cfg) {
    validate_config(cfg);
    length_m_ = cfg.segment_length_m + 2.0 * kSynthLeadM;
    const auto n = static_cast<Eigen::Index>(std::llround(length_m_ / kProfileDs)) + 1;
    const double amp = cfg.roughness_amp_m;

    base_x_ = Eigen::ArrayXd::Zero(n);
    base_y_ = Eigen::ArrayXd::Zero(n);
    base_z_ = Eigen::ArrayXd::Zero(n);
    Rng rng_base(mix_seed(cfg.seed, kStreamTrackBase));
    add_sine_band(base_x_, 0.0, kProfileDs, 24, 0.30, 0.50, amp * 0.5, rng_base);
    add_sine_band(base_y_, 0.0, kProfileDs, 24, 0.30, 0.50, amp * 0.7, rng_base);
    add_sine_band(base_z_, 0.0, kProfileDs, 24, 0.30, 0.50, amp * 1.0, rng_base);

    // tamping: localized patches of elevated short-wavelength roughness on the
    // vertical and transverse axes, fixed locations per dataset
    tamp_y_ = Eigen::ArrayXd::Zero(n);
    tamp_z_ = Eigen::ArrayXd::Zero(n);
    Rng rng_t(mix_seed(cfg.seed, kStreamTampingLayout));
    Eigen::ArrayXd mask = Eigen::ArrayXd::Zero(n);
    const double sig_lo = kSynthLeadM;
    const double sig_hi = kSynthLeadM + cfg.signature_region_m;
    constexpr int kPatches = 4;
    for (int p = 0; p < kPatches; ++p) {
        const double center = rng_t.uniform(sig_lo + 10.0, sig_hi - 10.0);
        const double half_width = rng_t.uniform(6.0, 12.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = kProfileDs * static_cast<double>(i);
            const double d = std::abs(s - center) / half_width;
            if (d < 1.0) mask[i] += 0.5 * (1.0 + std::cos(M_PI * d));
        }
    }
    mask = mask.min(1.2);
    Eigen::ArrayXd carrier_z = Eigen::ArrayXd::Zero(n);
    Eigen::ArrayXd carrier_y = Eigen::ArrayXd::Zero(n);
    add_sine_band(carrier_z, 0.0, kProfileDs, 18, 0.28, 0.45, 1.0, rng_t);
    add_sine_band(carrier_y, 0.0, kProfileDs, 18, 0.28, 0.45, 1.0, rng_t);
    tamp_z_ = cfg.snr * amp * 1.0 * mask * carrier_z;
    tamp_y_ = cfg.snr * amp * 1.2 * mask * carrier_y;

    // surfacing: a long-wavelength dome envelope over the signature region
    // modulating short-wavelength vertical content, plus a literal long-
    // wavelength elevation component (negligible axle response by itself)
    surf_z_ = Eigen::ArrayXd::Zero(n);
    Rng rng_s(mix_seed(cfg.seed, kStreamSurfacingLayout));
    Eigen::ArrayXd carrier_s = Eigen::ArrayXd::Zero(n);
    add_sine_band(carrier_s, 0.0, kProfileDs, 18, 0.35, 0.55, 1.0, rng_s);
    const double phase_long = rng_s.uniform(0.0, 2.0 * M_PI);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = kProfileDs * static_cast<double>(i);
        double envelope = 0.0;
        if (s >= sig_lo && s <= sig_hi) {
            envelope = std::sin(M_PI * (s - sig_lo) / cfg.signature_region_m);
        }
        surf_z_[i] = cfg.snr * amp * envelope *
                     (0.8 * carrier_s[i] + 2.0 * std::sin(2.0 * M_PI * s / 80.0 + phase_long));
    }
}

TrackProfile ProfileGenerator::generate(LabelVector labels, std::uint64_t pass_index) const {
    TrackProfile profile;
    profile.s0 = 0.0;
    profile.ds = kProfileDs;
    profile.labels = labels;
    profile.x = base_x_;
    profile.y = base_y_;
    profile.z = base_z_;

    // pass-specific roughness, independent of labels
    Rng rng(pass_stream(cfg_, pass_index, kPurposeRoughness));
    const double amp = cfg_.roughness_amp_m * 0.35;
    add_sine_band(profile.x, 0.0, kProfileDs, 14, 0.30, 0.50, amp * 0.5, rng);
    add_sine_band(profile.y, 0.0, kProfileDs, 14, 0.30, 0.50, amp * 0.7, rng);
    add_sine_band(profile.z, 0.0, kProfileDs, 14, 0.30, 0.50, amp * 1.0, rng);

    if (labels.tamping) {
        profile.z += tamp_z_;
        profile.y += tamp_y_;
    }
    if (labels.surfacing) {
        profile.z += surf_z_;
    }
    return profile;
}

TrackProfile generate_profile(const SynthConfig& cfg, LabelVector labels,
                              std::uint64_t pass_index) {
    return ProfileGenerator(cfg).generate(labels, pass_index);
}

SynthTrack make_synth_track(const SynthConfig& cfg) {
    validate_config(cfg);
    const double length = cfg.segment_length_m + 2.0 * kSynthLeadM;
    constexpr double kStep = 2.0;
    std::vector<PlanarPoint> vertices;
    PlanarPoint pos(0.0, 0.0);
    vertices.push_back(pos);
    for (double s = 0.0; s < length; s += kStep) {
        const double step = std::min(kStep, length - s);
        const double mid = s + 0.5 * step;
        const double heading = 0.45 * std::sin(mid / 140.0);
        pos += step * PlanarPoint(std::cos(heading), std::sin(heading));
        vertices.push_back(pos);
    }
    SynthTrack track;
    track.origin = GeoOrigin{40.0, -105.0};
    track.centerline = make_centerline(std::move(vertices));
    return track;
}

std::vector<PassPlan> dataset_plan(const SynthConfig& cfg) {
    validate_config(cfg);
    std::vector<PassPlan> plan;
    plan.reserve(static_cast<std::size_t>(cfg.counts.total()));

    const std::pair<LabelVector, int> phases[] = {
        {LabelVector{true, true}, cfg.counts.both},
        {LabelVector{true, false}, cfg.counts.tamping},
        {LabelVector{false, true}, cfg.counts.surfacing},
        {LabelVector{false, false}, cfg.counts.none},
    };
    // one pass per day inside a phase; the next phase starts a full horizon
    // later so maintenance windows cannot leak across phases
    int day = 0;
    for (const auto& [labels, count] : phases) {
        for (int i = 0; i < count; ++i) {
            PassPlan p;
            p.labels = labels;
            p.date = add_days(cfg.start_date, day + i);
            plan.push_back(p);
        }
        day += count + kLabelHorizonDays + 1;
    }

    const int total = cfg.counts.total();
    for (int j = 0; j < cfg.n_corrupt; ++j) {
        plan[static_cast<std::size_t>(j * total / cfg.n_corrupt)].corrupt_gps = true;
    }
    return plan;
}

std::vector<MaintenanceRecord> dataset_maintenance(const SynthConfig& cfg) {
    validate_config(cfg);
    const ChainageInterval segment{kSynthLeadM, kSynthLeadM + cfg.signature_region_m};
    std::vector<MaintenanceRecord> records;

    const std::tuple<bool, bool, int> phases[] = {
        {true, true, cfg.counts.both},
        {true, false, cfg.counts.tamping},
        {false, true, cfg.counts.surfacing},
        {false, false, cfg.counts.none},
    };
    int day = 0;
    for (const auto& [tamping, surfacing, count] : phases) {
        if (count > 0) {
            const Date event = add_days(cfg.start_date, day + count);
            if (tamping) {
                records.push_back({WorkType::tamping, event, Direction::inbound, segment});
            }
            if (surfacing) {
                records.push_back({WorkType::surfacing, event, Direction::inbound, segment});
            }
        }
        day += count + kLabelHorizonDays + 1;
    }
    return records;
}

SimulatedPass simulate_pass(const TrackProfile& profile, const SynthTrack& track,
                            const SynthConfig& cfg, std::uint64_t pass_index,
                            const PassPlan& plan) {
    const double dt = 1.0 / cfg.sample_rate_hz;
    const double s_start = 1.0;
    const double s_stop = track.centerline.length() - 1.0;

    // kinematics: piecewise-linear speed between knots drawn around a per-pass
    // mean; degenerate speed ranges yield a constant speed
    Rng kin = pass_stream(cfg, pass_index, kPurposeKinematics);
    const double v_mean = kin.uniform(cfg.speed_min_mps, cfg.speed_max_mps);
    const double wiggle = 0.25 * (cfg.speed_max_mps - cfg.speed_min_mps);
    std::vector<double> knots;
    auto speed_at = [&](double t) {
        const auto k = static_cast<std::size_t>(t / kKnotSpacingS);
        while (knots.size() <= k + 1) {
            knots.push_back(std::clamp(v_mean + kin.uniform(-wiggle, wiggle),
                                       cfg.speed_min_mps, cfg.speed_max_mps));
        }
        const double u = t / kKnotSpacingS - static_cast<double>(k);
        return knots[k] + u * (knots[k + 1] - knots[k]);
    };

    std::vector<double> chainage;
    double s = s_start;
    std::size_t n = 0;
    while (s < s_stop) {
        chainage.push_back(s);
        const double t = static_cast<double>(n) * dt;
        s += dt * 0.5 * (speed_at(t) + speed_at(t + dt));
        ++n;
    }
    if (chainage.size() < 2) throw ValidationError("track too short to simulate");

    SimulatedPass out;
    out.labels = plan.labels;
    out.gps_corrupted = plan.corrupt_gps;
    out.true_chainage = chainage;
    out.pass.pass_id = [&] {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "p%04llu", static_cast<unsigned long long>(pass_index));
        return std::string(buf);
    }();
    out.pass.date = plan.date;
    out.pass.direction = Direction::inbound;

    std::vector<double> times(chainage.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i) * dt;

    // axle response per axis: u'' = -2 zeta w u' - w^2 (u - r(s(t))), sampled
    // as measured acceleration in g; RK4 at the sample rate
    const double omega = 2.0 * M_PI * kNatFreqHz;
    const double two_zw = 2.0 * kDampingRatio * omega;
    const double w2 = omega * omega;
    Rng noise = pass_stream(cfg, pass_index, kPurposeAccelNoise);
    for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
        AccelChannel ch;
        ch.axis = axis;
        ch.sample_rate_hz = cfg.sample_rate_hz;
        ch.t = times;
        ch.value.resize(chainage.size());

        double u = profile.value_at(axis, chainage[0]);
        double vel = 0.0;
        for (std::size_t i = 0; i < chainage.size(); ++i) {
            const double r0 = profile.value_at(axis, chainage[i]);
            const double accel = -two_zw * vel - w2 * (u - r0);
            ch.value[i] = accel / kGravityMps2 + cfg.accel_noise_g * noise.normal();
            if (i + 1 == chainage.size()) break;

            const double r_mid =
                profile.value_at(axis, 0.5 * (chainage[i] + chainage[i + 1]));
            const double r1 = profile.value_at(axis, chainage[i + 1]);
            const auto f = [&](double uu, double vv, double rr, double& du, double& dv) {
                du = vv;
                dv = -two_zw * vv - w2 * (uu - rr);
            };
            double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
            f(u, vel, r0, k1u, k1v);
            f(u + 0.5 * dt * k1u, vel + 0.5 * dt * k1v, r_mid, k2u, k2v);
            f(u + 0.5 * dt * k2u, vel + 0.5 * dt * k2v, r_mid, k3u, k3v);
            f(u + dt * k3u, vel + dt * k3v, r1, k4u, k4v);
            u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            vel += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        out.pass.channels.emplace(axis, std::move(ch));
    }

    // GPS: truth plus a per-pass constant bias and per-fix jitter; corrupted
    // passes add a gross offset and a random walk (not rigidly recoverable)
    Rng gps = pass_stream(cfg, pass_index, kPurposeGps);
    const double bias_angle = gps.uniform(0.0, 2.0 * M_PI);
    const double bias_mag = gps.uniform(0.0, cfg.gps_bias_max_m);
    const PlanarPoint bias(bias_mag * std::cos(bias_angle), bias_mag * std::sin(bias_angle));
    PlanarPoint gross = PlanarPoint::Zero();
    PlanarPoint walk = PlanarPoint::Zero();
    if (plan.corrupt_gps) {
        const double a = gps.uniform(0.0, 2.0 * M_PI);
        gross = 300.0 * PlanarPoint(std::cos(a), std::sin(a));
    }

    const auto per_fix =
        static_cast<std::size_t>(std::llround(cfg.sample_rate_hz / cfg.gps_rate_hz));
    for (std::size_t i = 0; i < chainage.size(); i += std::max<std::size_t>(1, per_fix)) {
        PlanarPoint p = point_at_chainage(track.centerline, chainage[i]) + bias;
        p.x() += cfg.gps_sigma_m * gps.normal();
        p.y() += cfg.gps_sigma_m * gps.normal();
        if (plan.corrupt_gps) {
            walk.x() += 15.0 * gps.normal();
            walk.y() += 15.0 * gps.normal();
            p += gross + walk;
        }
        GpsFix fix;
        fix.t = times[i];
        plane_to_geo(p, track.origin, fix.lat, fix.lon);
        out.pass.gps.push_back(fix);
    }

    validate_pass(out.pass);
    return out;
}

DatasetSimulator::DatasetSimulator(const SynthConfig& cfg)
    : cfg_(cfg), track_(make_synth_track(cfg)), generator_(cfg), plan_(dataset_plan(cfg)) {}

SimulatedPass DatasetSimulator::simulate(std::size_t index) const {
    if (index >= plan_.size()) throw ValidationError("pass index out of range");
    const TrackProfile profile = generator_.generate(plan_[index].labels, index);
    return simulate_pass(profile, track_, cfg_, index, plan_[index]);
}

void write_pass(const RawPass& pass, const std::string& accel_file,
                const std::string& gps_file) {
    validate_pass(pass);

    std::string buf = "t";
    for (const auto& [axis, ch] : pass.channels) {
        buf += ",a";
        buf += to_string(axis);
    }
    buf += '\n';
    const auto& base = pass.channels.begin()->second;
    buf.reserve(buf.size() + base.t.size() * 20 * (pass.channels.size() + 1));
    for (std::size_t i = 0; i < base.t.size(); ++i) {
        buf += detail::format_double(base.t[i]);
        for (const auto& [axis, ch] : pass.channels) {
            buf += ',';
            buf += detail::format_double(ch.value[i]);
        }
        buf += '\n';
    }
    detail::write_file(accel_file, buf);

    std::string gbuf = "t,lat,lon\n";
    for (const GpsFix& f : pass.gps) {
        gbuf += detail::format_double(f.t);
        gbuf += ',';
        gbuf += detail::format_double(f.lat);
        gbuf += ',';
        gbuf += detail::format_double(f.lon);
        gbuf += '\n';
    }
    detail::write_file(gps_file, gbuf);
}

void write_dataset(const SynthConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "passes", ec);
    if (ec) throw IoError(out_dir + ": cannot create output directory");

    DatasetSimulator sim(cfg);

    std::string cbuf = "lat,lon\n";
    for (const PlanarPoint& v : sim.track().centerline.vertices) {
        double lat, lon;
        plane_to_geo(v, sim.track().origin, lat, lon);
        cbuf += detail::format_double(lat);
        cbuf += ',';
        cbuf += detail::format_double(lon);
        cbuf += '\n';
    }
    detail::write_file((fs::path(out_dir) / "centerline.csv").string(), cbuf);

    std::string index = "pass_id,date,direction,accel_file,gps_file\n";
    std::string manifest = "pass_id,date,tamping,surfacing\n";
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const SimulatedPass sp = sim.simulate(i);
        const std::string accel_rel = "passes/" + sp.pass.pass_id + "_accel.csv";
        const std::string gps_rel = "passes/" + sp.pass.pass_id + "_gps.csv";
        write_pass(sp.pass, (fs::path(out_dir) / accel_rel).string(),
                   (fs::path(out_dir) / gps_rel).string());
        index += sp.pass.pass_id + ',' + format_date(sp.pass.date) + ',' +
                 to_string(sp.pass.direction) + ',' + accel_rel + ',' + gps_rel + '\n';
        manifest += sp.pass.pass_id + ',' + format_date(sp.pass.date) + ',' +
                    (sp.labels.tamping ? "1" : "0") + ',' +
                    (sp.labels.surfacing ? "1" : "0") + '\n';
    }
    detail::write_file((fs::path(out_dir) / "passes.csv").string(), index);
    detail::write_file((fs::path(out_dir) / "manifest.csv").string(), manifest);

    std::string mbuf = "date,work_type,track,start_m,end_m\n";
    for (const MaintenanceRecord& rec : dataset_maintenance(cfg)) {
        mbuf += format_date(rec.date);
        mbuf += ',';
        mbuf += to_string(rec.work_type);
        mbuf += ',';
        mbuf += to_string(rec.track);
        mbuf += ',';
        mbuf += detail::format_double(rec.segment.start_m);
        mbuf += ',';
        mbuf += detail::format_double(rec.segment.end_m);
        mbuf += '\n';
    }
    detail::write_file((fs::path(out_dir) / "maintenance.csv").string(), mbuf);

    std::string cfgbuf;
    cfgbuf += "# synthetic vibration dataset (seed " + std::to_string(cfg.seed) +
              ", snr " + detail::format_double(cfg.snr) + ")\n";
    cfgbuf += "passes = passes.csv\n";
    cfgbuf += "centerline = centerline.csv\n";
    cfgbuf += "manifest = manifest.csv\n";
    cfgbuf += "maintenance = maintenance.csv\n";
    cfgbuf += "segment_start = " + detail::format_double(kSynthLeadM) + "\n";
    cfgbuf += "segment_end = " +
              detail::format_double(kSynthLeadM + cfg.segment_length_m) + "\n";
    detail::write_file((fs::path(out_dir) / "dataset.cfg").string(), cfgbuf);
}

}  // namespace railvib
