#include "railvib/spatial.hpp"

#include <cmath>

namespace railvib {

ChainagePosition chainage_project(const PlanarPoint& p, const TrackCenterline& cl) {
    const PolylineProjection proj = project_to_polyline(p, cl);
    const PlanarPoint& a = cl.vertices[proj.segment];
    const PlanarPoint& b = cl.vertices[proj.segment + 1];
    const PlanarPoint u = (b - a).normalized();
    const PlanarPoint n(-u.y(), u.x());  // left of travel
    ChainagePosition out;
    out.s = proj.chainage;
    out.lateral = n.dot(p - proj.point);
    return out;
}

InterpolatedPositions interpolate_positions(std::span<const double> fix_times,
                                            std::span<const PlanarPoint> fix_points,
                                            std::span<const double> sample_times,
                                            const TrackCenterline& cl) {
    if (fix_times.size() != fix_points.size()) {
        throw ValidationError("fix time/point count mismatch");
    }
    if (fix_times.size() < 2) {
        throw ValidationError("position interpolation needs at least two fixes");
    }
    for (std::size_t i = 1; i < fix_times.size(); ++i) {
        if (fix_times[i] <= fix_times[i - 1]) {
            throw ValidationError("fix times not strictly increasing");
        }
    }

    InterpolatedPositions out;
    const double t0 = fix_times.front();
    const double t1 = fix_times.back();
    std::size_t i = 0;
    while (i < sample_times.size() && sample_times[i] < t0) ++i;
    out.first_sample = i;

    std::size_t seg = 0;  // sample times are non-decreasing, so walk forward
    for (; i < sample_times.size() && sample_times[i] <= t1; ++i) {
        const double t = sample_times[i];
        while (seg + 2 < fix_times.size() && fix_times[seg + 1] < t) ++seg;
        const double u = (t - fix_times[seg]) / (fix_times[seg + 1] - fix_times[seg]);
        const PlanarPoint p = fix_points[seg] + u * (fix_points[seg + 1] - fix_points[seg]);
        out.positions.push_back(chainage_project(p, cl));
    }
    return out;
}

SpatialSignal spatial_resample(std::span<const double> accel,
                               const InterpolatedPositions& positions,
                               const ChainageInterval& segment, double ds) {
    if (ds <= 0.0) throw ValidationError("cell size must be positive");
    if (!(segment.start_m < segment.end_m)) {
        throw ValidationError("segment start must be less than segment end");
    }
    const auto n = static_cast<Eigen::Index>(
        std::llround((segment.end_m - segment.start_m) / ds));
    if (n < 1) throw ValidationError("segment shorter than one cell");

    Eigen::VectorXd sums = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < positions.positions.size(); ++i) {
        const double s = positions.positions[i].s;
        if (s < segment.start_m) continue;
        const auto cell = static_cast<Eigen::Index>((s - segment.start_m) / ds);
        if (cell < 0 || cell >= n) continue;
        const double a = accel[positions.first_sample + i];
        sums[cell] += a * a;
        counts[cell] += 1.0;
    }

    if (counts.sum() == 0.0) {
        throw ValidationError("pass does not cover the segment");
    }

    SpatialSignal out;
    out.s0 = segment.start_m;
    out.ds = ds;
    out.values.resize(n);

    Eigen::Index prev = -1;  // fill gaps between populated cells linearly
    for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[i] == 0.0) continue;
        const double v = sums[i] / counts[i];
        out.values[i] = v;
        if (prev < 0) {
            for (Eigen::Index j = 0; j < i; ++j) out.values[j] = v;
        } else {
            const double v0 = out.values[prev];
            for (Eigen::Index j = prev + 1; j < i; ++j) {
                const double u = static_cast<double>(j - prev) / static_cast<double>(i - prev);
                out.values[j] = v0 + u * (v - v0);
            }
        }
        prev = i;
    }
    for (Eigen::Index j = prev + 1; j < n; ++j) out.values[j] = out.values[prev];
    return out;
}

SpatialSignal moving_window_average(const SpatialSignal& in, double window_m) {
    if (in.values.size() == 0) throw ValidationError("empty signal");
    if (window_m < in.ds) throw ValidationError("window shorter than one cell");

    auto w = static_cast<Eigen::Index>(std::llround(window_m / in.ds));
    if (w % 2 == 0) ++w;
    const Eigen::Index h = w / 2;
    const Eigen::Index n = in.values.size();

    Eigen::VectorXd prefix(n + 1);
    prefix[0] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + in.values[i];

    SpatialSignal out;
    out.s0 = in.s0;
    out.ds = in.ds;
    out.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - h);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + h);
        out.values[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

}  // namespace railvib
