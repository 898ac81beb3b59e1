#include "railvib/geo_align.hpp"

#include <cmath>

#include "railvib/detail/csv.hpp"

namespace railvib {

namespace {
constexpr double kDeg2Rad = M_PI / 180.0;
constexpr double kMaxOriginLat = 89.0;
}  // namespace

PlanarPoint geo_to_plane(double lat, double lon, const GeoOrigin& origin) {
    if (std::abs(origin.lat) > kMaxOriginLat) {
        throw ValidationError("projection origin too close to a pole");
    }
    const double x = kEarthRadiusM * std::cos(origin.lat * kDeg2Rad) *
                     (lon - origin.lon) * kDeg2Rad;
    const double y = kEarthRadiusM * (lat - origin.lat) * kDeg2Rad;
    return PlanarPoint(x, y);
}

void plane_to_geo(const PlanarPoint& p, const GeoOrigin& origin, double& lat, double& lon) {
    if (std::abs(origin.lat) > kMaxOriginLat) {
        throw ValidationError("projection origin too close to a pole");
    }
    lat = origin.lat + p.y() / kEarthRadiusM / kDeg2Rad;
    lon = origin.lon + p.x() / (kEarthRadiusM * std::cos(origin.lat * kDeg2Rad)) / kDeg2Rad;
}

std::vector<PlanarPoint> project_to_plane(const std::vector<GpsFix>& fixes,
                                          const GeoOrigin& origin) {
    std::vector<PlanarPoint> out;
    out.reserve(fixes.size());
    for (const GpsFix& f : fixes) out.push_back(geo_to_plane(f.lat, f.lon, origin));
    return out;
}

TrackCenterline make_centerline(std::vector<PlanarPoint> vertices) {
    if (vertices.size() < 2) {
        throw ValidationError("centerline needs at least two vertices");
    }
    TrackCenterline cl;
    cl.chainage.resize(vertices.size());
    cl.chainage[0] = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i) {
        const double d = (vertices[i] - vertices[i - 1]).norm();
        if (d <= 0.0) {
            throw ValidationError("centerline has a zero-length segment at vertex " +
                                  std::to_string(i));
        }
        cl.chainage[i] = cl.chainage[i - 1] + d;
    }
    cl.vertices = std::move(vertices);
    return cl;
}

LoadedCenterline load_centerline(const std::string& file) {
    detail::CsvReader csv(file, {"lat", "lon"});
    std::vector<std::string_view> fields;
    std::vector<double> lats, lons;
    while (csv.next(fields)) {
        lats.push_back(csv.number(fields[0], "lat"));
        lons.push_back(csv.number(fields[1], "lon"));
    }
    if (lats.size() < 2) {
        throw ValidationError(file + ": centerline needs at least two vertices");
    }
    LoadedCenterline out;
    double lat_sum = 0.0, lon_sum = 0.0;
    for (std::size_t i = 0; i < lats.size(); ++i) {
        lat_sum += lats[i];
        lon_sum += lons[i];
    }
    out.origin.lat = lat_sum / static_cast<double>(lats.size());
    out.origin.lon = lon_sum / static_cast<double>(lons.size());
    std::vector<PlanarPoint> vertices;
    vertices.reserve(lats.size());
    for (std::size_t i = 0; i < lats.size(); ++i) {
        vertices.push_back(geo_to_plane(lats[i], lons[i], out.origin));
    }
    out.centerline = make_centerline(std::move(vertices));
    return out;
}

Eigen::Matrix2d RigidTransform2D::rotation() const {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

PlanarPoint RigidTransform2D::apply(const PlanarPoint& p) const {
    return rotation() * p + t;
}

RigidTransform2D compose(const RigidTransform2D& outer, const RigidTransform2D& inner) {
    RigidTransform2D out;
    out.theta = outer.theta + inner.theta;
    out.t = outer.rotation() * inner.t + outer.t;
    return out;
}

RigidTransform2D best_rigid_transform(const std::vector<PlanarPoint>& src,
                                      const std::vector<PlanarPoint>& dst) {
    if (src.size() != dst.size()) {
        throw ValidationError("rigid fit needs equal point counts");
    }
    const std::size_t n = src.size();
    if (n < 2) throw ValidationError("rigid fit needs at least two points");

    PlanarPoint cs = PlanarPoint::Zero(), cd = PlanarPoint::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        cs += src[i];
        cd += dst[i];
    }
    cs /= static_cast<double>(n);
    cd /= static_cast<double>(n);

    // cross-covariance H = sum (src - cs)(dst - cd)^T
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    double spread_s = 0.0, spread_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const PlanarPoint a = src[i] - cs;
        const PlanarPoint b = dst[i] - cd;
        h += a * b.transpose();
        spread_s += a.squaredNorm();
        spread_d += b.squaredNorm();
    }
    if (spread_s <= 1e-18 || spread_d <= 1e-18) {
        throw ValidationError("rigid fit is degenerate: all points coincide");
    }

    RigidTransform2D out;
    out.theta = std::atan2(h(0, 1) - h(1, 0), h(0, 0) + h(1, 1));
    out.t = cd - out.rotation() * cs;
    return out;
}

PolylineProjection project_to_polyline(const PlanarPoint& p, const TrackCenterline& cl) {
    if (cl.vertices.size() < 2) {
        throw ValidationError("centerline needs at least two vertices");
    }
    PolylineProjection best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < cl.vertices.size(); ++i) {
        const PlanarPoint& a = cl.vertices[i];
        const PlanarPoint& b = cl.vertices[i + 1];
        const PlanarPoint ab = b - a;
        const double len2 = ab.squaredNorm();
        double u = ab.dot(p - a) / len2;
        u = std::clamp(u, 0.0, 1.0);
        const PlanarPoint q = a + u * ab;
        const double d2 = (p - q).squaredNorm();
        if (d2 < best_d2) {  // strict: ties keep the earlier segment
            best_d2 = d2;
            best.point = q;
            best.segment = i;
            best.param = u;
            best.chainage = cl.chainage[i] + u * std::sqrt(len2);
        }
    }
    return best;
}

PlanarPoint point_at_chainage(const TrackCenterline& cl, double s) {
    if (cl.vertices.size() < 2) {
        throw ValidationError("centerline needs at least two vertices");
    }
    s = std::clamp(s, 0.0, cl.length());
    const auto it = std::upper_bound(cl.chainage.begin(), cl.chainage.end(), s);
    std::size_t i = static_cast<std::size_t>(it - cl.chainage.begin());
    if (i == 0) i = 1;
    if (i >= cl.chainage.size()) i = cl.chainage.size() - 1;
    const double seg_len = cl.chainage[i] - cl.chainage[i - 1];
    const double u = (s - cl.chainage[i - 1]) / seg_len;
    return cl.vertices[i - 1] + u * (cl.vertices[i] - cl.vertices[i - 1]);
}

namespace {

double rms_to_centerline(const std::vector<PlanarPoint>& pts, const TrackCenterline& cl) {
    double sum = 0.0;
    for (const PlanarPoint& p : pts) {
        const PolylineProjection proj = project_to_polyline(p, cl);
        sum += (p - proj.point).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(pts.size()));
}

}  // namespace

AlignmentResult icp_align(const std::vector<PlanarPoint>& trace,
                          const TrackCenterline& cl, const IcpConfig& cfg) {
    if (trace.size() < 2) {
        throw ValidationError("alignment needs at least two trace points");
    }
    if (cfg.max_iter < 1) throw ValidationError("max_iter must be at least 1");

    std::vector<PlanarPoint> current = trace;
    AlignmentResult res;
    double rms = rms_to_centerline(current, cl);
    res.rms_history.push_back(rms);

    std::vector<PlanarPoint> targets(current.size());
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        for (std::size_t i = 0; i < current.size(); ++i) {
            targets[i] = project_to_polyline(current[i], cl).point;
        }
        RigidTransform2D step;
        try {
            step = best_rigid_transform(current, targets);
        } catch (const ValidationError&) {
            break;  // all projections collapsed onto one point; keep current state
        }
        for (PlanarPoint& p : current) p = step.apply(p);
        res.transform = compose(step, res.transform);
        ++res.iterations;

        const double new_rms = rms_to_centerline(current, cl);
        res.rms_history.push_back(new_rms);
        const double improvement = rms - new_rms;
        rms = new_rms;
        if (improvement < cfg.tol_m) break;
    }

    res.rms_m = rms;
    res.accepted = rms <= cfg.reject_rms_m;
    return res;
}

std::pair<std::vector<AlignedPass>, std::vector<AlignedPass>> filter_bad_passes(
    std::vector<AlignedPass> results) {
    std::vector<AlignedPass> kept, removed;
    for (AlignedPass& r : results) {
        (r.alignment.accepted ? kept : removed).push_back(std::move(r));
    }
    return {std::move(kept), std::move(removed)};
}

}  // namespace railvib
