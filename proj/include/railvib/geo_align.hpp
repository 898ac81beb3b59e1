#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "railvib/ingest.hpp"

namespace railvib {

using PlanarPoint = Eigen::Vector2d;

inline constexpr double kEarthRadiusM = 6371000.0;

struct GeoOrigin {
    double lat = 0.0;
    double lon = 0.0;
};

// Equirectangular projection around the origin; adequate for traces a few km
// across. x is easting, y is northing, both in meters.
PlanarPoint geo_to_plane(double lat, double lon, const GeoOrigin& origin);
void plane_to_geo(const PlanarPoint& p, const GeoOrigin& origin, double& lat, double& lon);
std::vector<PlanarPoint> project_to_plane(const std::vector<GpsFix>& fixes,
                                          const GeoOrigin& origin);

struct TrackCenterline {
    std::vector<PlanarPoint> vertices;
    std::vector<double> chainage;  // cumulative arc length, chainage[0] == 0

    double length() const { return chainage.empty() ? 0.0 : chainage.back(); }
};

// Computes chainage; rejects fewer than two vertices and zero-length segments.
TrackCenterline make_centerline(std::vector<PlanarPoint> vertices);

struct LoadedCenterline {
    TrackCenterline centerline;
    GeoOrigin origin;  // mean of the input coordinates
};

// CSV with header "lat,lon", vertices in track order
LoadedCenterline load_centerline(const std::string& file);

struct RigidTransform2D {
    double theta = 0.0;                        // radians, counterclockwise
    Eigen::Vector2d t = Eigen::Vector2d::Zero();

    Eigen::Matrix2d rotation() const;
    PlanarPoint apply(const PlanarPoint& p) const;
};

// outer after inner: result(p) == outer(inner(p))
RigidTransform2D compose(const RigidTransform2D& outer, const RigidTransform2D& inner);

// Least-squares rotation + translation mapping src onto dst (paired points).
// Requires equal sizes >= 2 and a non-degenerate spread on both sides.
RigidTransform2D best_rigid_transform(const std::vector<PlanarPoint>& src,
                                      const std::vector<PlanarPoint>& dst);

struct PolylineProjection {
    PlanarPoint point = PlanarPoint::Zero();  // closest point on the polyline
    double chainage = 0.0;
    std::size_t segment = 0;  // index of the segment containing the projection
    double param = 0.0;       // position along that segment in [0, 1]
};

// Closest-point projection; distance ties resolve to the earlier segment.
PolylineProjection project_to_polyline(const PlanarPoint& p, const TrackCenterline& cl);

// Point at a given arc length; s is clamped to [0, length]
PlanarPoint point_at_chainage(const TrackCenterline& cl, double s);

struct IcpConfig {
    int max_iter = 50;
    double tol_m = 1e-4;         // stop when RMS improves by less than this
    double reject_rms_m = 10.0;  // accepted = final RMS <= this
};

struct AlignmentResult {
    RigidTransform2D transform;  // applies to the input trace
    double rms_m = 0.0;          // final RMS point-to-centerline distance
    int iterations = 0;
    bool accepted = false;
    std::vector<double> rms_history;  // initial RMS followed by one entry per iteration
};

// Point-to-polyline ICP with a closed-form rigid fit per iteration.
AlignmentResult icp_align(const std::vector<PlanarPoint>& trace,
                          const TrackCenterline& cl, const IcpConfig& cfg = {});

struct AlignedPass {
    RawPass pass;
    AlignmentResult alignment;
};

// Order-preserving partition into (accepted, rejected).
std::pair<std::vector<AlignedPass>, std::vector<AlignedPass>> filter_bad_passes(
    std::vector<AlignedPass> results);

}  // namespace railvib
