#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "railvib/geo_align.hpp"

namespace railvib {

struct ChainagePosition {
    double s = 0.0;        // arc length along the centerline, clamped to [0, length]
    double lateral = 0.0;  // signed offset, positive to the left of travel
};

ChainagePosition chainage_project(const PlanarPoint& p, const TrackCenterline& cl);

struct InterpolatedPositions {
    std::size_t first_sample = 0;  // index of the first kept sample time
    std::vector<ChainagePosition> positions;  // one per kept sample
};

// Linear interpolation of the aligned planar trace at each sample time, then
// projection to chainage. Sample times outside [first fix, last fix] drop.
InterpolatedPositions interpolate_positions(std::span<const double> fix_times,
                                            std::span<const PlanarPoint> fix_points,
                                            std::span<const double> sample_times,
                                            const TrackCenterline& cl);

struct SpatialSignal {
    double s0 = 0.0;  // chainage of the first cell's left edge
    double ds = 0.25;
    Eigen::VectorXd values;

    double cell_center(Eigen::Index i) const {
        return s0 + (static_cast<double>(i) + 0.5) * ds;
    }
};

// Mean squared acceleration per ds-cell over [start_m, end_m). Cells no sample
// hits are filled by linear interpolation between populated neighbors (nearest
// populated value at the ends). Throws when no sample lands in the interval.
SpatialSignal spatial_resample(std::span<const double> accel,
                               const InterpolatedPositions& positions,
                               const ChainageInterval& segment, double ds = 0.25);

// Centered moving average, window rounded to an odd cell count; the window is
// truncated at the signal edges.
SpatialSignal moving_window_average(const SpatialSignal& in, double window_m = 25.0);

}  // namespace railvib
