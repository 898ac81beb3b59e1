#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "railvib/errors.hpp"

namespace railvib {

enum class Axis { x, y, z };  // x longitudinal, y transverse, z vertical
enum class Direction { inbound, outbound };
enum class WorkType { tamping, surfacing };

using Date = std::chrono::year_month_day;

Date parse_date(std::string_view iso);  // "YYYY-MM-DD", validated
std::string format_date(Date d);
int days_between(Date from, Date to);  // (to - from) in calendar days
Date add_days(Date d, int days);

const char* to_string(Axis a);
const char* to_string(Direction d);
const char* to_string(WorkType w);
Axis parse_axis(std::string_view s);
Direction parse_direction(std::string_view s);
WorkType parse_work_type(std::string_view s);

struct GpsFix {
    double t = 0.0;  // seconds, same time base as the accelerometer channels
    double lat = 0.0;
    double lon = 0.0;
};

struct AccelChannel {
    Axis axis = Axis::z;
    double sample_rate_hz = 1600.0;
    std::vector<double> t;      // seconds, strictly increasing
    std::vector<double> value;  // acceleration in g
};

struct RawPass {
    std::string pass_id;
    Date date{};
    Direction direction = Direction::inbound;
    std::map<Axis, AccelChannel> channels;
    std::vector<GpsFix> gps;

    bool has_channel(Axis a) const { return channels.count(a) != 0; }
    const AccelChannel& channel(Axis a) const;  // throws ValidationError if absent
};

// Invariants shared by parsed and generated passes: at least one non-empty
// channel, all channels on one time base, strictly increasing timestamps,
// at least two GPS fixes, finite values, coordinates in range.
void validate_pass(const RawPass& pass);

struct ChainageInterval {
    double start_m = 0.0;
    double end_m = 0.0;

    // strict overlap: touching endpoints do not count
    bool overlaps(const ChainageInterval& other) const {
        return start_m < other.end_m && other.start_m < end_m;
    }
};

struct MaintenanceRecord {
    WorkType work_type = WorkType::tamping;
    Date date{};
    Direction track = Direction::inbound;
    ChainageInterval segment;
};

struct LabelVector {
    bool tamping = false;
    bool surfacing = false;

    bool any() const { return tamping || surfacing; }
    friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

struct PassMeta {
    std::string pass_id;
    Date date{};
    Direction direction = Direction::inbound;
    double sample_rate_hz = 1600.0;
};

// accel_file: header "t" plus one or more of ax,ay,az; gps_file: "t,lat,lon".
RawPass parse_pass(const std::string& accel_file, const std::string& gps_file,
                   const PassMeta& meta);

// header "date,work_type,track,start_m,end_m"; result sorted by date
std::vector<MaintenanceRecord> parse_maintenance_log(const std::string& file);

// A label is set when a matching-direction record overlapping the segment
// exists with 0 < record.date - pass_date <= horizon_days.
LabelVector assign_labels(Date pass_date, Direction pass_direction,
                          const std::vector<MaintenanceRecord>& records,
                          const ChainageInterval& segment, int horizon_days = 60);

}  // namespace railvib
