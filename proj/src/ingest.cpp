#include "railvib/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "railvib/detail/csv.hpp"

namespace railvib {

namespace {

int parse_int_field(std::string_view s, std::string_view whole) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("bad date '" + std::string(whole) + "', expected YYYY-MM-DD");
    }
    return v;
}

}  // namespace

Date parse_date(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw ParseError("bad date '" + std::string(iso) + "', expected YYYY-MM-DD");
    }
    const int y = parse_int_field(iso.substr(0, 4), iso);
    const int m = parse_int_field(iso.substr(5, 2), iso);
    const int d = parse_int_field(iso.substr(8, 2), iso);
    const Date date{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                    std::chrono::day(static_cast<unsigned>(d))};
    if (!date.ok()) {
        throw ParseError("invalid calendar date '" + std::string(iso) + "'");
    }
    return date;
}

std::string format_date(Date d) {
    char buf[16];
    const int y = static_cast<int>(d.year());
    const unsigned m = static_cast<unsigned>(d.month());
    const unsigned day = static_cast<unsigned>(d.day());
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, day);
    return buf;
}

int days_between(Date from, Date to) {
    return static_cast<int>(
        (std::chrono::sys_days(to) - std::chrono::sys_days(from)).count());
}

Date add_days(Date d, int days) {
    return Date{std::chrono::sys_days(d) + std::chrono::days(days)};
}

const char* to_string(Axis a) {
    switch (a) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "?";
}

const char* to_string(Direction d) {
    return d == Direction::inbound ? "inbound" : "outbound";
}

const char* to_string(WorkType w) {
    return w == WorkType::tamping ? "tamping" : "surfacing";
}

Axis parse_axis(std::string_view s) {
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    throw ParseError("unknown axis '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
    if (s == "inbound") return Direction::inbound;
    if (s == "outbound") return Direction::outbound;
    throw ParseError("unknown direction '" + std::string(s) + "'");
}

WorkType parse_work_type(std::string_view s) {
    if (s == "tamping") return WorkType::tamping;
    if (s == "surfacing") return WorkType::surfacing;
    throw ParseError("unknown work_type '" + std::string(s) + "'");
}

const AccelChannel& RawPass::channel(Axis a) const {
    auto it = channels.find(a);
    if (it == channels.end()) {
        throw ValidationError("pass " + pass_id + ": missing " + to_string(a) +
                              " channel");
    }
    return it->second;
}

void validate_pass(const RawPass& pass) {
    const std::string tag = "pass " + pass.pass_id + ": ";
    if (pass.pass_id.empty()) throw ValidationError("pass id is empty");
    if (pass.channels.empty()) throw ValidationError(tag + "no accelerometer channels");
    const std::vector<double>* base = nullptr;
    for (const auto& [axis, ch] : pass.channels) {
        const std::string ctag = tag + to_string(axis) + " channel: ";
        if (ch.axis != axis) throw ValidationError(ctag + "axis key mismatch");
        if (ch.sample_rate_hz <= 0) throw ValidationError(ctag + "sample rate must be positive");
        if (ch.t.empty()) throw ValidationError(ctag + "no samples");
        if (ch.t.size() != ch.value.size()) {
            throw ValidationError(ctag + "timestamp/value length mismatch");
        }
        for (std::size_t i = 0; i < ch.t.size(); ++i) {
            if (!std::isfinite(ch.t[i]) || !std::isfinite(ch.value[i])) {
                throw ValidationError(ctag + "non-finite sample at row " + std::to_string(i + 1));
            }
            if (i > 0 && ch.t[i] <= ch.t[i - 1]) {
                throw ValidationError(ctag + "timestamps not strictly increasing at row " +
                                      std::to_string(i + 1));
            }
        }
        if (base == nullptr) {
            base = &ch.t;
        } else if (ch.t != *base) {
            throw ValidationError(tag + "channels do not share one time base");
        }
    }
    if (pass.gps.size() < 2) throw ValidationError(tag + "fewer than two GPS fixes");
    for (std::size_t i = 0; i < pass.gps.size(); ++i) {
        const GpsFix& f = pass.gps[i];
        if (!std::isfinite(f.t) || !std::isfinite(f.lat) || !std::isfinite(f.lon)) {
            throw ValidationError(tag + "non-finite GPS fix at row " + std::to_string(i + 1));
        }
        if (f.lat < -90.0 || f.lat > 90.0 || f.lon < -180.0 || f.lon > 180.0) {
            throw ValidationError(tag + "GPS fix out of range at row " + std::to_string(i + 1));
        }
        if (i > 0 && f.t <= pass.gps[i - 1].t) {
            throw ValidationError(tag + "GPS timestamps not strictly increasing at row " +
                                  std::to_string(i + 1));
        }
    }
}

RawPass parse_pass(const std::string& accel_file, const std::string& gps_file,
                   const PassMeta& meta) {
    RawPass pass;
    pass.pass_id = meta.pass_id;
    pass.date = meta.date;
    pass.direction = meta.direction;

    detail::CsvReader accel(accel_file);
    const auto& header = accel.header();
    if (header.empty() || header[0] != "t") {
        throw ParseError(accel_file + ": first column must be 't'");
    }
    if (header.size() < 2) {
        throw ParseError(accel_file + ": at least one acceleration column required");
    }
    std::vector<Axis> axes;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const std::string& name = header[i];
        if (name.size() != 2 || name[0] != 'a') {
            throw ParseError(accel_file + ": unknown column '" + name + "'");
        }
        const Axis axis = parse_axis(name.substr(1));
        if (pass.has_channel(axis)) {
            throw ParseError(accel_file + ": duplicate column '" + name + "'");
        }
        axes.push_back(axis);
        AccelChannel ch;
        ch.axis = axis;
        ch.sample_rate_hz = meta.sample_rate_hz;
        pass.channels.emplace(axis, std::move(ch));
    }

    std::vector<std::string_view> fields;
    while (accel.next(fields)) {
        const double t = accel.number(fields[0], "t");
        if (!pass.channels.begin()->second.t.empty() &&
            t <= pass.channels.begin()->second.t.back()) {
            accel.fail("timestamp does not increase");
        }
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const double v = accel.number(fields[i + 1], header[i + 1].c_str());
            AccelChannel& ch = pass.channels.at(axes[i]);
            ch.t.push_back(t);
            ch.value.push_back(v);
        }
    }

    detail::CsvReader gps(gps_file, {"t", "lat", "lon"});
    while (gps.next(fields)) {
        GpsFix fix;
        fix.t = gps.number(fields[0], "t");
        fix.lat = gps.number(fields[1], "lat");
        fix.lon = gps.number(fields[2], "lon");
        if (!pass.gps.empty() && fix.t <= pass.gps.back().t) {
            gps.fail("timestamp does not increase");
        }
        pass.gps.push_back(fix);
    }

    validate_pass(pass);
    return pass;
}

std::vector<MaintenanceRecord> parse_maintenance_log(const std::string& file) {
    detail::CsvReader csv(file, {"date", "work_type", "track", "start_m", "end_m"});
    std::vector<MaintenanceRecord> records;
    std::vector<std::string_view> fields;
    while (csv.next(fields)) {
        MaintenanceRecord rec;
        try {
            rec.date = parse_date(fields[0]);
            rec.work_type = parse_work_type(fields[1]);
            rec.track = parse_direction(fields[2]);
        } catch (const ParseError& e) {
            csv.fail(e.what());
        }
        rec.segment.start_m = csv.number(fields[3], "start_m");
        rec.segment.end_m = csv.number(fields[4], "end_m");
        if (!(rec.segment.start_m < rec.segment.end_m)) {
            throw ValidationError(file + ": row " + std::to_string(csv.row()) +
                                  ": start_m must be less than end_m");
        }
        records.push_back(rec);
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const MaintenanceRecord& a, const MaintenanceRecord& b) {
                         return std::chrono::sys_days(a.date) < std::chrono::sys_days(b.date);
                     });
    return records;
}

LabelVector assign_labels(Date pass_date, Direction pass_direction,
                          const std::vector<MaintenanceRecord>& records,
                          const ChainageInterval& segment, int horizon_days) {
    if (horizon_days <= 0) throw ValidationError("label horizon must be positive");
    LabelVector labels;
    for (const MaintenanceRecord& rec : records) {
        if (rec.track != pass_direction) continue;
        if (!rec.segment.overlaps(segment)) continue;
        const int delta = days_between(pass_date, rec.date);
        if (delta <= 0 || delta > horizon_days) continue;
        if (rec.work_type == WorkType::tamping) labels.tamping = true;
        else labels.surfacing = true;
    }
    return labels;
}

}  // namespace railvib
