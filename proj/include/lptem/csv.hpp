#pragma once

// Trajectory CSV files.
//
//   ground truth:  frame,id,x_nm,y_nm,theta_rad
//   tracked:       frame,id,x_px,y_px[,x_nm,y_nm],theta_rad,area_px
//
// Readers locate columns by header name, so either layout (and any column
// order) is accepted. An empty theta_rad cell means "no orientation".

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lptem/error.hpp"
#include "lptem/imaging.hpp"
#include "lptem/tracklink.hpp"
#include "lptem/trajectory.hpp"

namespace lptem::csv {

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write_ground_truth(std::ostream& os, std::span<const Trajectory> trajs) {
    struct Row {
        std::int64_t frame;
        int id;
        const Sample* s;
    };
    std::vector<Row> rows;
    for (const Trajectory& t : trajs)
        for (const Sample& s : t.samples) rows.push_back({s.frame, t.id, &s});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.frame != b.frame ? a.frame < b.frame : a.id < b.id; });
    os << "frame,id,x_nm,y_nm,theta_rad\n";
    for (const Row& r : rows) {
        os << r.frame << ',' << r.id << ',' << format_number(r.s->x) << ',' << format_number(r.s->y) << ',';
        if (r.s->theta) os << format_number(*r.s->theta);
        os << '\n';
    }
}

/// Tracked detections; nm columns are written only when `pixel_size` is known.
inline void write_tracks(std::ostream& os, std::span<const Track> tracks, std::optional<double> pixel_size) {
    struct Row {
        int id;
        const Detection* d;
    };
    std::vector<Row> rows;
    for (const Track& t : tracks)
        for (const Detection& d : t.detections) rows.push_back({t.id, &d});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.d->frame != b.d->frame ? a.d->frame < b.d->frame : a.id < b.id;
    });
    os << "frame,id,x_px,y_px";
    if (pixel_size) os << ",x_nm,y_nm";
    os << ",theta_rad,area_px\n";
    for (const Row& r : rows) {
        const Detection& d = *r.d;
        os << d.frame << ',' << r.id << ',' << format_number(d.x) << ',' << format_number(d.y);
        if (pixel_size)
            os << ',' << format_number(px_to_nm(d.x, *pixel_size)) << ',' << format_number(px_to_nm(d.y, *pixel_size));
        os << ',' << format_number(d.theta) << ',' << d.area << '\n';
    }
}

struct Row {
    std::int64_t frame = 0;
    int id = 0;
    std::optional<double> x_px, y_px, x_nm, y_nm, theta;
    std::optional<std::int64_t> area;
};

struct Table {
    bool has_px = false;
    bool has_nm = false;
    std::vector<Row> rows;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    }
    return out;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no, std::string_view column) {
    T value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw IoError("csv line " + std::to_string(line_no) + ": bad " + std::string(column) + " value '" +
                      std::string(field) + "'");
    return value;
}

} // namespace detail

inline Table read(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    do {
        if (!std::getline(is, line)) throw IoError("csv: missing header");
        ++line_no;
    } while (line.find_first_not_of(" \t\r") == std::string::npos);

    std::map<std::string, std::size_t, std::less<>> col;
    const auto header = detail::split(line);
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(std::string(header[i]), i);
    auto find = [&](std::string_view name) -> std::optional<std::size_t> {
        auto it = col.find(name);
        return it == col.end() ? std::nullopt : std::optional(it->second);
    };
    const auto c_frame = find("frame"), c_id = find("id");
    if (!c_frame || !c_id) throw IoError("csv: header needs 'frame' and 'id' columns");
    const auto c_xp = find("x_px"), c_yp = find("y_px"), c_xn = find("x_nm"), c_yn = find("y_nm");
    const auto c_theta = find("theta_rad"), c_area = find("area_px");
    Table table;
    table.has_px = c_xp && c_yp;
    table.has_nm = c_xn && c_yn;
    if (!table.has_px && !table.has_nm) throw IoError("csv: header needs x_px,y_px or x_nm,y_nm columns");

    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = detail::split(line);
        if (f.size() != header.size())
            throw IoError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                          " fields, got " + std::to_string(f.size()));
        Row r;
        r.frame = detail::parse_field<std::int64_t>(f[*c_frame], line_no, "frame");
        r.id = detail::parse_field<int>(f[*c_id], line_no, "id");
        auto opt_double = [&](std::optional<std::size_t> c, std::string_view name) -> std::optional<double> {
            if (!c || f[*c].empty()) return std::nullopt;
            return detail::parse_field<double>(f[*c], line_no, name);
        };
        r.x_px = opt_double(c_xp, "x_px");
        r.y_px = opt_double(c_yp, "y_px");
        r.x_nm = opt_double(c_xn, "x_nm");
        r.y_nm = opt_double(c_yn, "y_nm");
        r.theta = opt_double(c_theta, "theta_rad");
        if (c_area && !f[*c_area].empty()) r.area = detail::parse_field<std::int64_t>(f[*c_area], line_no, "area_px");
        table.rows.push_back(r);
    }
    return table;
}

enum class Units { nm, px };

/// Groups rows into trajectories (ascending id, ascending frame) using the
/// requested coordinate columns.
inline std::vector<Trajectory> to_trajectories(const Table& table, Units units, double frame_interval) {
    if (units == Units::nm && !table.has_nm) throw IoError("csv: no nm columns");
    if (units == Units::px && !table.has_px) throw IoError("csv: no px columns");
    std::map<int, Trajectory> by_id;
    for (const Row& r : table.rows) {
        const auto x = units == Units::nm ? r.x_nm : r.x_px;
        const auto y = units == Units::nm ? r.y_nm : r.y_px;
        if (!x || !y) throw IoError("csv: missing coordinate for id " + std::to_string(r.id) + " frame " + std::to_string(r.frame));
        Trajectory& t = by_id[r.id];
        t.id = r.id;
        t.frame_interval = frame_interval;
        t.samples.push_back({r.frame, *x, *y, r.theta});
    }
    std::vector<Trajectory> out;
    for (auto& [id, t] : by_id) {
        std::sort(t.samples.begin(), t.samples.end(), [](const Sample& a, const Sample& b) { return a.frame < b.frame; });
        for (std::size_t i = 1; i < t.samples.size(); ++i)
            if (t.samples[i].frame == t.samples[i - 1].frame)
                throw IoError("csv: duplicate frame " + std::to_string(t.samples[i].frame) + " for id " + std::to_string(id));
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace lptem::csv
