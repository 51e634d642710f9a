#pragma once

// Particle tracking: mask -> detections (image moments) -> linked tracks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lptem/assignment.hpp"
#include "lptem/error.hpp"
#include "lptem/image.hpp"
#include "lptem/imaging.hpp"
#include "lptem/trajectory.hpp"

namespace lptem {

/// One segmented particle in one frame, in pixel units.
struct Detection {
    std::int64_t frame = 0;
    std::int64_t source_label = 0;
    double x = 0.0; // column, sub-pixel
    double y = 0.0; // row, sub-pixel
    double theta = 0.0; // rad in [-pi/2, pi/2), long axis angle from +x towards +y
    std::int64_t area = 0; // px

    friend bool operator==(const Detection&, const Detection&) = default;
};

using ComponentImage = Image<std::uint32_t>;

/// 8-connected components of the nonzero pixels of `mask`, labelled 1.. in
/// raster order of each component's first pixel.
template <typename T>
ComponentImage label_components(const Image<T>& mask) {
    ComponentImage labels(mask.width(), mask.height(), 0);
    const auto w = static_cast<std::ptrdiff_t>(mask.width());
    const auto h = static_cast<std::ptrdiff_t>(mask.height());
    std::uint32_t next = 0;
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> stack;
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
            if (mask(ux, uy) == 0 || labels(ux, uy) != 0) continue;
            ++next;
            labels(ux, uy) = next;
            stack.emplace_back(x, y);
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
                    for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                        const std::ptrdiff_t nx = cx + dx, ny = cy + dy;
                        if (!mask.contains(nx, ny)) continue;
                        const auto nux = static_cast<std::size_t>(nx), nuy = static_cast<std::size_t>(ny);
                        if (mask(nux, nuy) == 0 || labels(nux, nuy) != 0) continue;
                        labels(nux, nuy) = next;
                        stack.emplace_back(nx, ny);
                    }
            }
        }
    }
    return labels;
}

/// Raw image moments with exact integer accumulation.
struct RawMoments {
    std::int64_t m00 = 0;
    std::int64_t m10 = 0;
    std::int64_t m01 = 0;
    std::int64_t m20 = 0;
    std::int64_t m11 = 0;
    std::int64_t m02 = 0;

    void add(std::int64_t x, std::int64_t y) noexcept {
        ++m00;
        m10 += x;
        m01 += y;
        m20 += x * x;
        m11 += x * y;
        m02 += y * y;
    }

    [[nodiscard]] double centroid_x() const noexcept { return static_cast<double>(m10) / static_cast<double>(m00); }
    [[nodiscard]] double centroid_y() const noexcept { return static_cast<double>(m01) / static_cast<double>(m00); }

    /// 1/2 atan2(2 mu11, mu20 - mu02), folded into [-pi/2, pi/2). The central
    /// moments are formed as m00 * mu_pq in 128-bit integers, which leaves the
    /// angle unchanged and avoids cancellation.
    [[nodiscard]] double orientation() const noexcept {
        using i128 = __int128;
        const i128 n = m00;
        const i128 c20 = n * m20 - i128{m10} * m10;
        const i128 c02 = n * m02 - i128{m01} * m01;
        const i128 c11 = n * m11 - i128{m10} * m01;
        double theta = 0.5 * std::atan2(2.0 * static_cast<double>(c11), static_cast<double>(c20 - c02));
        if (theta >= std::numbers::pi / 2) theta -= std::numbers::pi;
        return theta;
    }
};

enum class MaskKind {
    labels, // every distinct nonzero value is one object
    binary, // nonzero pixels are foreground; 8-connected components become objects
};

struct ExtractOptions {
    MaskKind kind = MaskKind::labels;
    std::int64_t min_area = 4; // px; smaller components are discarded
};

namespace detail {
template <typename T>
std::vector<Detection> detections_from_labels(const Image<T>& labels, std::int64_t frame, std::int64_t min_area) {
    std::map<std::int64_t, RawMoments> acc;
    for (std::size_t y = 0; y < labels.height(); ++y)
        for (std::size_t x = 0; x < labels.width(); ++x) {
            const auto v = labels(x, y);
            if (v != 0) acc[static_cast<std::int64_t>(v)].add(static_cast<std::int64_t>(x), static_cast<std::int64_t>(y));
        }
    std::vector<Detection> out;
    for (const auto& [label, m] : acc) {
        if (m.m00 < min_area) continue;
        out.push_back({frame, label, m.centroid_x(), m.centroid_y(), m.orientation(), m.m00});
    }
    return out;
}
} // namespace detail

/// Detections (centroid, orientation, area) of the objects in one mask frame,
/// ordered by source label.
template <typename T>
std::vector<Detection> extract_detections(const Image<T>& mask, std::int64_t frame = 0, const ExtractOptions& opts = {}) {
    if (opts.kind == MaskKind::binary)
        return detail::detections_from_labels(label_components(mask), frame, opts.min_area);
    return detail::detections_from_labels(mask, frame, opts.min_area);
}

// ---------------------------------------------------------------------------
// Linking

struct LinkConfig {
    double gate = 20.0;          // px
    std::int64_t max_missed = 2; // frames a track may go unmatched
};

inline void validate(const LinkConfig& cfg) {
    if (!(cfg.gate > 0.0)) throw ParameterError("link gate must be > 0");
    if (cfg.max_missed < 0) throw ParameterError("max_missed must be >= 0");
}

struct Track {
    int id = 0;
    std::vector<Detection> detections; // ascending frame
};

/// Links per-frame detections (entry k = k-th consecutive frame) into tracks.
/// Each frame solves a gated min-cost assignment between open tracks (at
/// their last seen position) and the new detections. Unmatched detections
/// open tracks; tracks unmatched for more than max_missed frames close.
inline std::vector<Track> link(std::span<const std::vector<Detection>> frames, const LinkConfig& cfg) {
    validate(cfg);
    struct Open {
        std::size_t track;
        std::int64_t missed;
    };
    std::vector<Track> tracks;
    std::vector<Open> open;
    for (const std::vector<Detection>& dets : frames) {
        CostMatrix cost(open.size(), dets.size(), kForbidden);
        for (std::size_t r = 0; r < open.size(); ++r) {
            const Detection& last = tracks[open[r].track].detections.back();
            for (std::size_t c = 0; c < dets.size(); ++c) {
                const double d = std::hypot(dets[c].x - last.x, dets[c].y - last.y);
                if (d <= cfg.gate) cost(r, c) = d;
            }
        }
        const Assignment match = min_cost_assignment(cost);
        std::vector<char> row_hit(open.size(), 0), col_hit(dets.size(), 0);
        for (const auto& [r, c] : match.pairs) {
            row_hit[r] = col_hit[c] = 1;
            tracks[open[r].track].detections.push_back(dets[c]);
            open[r].missed = 0;
        }
        std::vector<Open> still_open;
        for (std::size_t r = 0; r < open.size(); ++r) {
            if (!row_hit[r]) ++open[r].missed;
            if (open[r].missed <= cfg.max_missed) still_open.push_back(open[r]);
        }
        for (std::size_t c = 0; c < dets.size(); ++c) {
            if (col_hit[c]) continue;
            tracks.push_back({static_cast<int>(tracks.size()) + 1, {dets[c]}});
            still_open.push_back({tracks.size() - 1, 0});
        }
        open = std::move(still_open);
    }
    return tracks;
}

/// Track in physical units: nm (pixel centre convention of the imaging model)
/// when `pixel_size` is given, otherwise px.
inline Trajectory to_trajectory(const Track& track, std::optional<double> pixel_size, double frame_interval) {
    Trajectory traj;
    traj.id = track.id;
    traj.frame_interval = frame_interval;
    for (const Detection& d : track.detections) {
        if (pixel_size)
            traj.samples.push_back({d.frame, px_to_nm(d.x, *pixel_size), px_to_nm(d.y, *pixel_size), d.theta});
        else
            traj.samples.push_back({d.frame, d.x, d.y, d.theta});
    }
    return traj;
}

/// Number of identity switches of `pred` against `gt` (same length unit).
/// Every predicted point is mapped to the nearest ground-truth point of the
/// same frame within `match_radius` (ties: lowest gt id); unmapped points are
/// skipped. A switch is counted whenever consecutive mapped points of one
/// predicted trajectory map to different gt ids.
inline std::size_t identity_switch_count(std::span<const Trajectory> pred, std::span<const Trajectory> gt,
                                         double match_radius) {
    struct GtPoint {
        int id;
        double x, y;
    };
    std::map<std::int64_t, std::vector<GtPoint>> by_frame;
    for (const Trajectory& t : gt)
        for (const Sample& s : t.samples) by_frame[s.frame].push_back({t.id, s.x, s.y});

    std::size_t switches = 0;
    for (const Trajectory& t : pred) {
        std::optional<int> previous;
        for (const Sample& s : t.samples) {
            auto it = by_frame.find(s.frame);
            if (it == by_frame.end()) continue;
            std::optional<int> best;
            double best_d = std::numeric_limits<double>::infinity();
            for (const GtPoint& g : it->second) {
                const double d = std::hypot(s.x - g.x, s.y - g.y);
                if (d > match_radius) continue;
                if (d < best_d || (d == best_d && best && g.id < *best)) {
                    best_d = d;
                    best = g.id;
                }
            }
            if (!best) continue;
            if (previous && *previous != *best) ++switches;
            previous = best;
        }
    }
    return switches;
}

} // namespace lptem
