#pragma once

// Segmentation scoring: region similarity J, boundary F-measure, J&F per
// frame and per video, and centroid agreement between two sets of tracks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lptem/assignment.hpp"
#include "lptem/error.hpp"
#include "lptem/image.hpp"
#include "lptem/trajectory.hpp"

namespace lptem {

/// |M n G| / |M u G| over nonzero pixels; 1 when both masks are empty.
template <typename A, typename B>
double jaccard(const Image<A>& m, const Image<B>& g) {
    require_same_shape(m, g, "jaccard");
    std::size_t inter = 0, uni = 0;
    auto pm = m.pixels();
    auto pg = g.pixels();
    for (std::size_t i = 0; i < pm.size(); ++i) {
        const bool a = pm[i] != 0, b = pg[i] != 0;
        inter += a && b;
        uni += a || b;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct PixelCoord {
    std::ptrdiff_t x = 0;
    std::ptrdiff_t y = 0;
    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Mask pixels with at least one 4-neighbour outside the mask; pixels beyond
/// the image border count as outside.
template <typename T>
std::vector<PixelCoord> boundary_pixels(const Image<T>& mask) {
    std::vector<PixelCoord> out;
    const auto w = static_cast<std::ptrdiff_t>(mask.width());
    const auto h = static_cast<std::ptrdiff_t>(mask.height());
    auto inside = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
        return mask.contains(x, y) && mask(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) != 0;
    };
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            if (!inside(x, y)) continue;
            if (!inside(x - 1, y) || !inside(x + 1, y) || !inside(x, y - 1) || !inside(x, y + 1))
                out.push_back({x, y});
        }
    return out;
}

struct BoundaryMatch {
    double tolerance = 0.0; // px
    double precision = 0.0; // P_c
    double recall = 0.0;    // R_c
};

struct BoundaryScore {
    double f = 0.0;
    BoundaryMatch match;
};

/// ceil(0.8% of the image diagonal), in px.
inline double default_boundary_tolerance(std::size_t width, std::size_t height) {
    return std::ceil(0.008 * std::hypot(static_cast<double>(width), static_cast<double>(height)));
}

namespace detail {

/// Number of `from` pixels lying within Euclidean distance <= tolerance of
/// some pixel set in `target_grid`.
inline std::size_t count_matched(std::span<const PixelCoord> from, const BinaryMask& target_grid, double tolerance) {
    const auto r = static_cast<std::ptrdiff_t>(std::floor(tolerance));
    const double tol2 = tolerance * tolerance;
    std::vector<PixelCoord> offsets;
    for (std::ptrdiff_t dy = -r; dy <= r; ++dy)
        for (std::ptrdiff_t dx = -r; dx <= r; ++dx)
            if (static_cast<double>(dx * dx + dy * dy) <= tol2) offsets.push_back({dx, dy});
    std::sort(offsets.begin(), offsets.end(), [](const PixelCoord& a, const PixelCoord& b) {
        return a.x * a.x + a.y * a.y < b.x * b.x + b.y * b.y;
    });
    std::size_t hits = 0;
    for (const PixelCoord& p : from) {
        for (const PixelCoord& o : offsets) {
            const std::ptrdiff_t x = p.x + o.x, y = p.y + o.y;
            if (target_grid.contains(x, y) && target_grid(static_cast<std::size_t>(x), static_cast<std::size_t>(y))) {
                ++hits;
                break;
            }
        }
    }
    return hits;
}

inline BinaryMask to_grid(std::span<const PixelCoord> pts, std::size_t w, std::size_t h) {
    BinaryMask grid(w, h, 0);
    for (const PixelCoord& p : pts) grid(static_cast<std::size_t>(p.x), static_cast<std::size_t>(p.y)) = 1;
    return grid;
}

} // namespace detail

/// Boundary F-measure: P_c is the fraction of M's boundary pixels within
/// `tolerance` px of G's boundary, R_c the converse, F their harmonic mean.
/// Both boundaries empty gives F = 1; exactly one empty gives F = 0.
template <typename A, typename B>
BoundaryScore boundary_f(const Image<A>& m, const Image<B>& g, double tolerance) {
    require_same_shape(m, g, "boundary_f");
    if (!(tolerance >= 0.0)) throw ParameterError("boundary tolerance must be >= 0");
    BoundaryScore out;
    out.match.tolerance = tolerance;
    const auto bm = boundary_pixels(m);
    const auto bg = boundary_pixels(g);
    if (bm.empty() && bg.empty()) {
        out.f = 1.0;
        out.match.precision = out.match.recall = 1.0;
        return out;
    }
    if (bm.empty() || bg.empty()) return out;
    const auto grid_m = detail::to_grid(bm, m.width(), m.height());
    const auto grid_g = detail::to_grid(bg, g.width(), g.height());
    const double p = static_cast<double>(detail::count_matched(bm, grid_g, tolerance)) / static_cast<double>(bm.size());
    const double r = static_cast<double>(detail::count_matched(bg, grid_m, tolerance)) / static_cast<double>(bg.size());
    out.match.precision = p;
    out.match.recall = r;
    out.f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    return out;
}

inline double jf_mean(double j, double f) { return 0.5 * (j + f); }

template <typename A, typename B>
double jf_frame(const Image<A>& m, const Image<B>& g, double tolerance) {
    return jf_mean(jaccard(m, g), boundary_f(m, g, tolerance).f);
}

// ---------------------------------------------------------------------------
// Video scoring

enum class IdCorrespondence {
    identity, // pred label k scores against gt label k
    max_iou,  // greedy by ascending gt id, best IoU on the first frame with overlap
};

struct JfOptions {
    std::optional<double> tolerance; // px; default_boundary_tolerance when unset
    IdCorrespondence correspondence = IdCorrespondence::max_iou;
};

struct FrameScore {
    std::size_t frame = 0;
    int object_id = 0;            // gt label
    std::optional<int> pred_id;   // matched pred label
    double j = 0.0;
    double f = 0.0;
    double jf = 0.0;
};

struct ObjectSummary {
    int object_id = 0;
    std::optional<int> pred_id;
    double mean_j = 0.0;
    double mean_f = 0.0;
    double mean_jf = 0.0;
    std::size_t n_scored = 0;
    std::size_t n_absent_both = 0;  // excluded
    std::size_t n_missed = 0;       // in gt only, scored 0
    std::size_t n_spurious = 0;     // in pred only, scored 0
};

struct MetricReport {
    double tolerance = 0.0;
    IdCorrespondence correspondence = IdCorrespondence::max_iou;
    std::size_t n_frames = 0;
    std::vector<FrameScore> per_frame;
    std::vector<ObjectSummary> per_object;
    std::vector<double> frame_mean_jf; // mean over objects scored in each frame; NaN if none
    std::vector<int> unmatched_pred_ids;
    double mean_j = 0.0;
    double mean_f = 0.0;
    double mean_jf = 0.0;           // over every scored (frame, object) record
    double mean_jf_of_objects = 0.0; // mean of per-object means
};

namespace detail {

struct Box {
    std::ptrdiff_t x0 = std::numeric_limits<std::ptrdiff_t>::max();
    std::ptrdiff_t y0 = std::numeric_limits<std::ptrdiff_t>::max();
    std::ptrdiff_t x1 = -1;
    std::ptrdiff_t y1 = -1;
    void add(std::ptrdiff_t x, std::ptrdiff_t y) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
    }
    [[nodiscard]] bool empty() const noexcept { return x1 < 0; }
};

struct LabelIndex {
    std::map<int, Box> boxes;
    std::map<int, std::size_t> area;
};

inline LabelIndex index_labels(const LabelImage& img) {
    LabelIndex idx;
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x)
            if (const int v = img(x, y)) {
                idx.boxes[v].add(static_cast<std::ptrdiff_t>(x), static_cast<std::ptrdiff_t>(y));
                ++idx.area[v];
            }
    return idx;
}

/// Binary crops of label `pid` in `pred` and `gid` in `gt` over the union
/// of their boxes grown by one pixel (clipped). Scores are unchanged by the
/// crop because every pixel outside it is background in both masks.
inline std::pair<BinaryMask, BinaryMask> crop_pair(const LabelImage& pred, std::optional<int> pid, const Box* pbox,
                                                   const LabelImage& gt, std::optional<int> gid, const Box* gbox) {
    Box u;
    for (const Box* b : {pbox, gbox})
        if (b && !b->empty()) {
            u.add(b->x0, b->y0);
            u.add(b->x1, b->y1);
        }
    const auto w = static_cast<std::ptrdiff_t>(gt.width()), h = static_cast<std::ptrdiff_t>(gt.height());
    const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, u.x0 - 1), y0 = std::max<std::ptrdiff_t>(0, u.y0 - 1);
    const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(w - 1, u.x1 + 1), y1 = std::min<std::ptrdiff_t>(h - 1, u.y1 + 1);
    const auto cw = static_cast<std::size_t>(x1 - x0 + 1), ch = static_cast<std::size_t>(y1 - y0 + 1);
    BinaryMask a(cw, ch, 0), b(cw, ch, 0);
    for (std::size_t y = 0; y < ch; ++y)
        for (std::size_t x = 0; x < cw; ++x) {
            const auto sx = static_cast<std::size_t>(x0) + x, sy = static_cast<std::size_t>(y0) + y;
            a(x, y) = pid && pred(sx, sy) == *pid;
            b(x, y) = gid && gt(sx, sy) == *gid;
        }
    return {std::move(a), std::move(b)};
}

/// gt id -> pred id by greedy max IoU, gt ids ascending; each gt object is
/// matched on the first frame where it overlaps any still-unmatched pred
/// object (ties: lowest pred id).
inline std::map<int, int> match_by_iou(std::span<const LabelImage> pred, std::span<const LabelImage> gt,
                                       const std::set<int>& gt_ids) {
    std::map<int, int> out;
    std::set<int> taken;
    std::vector<std::map<std::pair<int, int>, std::size_t>> overlap(gt.size());
    std::vector<std::map<int, std::size_t>> pred_area(gt.size()), gt_area(gt.size());
    for (std::size_t f = 0; f < gt.size(); ++f) {
        auto pg = gt[f].pixels();
        auto pp = pred[f].pixels();
        for (std::size_t i = 0; i < pg.size(); ++i) {
            if (pg[i]) ++gt_area[f][pg[i]];
            if (pp[i]) ++pred_area[f][pp[i]];
            if (pg[i] && pp[i]) ++overlap[f][{pg[i], pp[i]}];
        }
    }
    for (int gid : gt_ids) {
        for (std::size_t f = 0; f < gt.size(); ++f) {
            auto ga = gt_area[f].find(gid);
            if (ga == gt_area[f].end()) continue;
            int best = 0;
            double best_iou = 0.0;
            for (const auto& [key, inter] : overlap[f]) {
                if (key.first != gid || taken.count(key.second)) continue;
                const double iou = static_cast<double>(inter) /
                                   static_cast<double>(ga->second + pred_area[f][key.second] - inter);
                if (iou > best_iou) {
                    best_iou = iou;
                    best = key.second;
                }
            }
            if (best != 0) {
                out[gid] = best;
                taken.insert(best);
                break;
            }
        }
    }
    return out;
}

} // namespace detail

/// Per-object, per-frame J, F and J&F of `pred` against `gt`. Frames where an
/// object is absent from both are excluded from its mean; absent from exactly
/// one scores 0. Pred objects without a gt counterpart are listed but not
/// scored.
inline MetricReport jf_video(std::span<const LabelImage> pred, std::span<const LabelImage> gt, const JfOptions& opts = {}) {
    if (pred.size() != gt.size())
        throw InputError("jf_video: frame count mismatch (" + std::to_string(pred.size()) + " vs " +
                         std::to_string(gt.size()) + ")");
    MetricReport report;
    report.n_frames = gt.size();
    report.correspondence = opts.correspondence;
    if (gt.empty()) {
        report.mean_j = report.mean_f = report.mean_jf = report.mean_jf_of_objects = 1.0;
        report.tolerance = opts.tolerance.value_or(0.0);
        return report;
    }
    for (std::size_t f = 0; f < gt.size(); ++f) require_same_shape(pred[f], gt[f], "jf_video");
    report.tolerance = opts.tolerance.value_or(default_boundary_tolerance(gt[0].width(), gt[0].height()));

    std::vector<detail::LabelIndex> pidx, gidx;
    std::set<int> gt_ids, pred_ids;
    for (std::size_t f = 0; f < gt.size(); ++f) {
        pidx.push_back(detail::index_labels(pred[f]));
        gidx.push_back(detail::index_labels(gt[f]));
        for (const auto& [id, _] : gidx.back().boxes) gt_ids.insert(id);
        for (const auto& [id, _] : pidx.back().boxes) pred_ids.insert(id);
    }

    std::map<int, int> corr;
    if (opts.correspondence == IdCorrespondence::identity) {
        for (int id : gt_ids) corr[id] = id;
    } else {
        corr = detail::match_by_iou(pred, gt, gt_ids);
    }
    std::set<int> used;
    for (const auto& [g, p] : corr) used.insert(p);
    for (int p : pred_ids)
        if (!used.count(p)) report.unmatched_pred_ids.push_back(p);

    std::vector<double> frame_sum(gt.size(), 0.0);
    std::vector<std::size_t> frame_n(gt.size(), 0);
    double sj = 0.0, sf = 0.0, sjf = 0.0, sobj = 0.0;
    for (int gid : gt_ids) {
        ObjectSummary obj;
        obj.object_id = gid;
        std::optional<int> pid;
        if (auto it = corr.find(gid); it != corr.end()) pid = it->second;
        obj.pred_id = pid;
        for (std::size_t f = 0; f < gt.size(); ++f) {
            const auto gb = gidx[f].boxes.find(gid);
            const detail::Box* gbox = gb == gidx[f].boxes.end() ? nullptr : &gb->second;
            const detail::Box* pbox = nullptr;
            if (pid)
                if (auto pb = pidx[f].boxes.find(*pid); pb != pidx[f].boxes.end()) pbox = &pb->second;
            if (!gbox && !pbox) {
                ++obj.n_absent_both;
                continue;
            }
            FrameScore s;
            s.frame = f;
            s.object_id = gid;
            s.pred_id = pid;
            if (gbox && pbox) {
                const auto [a, b] = detail::crop_pair(pred[f], pid, pbox, gt[f], gid, gbox);
                s.j = jaccard(a, b);
                s.f = boundary_f(a, b, report.tolerance).f;
            } else {
                // One side empty: J = 0 and F = 0 by definition.
                (gbox ? obj.n_missed : obj.n_spurious)++;
            }
            s.jf = jf_mean(s.j, s.f);
            obj.mean_j += s.j;
            obj.mean_f += s.f;
            obj.mean_jf += s.jf;
            ++obj.n_scored;
            sj += s.j;
            sf += s.f;
            sjf += s.jf;
            frame_sum[f] += s.jf;
            ++frame_n[f];
            report.per_frame.push_back(s);
        }
        if (obj.n_scored > 0) {
            const auto n = static_cast<double>(obj.n_scored);
            obj.mean_j /= n;
            obj.mean_f /= n;
            obj.mean_jf /= n;
        }
        sobj += obj.mean_jf;
        report.per_object.push_back(obj);
    }
    std::sort(report.per_frame.begin(), report.per_frame.end(),
              [](const FrameScore& a, const FrameScore& b) { return std::tie(a.frame, a.object_id) < std::tie(b.frame, b.object_id); });
    for (std::size_t f = 0; f < gt.size(); ++f)
        report.frame_mean_jf.push_back(frame_n[f] ? frame_sum[f] / static_cast<double>(frame_n[f])
                                                  : std::numeric_limits<double>::quiet_NaN());
    if (report.per_frame.empty()) {
        const double v = pred_ids.empty() ? 1.0 : 0.0;
        report.mean_j = report.mean_f = report.mean_jf = report.mean_jf_of_objects = v;
    } else {
        const auto n = static_cast<double>(report.per_frame.size());
        report.mean_j = sj / n;
        report.mean_f = sf / n;
        report.mean_jf = sjf / n;
        report.mean_jf_of_objects = sobj / static_cast<double>(report.per_object.size());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Centroid agreement

/// Tukey box-plot summary; quartiles by linear interpolation between order
/// statistics (position (n - 1) p).
struct BoxSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double whisker_low = 0.0;  // smallest value >= q1 - 1.5 iqr
    double whisker_high = 0.0; // largest value <= q3 + 1.5 iqr
    std::vector<double> outliers;
};

inline double quantile_sorted(std::span<const double> sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline BoxSummary box_summary(std::span<const double> values) {
    if (values.empty()) throw InsufficientDataError("box summary of an empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    BoxSummary s;
    s.n = v.size();
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    s.median = quantile_sorted(v, 0.5);
    s.q1 = quantile_sorted(v, 0.25);
    s.q3 = quantile_sorted(v, 0.75);
    s.iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * s.iqr, hi_fence = s.q3 + 1.5 * s.iqr;
    s.whisker_low = s.q1;
    s.whisker_high = s.q3;
    bool have_low = false;
    for (double x : v) {
        if (x < lo_fence || x > hi_fence) {
            s.outliers.push_back(x);
            continue;
        }
        if (!have_low) {
            s.whisker_low = x;
            have_low = true;
        }
        s.whisker_high = x;
    }
    return s;
}

struct CentroidDistance {
    std::int64_t frame = 0;
    int pred_id = 0;
    int ref_id = 0;
    double distance = 0.0; // nm
};

struct CentroidAgreement {
    std::vector<CentroidDistance> distances;
    std::map<int, int> pred_to_ref;
    BoxSummary summary;
};

/// Per-frame centroid distances between matched tracks, scaled by
/// `length_scale` (nm per input unit). Identities are paired by a
/// nearest-centroid min-cost assignment on the first frame where both ids are
/// unmatched and present; the pairing is then kept for all frames.
inline CentroidAgreement centroid_agreement(std::span<const Trajectory> pred, std::span<const Trajectory> ref,
                                            double length_scale) {
    if (!(length_scale > 0.0)) throw ParameterError("length scale must be > 0");
    struct Pt {
        int id;
        double x, y;
    };
    std::map<std::int64_t, std::vector<Pt>> pf, rf;
    for (const Trajectory& t : pred)
        for (const Sample& s : t.samples) pf[s.frame].push_back({t.id, s.x, s.y});
    for (const Trajectory& t : ref)
        for (const Sample& s : t.samples) rf[s.frame].push_back({t.id, s.x, s.y});

    CentroidAgreement out;
    std::set<int> ref_taken;
    bool any_shared = false;
    for (const auto& [frame, ppts] : pf) {
        auto it = rf.find(frame);
        if (it == rf.end()) continue;
        any_shared = true;
        const auto& rpts = it->second;
        std::vector<const Pt*> pu, ru;
        for (const Pt& p : ppts)
            if (!out.pred_to_ref.count(p.id)) pu.push_back(&p);
        for (const Pt& r : rpts)
            if (!ref_taken.count(r.id)) ru.push_back(&r);
        if (!pu.empty() && !ru.empty()) {
            CostMatrix cost(pu.size(), ru.size());
            for (std::size_t i = 0; i < pu.size(); ++i)
                for (std::size_t j = 0; j < ru.size(); ++j) cost(i, j) = std::hypot(pu[i]->x - ru[j]->x, pu[i]->y - ru[j]->y);
            for (const auto& [i, j] : min_cost_assignment(cost).pairs) {
                out.pred_to_ref[pu[i]->id] = ru[j]->id;
                ref_taken.insert(ru[j]->id);
            }
        }
        for (const Pt& p : ppts) {
            auto m = out.pred_to_ref.find(p.id);
            if (m == out.pred_to_ref.end()) continue;
            for (const Pt& r : rpts)
                if (r.id == m->second)
                    out.distances.push_back({frame, p.id, r.id, length_scale * std::hypot(p.x - r.x, p.y - r.y)});
        }
    }
    if (!any_shared) throw InputError("centroid agreement: trajectories share no frames");
    std::vector<double> d;
    for (const auto& c : out.distances) d.push_back(c.distance);
    out.summary = box_summary(d);
    return out;
}

} // namespace lptem
