#pragma once

// Trajectory statistics: time-averaged MSD, velocity autocorrelation,
// displacement distributions and diffusion fits. Every estimator is
// gap-aware: a pair (t, t+k) contributes only if both frames were observed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lptem/error.hpp"
#include "lptem/fft.hpp"
#include "lptem/trajectory.hpp"

namespace lptem {

class FitError : public Error {
public:
    using Error::Error;
};

struct MsdPoint {
    double tau = 0.0;  // s
    double msd = 0.0;  // length^2
    std::int64_t n_pairs = 0;
};

struct MsdCurve {
    std::vector<MsdPoint> points;
};

struct VacfPoint {
    double tau = 0.0;
    double c = 0.0;
    std::int64_t n_pairs = 0;
};

struct VacfCurve {
    std::vector<VacfPoint> points;
};

enum class DisplacementAxis { x, y, radial, pooled };

inline std::string_view to_string(DisplacementAxis a) {
    switch (a) {
    case DisplacementAxis::x: return "x";
    case DisplacementAxis::y: return "y";
    case DisplacementAxis::radial: return "radial";
    case DisplacementAxis::pooled: return "pooled";
    }
    return "?";
}

inline DisplacementAxis parse_displacement_axis(std::string_view s) {
    if (s == "x") return DisplacementAxis::x;
    if (s == "y") return DisplacementAxis::y;
    if (s == "radial") return DisplacementAxis::radial;
    if (s == "pooled" || s == "both") return DisplacementAxis::pooled;
    throw ParameterError("unknown displacement axis '" + std::string(s) + "'");
}

struct DisplacementHist {
    double tau = 0.0;
    DisplacementAxis axis = DisplacementAxis::pooled;
    std::vector<double> bin_edges; // n_bins + 1
    std::vector<double> density;   // n_bins, 1/length
    std::int64_t n_samples = 0;    // samples inside the histogram range
    std::int64_t n_excluded = 0;   // samples beyond mean +- 5 sd
    double mean = 0.0;
    double stddev = 0.0;
    double excess_kurtosis = 0.0;
};

struct LagOptions {
    double max_lag_fraction = 0.25;     // of the number of samples
    std::optional<std::int64_t> max_lag; // frames; overrides the fraction
};

// ---------------------------------------------------------------------------
// Lag sums

namespace detail {

/// Per-lag accumulator; index k = lag in frames.
struct LagSums {
    std::vector<double> sum;
    std::vector<std::int64_t> count;

    explicit LagSums(std::size_t lags = 0) : sum(lags + 1, 0.0), count(lags + 1, 0) {}
    void merge(const LagSums& o) {
        for (std::size_t k = 0; k < sum.size() && k < o.sum.size(); ++k) {
            sum[k] += o.sum[k];
            count[k] += o.count[k];
        }
    }
};

/// Work above which lag sums switch from the direct O(N K) loop to FFT
/// correlations.
inline constexpr double kDirectWorkLimit = 2e7;

inline std::int64_t max_lag_for(const Trajectory& t, const LagOptions& opts) {
    if (opts.max_lag) return std::max<std::int64_t>(0, *opts.max_lag);
    return static_cast<std::int64_t>(std::ceil(opts.max_lag_fraction * static_cast<double>(t.size())));
}

/// Dense frame grid of a trajectory.
struct Grid {
    std::int64_t first = 0;
    std::vector<char> present;
    std::vector<double> x, y;
};

inline Grid make_grid(const Trajectory& t) {
    Grid g;
    if (t.empty()) return g;
    g.first = t.samples.front().frame;
    const auto span = static_cast<std::size_t>(t.samples.back().frame - g.first + 1);
    g.present.assign(span, 0);
    g.x.assign(span, 0.0);
    g.y.assign(span, 0.0);
    for (const Sample& s : t.samples) {
        const auto i = static_cast<std::size_t>(s.frame - g.first);
        g.present[i] = 1;
        g.x[i] = s.x;
        g.y[i] = s.y;
    }
    return g;
}

/// corr[k] = sum_t a[t] * b[t + k] for k in [0, lags], via zero-padded FFT.
/// Returns the k-indexed real parts of sum over `terms` of weight*corr(a,b).
struct CorrTerm {
    const std::vector<double>* a;
    const std::vector<double>* b;
    double weight;
};

inline std::vector<double> fft_correlate(std::span<const CorrTerm> terms, std::size_t n, std::size_t lags) {
    const std::size_t size = 2 * n;
    auto spectrum = [&](const std::vector<double>& v) {
        std::vector<std::complex<double>> s(size);
        for (std::size_t i = 0; i < n; ++i) s[i] = v[i];
        fft::transform(s, fft::Direction::forward);
        return s;
    };
    std::vector<std::complex<double>> acc(size);
    for (const CorrTerm& term : terms) {
        const auto fa = spectrum(*term.a);
        const auto fb = term.b == term.a ? fa : spectrum(*term.b);
        for (std::size_t i = 0; i < size; ++i) acc[i] += term.weight * std::conj(fa[i]) * fb[i];
    }
    fft::transform(acc, fft::Direction::backward);
    std::vector<double> out(lags + 1);
    for (std::size_t k = 0; k <= lags && k < size; ++k) out[k] = acc[k].real() / static_cast<double>(size);
    return out;
}

/// Sum over pairs (t, t+k) of |r(t+k) - r(t)|^2 and pair counts.
inline LagSums squared_displacement_sums(const Trajectory& t, std::int64_t max_lag) {
    LagSums out(static_cast<std::size_t>(std::max<std::int64_t>(max_lag, 0)));
    if (t.size() < 2 || max_lag < 1) return out;
    Grid g = make_grid(t);
    const std::size_t n = g.present.size();
    const auto lags = static_cast<std::size_t>(max_lag);

    const double work = static_cast<double>(t.size()) * static_cast<double>(lags);
    if (work <= kDirectWorkLimit) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!g.present[i]) continue;
            for (std::size_t k = 1; k <= lags && i + k < n; ++k) {
                if (!g.present[i + k]) continue;
                const double dx = g.x[i + k] - g.x[i];
                const double dy = g.y[i + k] - g.y[i];
                out.sum[k] += dx * dx + dy * dy;
                ++out.count[k];
            }
        }
        return out;
    }

    // Centre positions to reduce cancellation in S - 2C.
    double mx = 0.0, my = 0.0;
    for (const Sample& s : t.samples) {
        mx += s.x;
        my += s.y;
    }
    mx /= static_cast<double>(t.size());
    my /= static_cast<double>(t.size());
    std::vector<double> m(n), mr2(n), px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!g.present[i]) continue;
        const double x = g.x[i] - mx, y = g.y[i] - my;
        m[i] = 1.0;
        mr2[i] = x * x + y * y;
        px[i] = x;
        py[i] = y;
    }
    const CorrTerm sq_terms[] = {{&m, &mr2, 1.0}, {&mr2, &m, 1.0}, {&px, &px, -2.0}, {&py, &py, -2.0}};
    const CorrTerm count_terms[] = {{&m, &m, 1.0}};
    const auto sums = fft_correlate(sq_terms, n, lags);
    const auto counts = fft_correlate(count_terms, n, lags);
    for (std::size_t k = 1; k <= lags; ++k) {
        out.count[k] = std::llround(counts[k]);
        out.sum[k] = out.count[k] > 0 ? std::max(0.0, sums[k]) : 0.0;
    }
    return out;
}

/// Velocity grid: v(t) = (r(t+1) - r(t)) / dt where both frames exist.
inline Grid velocity_grid(const Trajectory& t) {
    Grid g = make_grid(t);
    Grid v;
    v.first = g.first;
    if (g.present.size() < 2) return v;
    const std::size_t n = g.present.size() - 1;
    v.present.assign(n, 0);
    v.x.assign(n, 0.0);
    v.y.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!g.present[i] || !g.present[i + 1]) continue;
        v.present[i] = 1;
        v.x[i] = (g.x[i + 1] - g.x[i]) / t.frame_interval;
        v.y[i] = (g.y[i + 1] - g.y[i]) / t.frame_interval;
    }
    return v;
}

/// Sum over valid velocity pairs (t, t+k) of v(t).v(t+k), k in [0, max_lag].
inline LagSums velocity_product_sums(const Trajectory& t, std::int64_t max_lag) {
    LagSums out(static_cast<std::size_t>(std::max<std::int64_t>(max_lag, 0)));
    const Grid v = velocity_grid(t);
    const std::size_t n = v.present.size();
    const auto lags = static_cast<std::size_t>(std::max<std::int64_t>(max_lag, 0));

    // Lag 0 is always summed directly so that c(0) = 1 exactly.
    for (std::size_t i = 0; i < n; ++i) {
        if (!v.present[i]) continue;
        out.sum[0] += v.x[i] * v.x[i] + v.y[i] * v.y[i];
        ++out.count[0];
    }
    if (lags == 0 || n == 0) return out;

    std::size_t valid = static_cast<std::size_t>(out.count[0]);
    const double work = static_cast<double>(valid) * static_cast<double>(lags);
    if (work <= kDirectWorkLimit) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!v.present[i]) continue;
            for (std::size_t k = 1; k <= lags && i + k < n; ++k) {
                if (!v.present[i + k]) continue;
                out.sum[k] += v.x[i] * v.x[i + k] + v.y[i] * v.y[i + k];
                ++out.count[k];
            }
        }
        return out;
    }
    std::vector<double> m(n), vx(v.x), vy(v.y);
    for (std::size_t i = 0; i < n; ++i) m[i] = v.present[i] ? 1.0 : 0.0;
    const CorrTerm prod_terms[] = {{&vx, &vx, 1.0}, {&vy, &vy, 1.0}};
    const CorrTerm count_terms[] = {{&m, &m, 1.0}};
    const auto sums = fft_correlate(prod_terms, n, lags);
    const auto counts = fft_correlate(count_terms, n, lags);
    for (std::size_t k = 1; k <= lags; ++k) {
        out.count[k] = std::llround(counts[k]);
        out.sum[k] = out.count[k] > 0 ? sums[k] : 0.0;
    }
    return out;
}

inline MsdCurve msd_from_sums(const LagSums& s, double dt) {
    MsdCurve curve;
    for (std::size_t k = 1; k < s.sum.size(); ++k) {
        if (s.count[k] == 0) continue;
        curve.points.push_back({static_cast<double>(k) * dt, s.sum[k] / static_cast<double>(s.count[k]), s.count[k]});
    }
    return curve;
}

inline VacfCurve vacf_from_sums(const LagSums& s, double dt) {
    if (s.count[0] == 0) throw InsufficientDataError("vacf: no valid velocities");
    const double norm = s.sum[0] / static_cast<double>(s.count[0]);
    if (!(norm > 0.0)) throw InsufficientDataError("vacf: zero mean squared velocity");
    VacfCurve curve;
    curve.points.push_back({0.0, norm / norm, s.count[0]});
    for (std::size_t k = 1; k < s.sum.size(); ++k) {
        if (s.count[k] == 0) continue;
        curve.points.push_back({static_cast<double>(k) * dt, (s.sum[k] / static_cast<double>(s.count[k])) / norm, s.count[k]});
    }
    return curve;
}

} // namespace detail

// ---------------------------------------------------------------------------
// MSD

/// Time-averaged MSD: MSD(k dt) = mean over observed pairs (t, t+k) of
/// |r(t+k) - r(t)|^2, for k = 1..max lag. Lags without pairs are omitted.
inline MsdCurve msd(const Trajectory& traj, const LagOptions& opts = {}) {
    if (traj.size() < 2) throw InsufficientDataError("msd: trajectory " + std::to_string(traj.id) + " has fewer than 2 samples");
    const std::int64_t lags = detail::max_lag_for(traj, opts);
    return detail::msd_from_sums(detail::squared_displacement_sums(traj, lags), traj.frame_interval);
}

/// Time-averaged MSD pooled over trajectories: every observed pair of every
/// trajectory carries equal weight. Trajectories shorter than 2 samples are
/// ignored.
inline MsdCurve pooled_msd(std::span<const Trajectory> trajs, const LagOptions& opts = {}) {
    detail::LagSums total;
    double dt = 0.0;
    for (const Trajectory& t : trajs) {
        if (t.size() < 2) continue;
        const auto sums = detail::squared_displacement_sums(t, detail::max_lag_for(t, opts));
        if (sums.sum.size() > total.sum.size()) {
            detail::LagSums grown(sums.sum.size() - 1);
            grown.merge(total);
            total = std::move(grown);
        }
        total.merge(sums);
        dt = t.frame_interval;
    }
    if (dt == 0.0) throw InsufficientDataError("pooled msd: no trajectory with 2 or more samples");
    return detail::msd_from_sums(total, dt);
}

/// Ensemble MSD from a common origin: mean over trajectories of
/// |r(t0 + k) - r(t0)|^2 where t0 is each trajectory's first frame.
inline MsdCurve ensemble_msd(std::span<const Trajectory> trajs, std::int64_t max_lag) {
    detail::LagSums total(static_cast<std::size_t>(std::max<std::int64_t>(max_lag, 0)));
    double dt = 0.0;
    for (const Trajectory& t : trajs) {
        if (t.empty()) continue;
        const Sample& origin = t.samples.front();
        dt = t.frame_interval;
        for (const Sample& s : t.samples) {
            const std::int64_t k = s.frame - origin.frame;
            if (k < 1 || k > max_lag) continue;
            const double dx = s.x - origin.x, dy = s.y - origin.y;
            total.sum[static_cast<std::size_t>(k)] += dx * dx + dy * dy;
            ++total.count[static_cast<std::size_t>(k)];
        }
    }
    if (dt == 0.0) throw InsufficientDataError("ensemble msd: no samples");
    return detail::msd_from_sums(total, dt);
}

// ---------------------------------------------------------------------------
// VACF

/// c(k dt) = <v(t).v(t+k)> / <v(t).v(t)>; velocities exist only between
/// adjacent observed frames and are never interpolated across gaps.
inline VacfCurve vacf(const Trajectory& traj, const LagOptions& opts = {}) {
    if (traj.size() < 3) throw InsufficientDataError("vacf: trajectory " + std::to_string(traj.id) + " has fewer than 3 samples");
    const std::int64_t lags = detail::max_lag_for(traj, opts);
    return detail::vacf_from_sums(detail::velocity_product_sums(traj, lags), traj.frame_interval);
}

inline VacfCurve pooled_vacf(std::span<const Trajectory> trajs, const LagOptions& opts = {}) {
    detail::LagSums total;
    double dt = 0.0;
    for (const Trajectory& t : trajs) {
        if (t.size() < 3) continue;
        const auto sums = detail::velocity_product_sums(t, detail::max_lag_for(t, opts));
        if (sums.sum.size() > total.sum.size()) {
            detail::LagSums grown(sums.sum.size() - 1);
            grown.merge(total);
            total = std::move(grown);
        }
        total.merge(sums);
        dt = t.frame_interval;
    }
    if (dt == 0.0) throw InsufficientDataError("pooled vacf: no trajectory with 3 or more samples");
    return detail::vacf_from_sums(total, dt);
}

// ---------------------------------------------------------------------------
// Displacements

/// Displacements over `lag_frames` for the requested axis; radial gives |dr|,
/// pooled gives dx and dy interleaved.
inline std::vector<double> displacements(const Trajectory& traj, std::int64_t lag_frames, DisplacementAxis axis) {
    if (lag_frames < 1) throw ParameterError("displacement lag must be >= 1 frame");
    std::vector<double> out;
    const auto& s = traj.samples;
    std::size_t j = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::int64_t target = s[i].frame + lag_frames;
        while (j < s.size() && s[j].frame < target) ++j;
        if (j == s.size()) break;
        if (s[j].frame != target) continue;
        const double dx = s[j].x - s[i].x, dy = s[j].y - s[i].y;
        switch (axis) {
        case DisplacementAxis::x: out.push_back(dx); break;
        case DisplacementAxis::y: out.push_back(dy); break;
        case DisplacementAxis::radial: out.push_back(std::hypot(dx, dy)); break;
        case DisplacementAxis::pooled:
            out.push_back(dx);
            out.push_back(dy);
            break;
        }
    }
    return out;
}

/// Sample excess kurtosis m4 / m2^2 - 3 (population moments).
inline double excess_kurtosis(std::span<const double> values) {
    if (values.size() < 2) throw InsufficientDataError("kurtosis needs at least 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double m2 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d2 = (v - mean) * (v - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(values.size());
    m4 /= static_cast<double>(values.size());
    if (m2 == 0.0) return 0.0;
    return m4 / (m2 * m2) - 3.0;
}

/// Normalized histogram of displacement values. The range is mean +- 5 sd
/// intersected with the data extent; values outside it are counted in
/// n_excluded and left out of the density.
inline DisplacementHist histogram(std::span<const double> values, std::size_t n_bins, double tau, DisplacementAxis axis) {
    if (values.empty()) throw InsufficientDataError("displacement histogram: no samples");
    if (n_bins == 0) throw ParameterError("n_bins must be >= 1");
    DisplacementHist h;
    h.tau = tau;
    h.axis = axis;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    h.mean = mean;
    h.stddev = sd;
    h.excess_kurtosis = values.size() > 1 ? excess_kurtosis(values) : 0.0;

    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = std::max(*mn, mean - 5.0 * sd);
    double hi = std::min(*mx, mean + 5.0 * sd);
    if (!(hi > lo)) {
        lo = mean - 0.5;
        hi = mean + 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(n_bins);
    h.bin_edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) h.bin_edges[i] = lo + width * static_cast<double>(i);
    h.bin_edges.back() = hi;

    std::vector<std::int64_t> counts(n_bins, 0);
    for (double v : values) {
        if (v < lo || v > hi) {
            ++h.n_excluded;
            continue;
        }
        auto bin = static_cast<std::size_t>((v - lo) / width);
        bin = std::min(bin, n_bins - 1);
        ++counts[bin];
        ++h.n_samples;
    }
    h.density.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        h.density[i] = static_cast<double>(counts[i]) /
                       (static_cast<double>(h.n_samples) * (h.bin_edges[i + 1] - h.bin_edges[i]));
    return h;
}

/// Normalized displacement PDF over `lag_frames` for one trajectory.
inline DisplacementHist displacement_pdf(const Trajectory& traj, std::int64_t lag_frames, std::size_t n_bins,
                                         DisplacementAxis axis = DisplacementAxis::pooled) {
    const auto values = displacements(traj, lag_frames, axis);
    if (values.empty())
        throw InsufficientDataError("displacement pdf: no pairs at lag " + std::to_string(lag_frames) +
                                    " in trajectory " + std::to_string(traj.id));
    return histogram(values, n_bins, static_cast<double>(lag_frames) * traj.frame_interval, axis);
}

/// Per-axis Gaussian PDF for free diffusion: N(0, 2 D tau).
struct GaussianReference {
    double variance = 0.0;

    [[nodiscard]] double operator()(double dx) const noexcept {
        return std::exp(-dx * dx / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
    }
    /// Density at each bin centre.
    [[nodiscard]] std::vector<double> on_bins(std::span<const double> edges) const {
        std::vector<double> out;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) out.push_back((*this)(0.5 * (edges[i] + edges[i + 1])));
        return out;
    }
};

inline GaussianReference gaussian_reference(double diffusion_coefficient, double tau) {
    if (!(diffusion_coefficient > 0.0) || !(tau > 0.0))
        throw ParameterError("gaussian reference needs D > 0 and tau > 0");
    return {2.0 * diffusion_coefficient * tau};
}

// ---------------------------------------------------------------------------
// Fits

struct DiffusionFit {
    double diffusion_coefficient = 0.0; // length^2/s, from MSD = 4 D tau
    double alpha = 0.0;                  // slope of log MSD vs log tau
    std::size_t n_points = 0;            // points in the linear fit
    std::size_t n_log_points = 0;        // points with MSD > 0 in the log fit
};

/// Unweighted least squares over the first `fit_lags` points: D through the
/// origin of MSD = 4 D tau, alpha from an ordinary log-log line fit.
inline DiffusionFit fit_diffusion(const MsdCurve& curve, std::size_t fit_lags = 10) {
    if (fit_lags < 2) throw ParameterError("fit_lags must be >= 2");
    if (curve.points.size() < fit_lags)
        throw InsufficientDataError("fit_diffusion: curve has " + std::to_string(curve.points.size()) +
                                    " points, need " + std::to_string(fit_lags));
    DiffusionFit fit;
    fit.n_points = fit_lags;
    double st = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < fit_lags; ++i) {
        st += curve.points[i].tau * curve.points[i].msd;
        stt += curve.points[i].tau * curve.points[i].tau;
    }
    fit.diffusion_coefficient = st / (4.0 * stt);

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < fit_lags; ++i) {
        const auto& p = curve.points[i];
        if (!(p.msd > 0.0) || !(p.tau > 0.0)) continue;
        const double lx = std::log(p.tau), ly = std::log(p.msd);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    fit.n_log_points = n;
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (n < 2 || denom == 0.0) throw FitError("fit_diffusion: fewer than 2 positive MSD points for the log-log fit");
    fit.alpha = (static_cast<double>(n) * sxy - sx * sy) / denom;
    return fit;
}

} // namespace lptem
