#pragma once

// Ground-truth trajectory generators: 2-D Brownian motion and fractional
// Brownian motion (fBm) with boundary handling. All generators are pure
// functions of (params, seed).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "lptem/error.hpp"
#include "lptem/fft.hpp"
#include "lptem/rng.hpp"
#include "lptem/trajectory.hpp"

namespace lptem {

enum class BoundaryMode { reflect, periodic, open };

inline std::string_view to_string(BoundaryMode m) {
    switch (m) {
    case BoundaryMode::reflect: return "reflect";
    case BoundaryMode::periodic: return "periodic";
    case BoundaryMode::open: return "open";
    }
    return "?";
}

inline BoundaryMode parse_boundary_mode(std::string_view s) {
    if (s == "reflect") return BoundaryMode::reflect;
    if (s == "periodic") return BoundaryMode::periodic;
    if (s == "open") return BoundaryMode::open;
    throw ParameterError("unknown boundary mode '" + std::string(s) + "'");
}

struct FieldOfView {
    double width = 256.0;  // nm
    double height = 256.0; // nm
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

struct DiffusionParams {
    double diffusion_coefficient = 1.0; // nm^2/s
    double hurst = 0.5;
    double frame_interval = 1.0; // s
    std::int64_t n_frames = 50;
    FieldOfView fov{};
    BoundaryMode boundary = BoundaryMode::reflect;
    std::optional<Point2> start; // nullopt: uniform random inside fov
};

inline void validate(const DiffusionParams& p) {
    if (!(p.diffusion_coefficient >= 0.0) || !std::isfinite(p.diffusion_coefficient))
        throw ParameterError("diffusion coefficient must be finite and >= 0");
    if (!(p.hurst > 0.0 && p.hurst < 1.0)) throw ParameterError("hurst exponent must lie in (0, 1)");
    if (!(p.frame_interval > 0.0)) throw ParameterError("frame interval must be > 0");
    if (p.n_frames < 1) throw ParameterError("n_frames must be >= 1");
    if (!(p.fov.width > 0.0 && p.fov.height > 0.0)) throw ParameterError("field of view must be positive");
    if (p.start) {
        const auto [x, y] = *p.start;
        if (!(x >= 0.0 && x <= p.fov.width && y >= 0.0 && y <= p.fov.height))
            throw ParameterError("start position lies outside the field of view");
    }
}

// ---------------------------------------------------------------------------
// Boundaries

/// Folds `x` into [0, length] by mirror reflection.
inline double reflect_into(double x, double length) {
    const double period = 2.0 * length;
    double y = x - period * std::floor(x / period);
    if (y > length) y = period - y;
    return y;
}

/// Wraps `x` into [0, length).
inline double wrap_into(double x, double length) {
    double y = x - length * std::floor(x / length);
    return y >= length ? 0.0 : y;
}

inline Trajectory apply_boundary(Trajectory traj, BoundaryMode mode, const FieldOfView& fov) {
    if (mode == BoundaryMode::open) return traj;
    for (Sample& s : traj.samples) {
        if (mode == BoundaryMode::reflect) {
            s.x = reflect_into(s.x, fov.width);
            s.y = reflect_into(s.y, fov.height);
        } else {
            s.x = wrap_into(s.x, fov.width);
            s.y = wrap_into(s.y, fov.height);
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Fractional Gaussian noise

/// Autocovariance of fGn with unit-lag variance `variance`:
/// gamma(k) = variance/2 * (|k+1|^2H - 2|k|^2H + |k-1|^2H).
inline double fgn_autocovariance(std::int64_t lag, double hurst, double variance) {
    const double k = std::abs(static_cast<double>(lag));
    const double h2 = 2.0 * hurst;
    return 0.5 * variance * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
}

enum class FgnMethod { davies_harte, cholesky };

inline std::string_view to_string(FgnMethod m) {
    return m == FgnMethod::davies_harte ? "davies-harte" : "cholesky";
}

/// Two independent fGn series of equal length (one per axis).
struct FgnPair {
    std::vector<double> x;
    std::vector<double> y;
    FgnMethod method = FgnMethod::davies_harte;
};

/// Largest series the dense Cholesky fallback accepts.
inline constexpr std::size_t kCholeskyMaxLength = 4096;

/// Circulant-embedding eigenvalues for a length-n series (embedding size 2n).
inline std::vector<double> davies_harte_eigenvalues(std::size_t n, double hurst, double variance) {
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= n; ++k)
        row[k] = fgn_autocovariance(static_cast<std::int64_t>(k), hurst, variance);
    for (std::size_t k = n + 1; k < m; ++k) row[k] = row[m - k];
    fft::transform(row, fft::Direction::forward);
    std::vector<double> eig(m);
    for (std::size_t k = 0; k < m; ++k) eig[k] = row[k].real();
    return eig;
}

namespace detail {

inline std::optional<FgnPair> fgn_davies_harte(std::size_t n, double hurst, double variance, Engine& rng) {
    const std::vector<double> eig = davies_harte_eigenvalues(n, hurst, variance);
    const double peak = *std::max_element(eig.begin(), eig.end());
    const double floor = -1e-10 * std::max(peak, 1e-300);
    for (double e : eig)
        if (e < floor) return std::nullopt;

    // Complex Gaussian weights; the real and imaginary parts of the transform
    // are two independent exact samples.
    const std::size_t m = eig.size();
    std::vector<std::complex<double>> w(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double re = standard_normal(rng);
        const double im = standard_normal(rng);
        const double scale = std::sqrt(std::max(eig[k], 0.0) / static_cast<double>(m));
        w[k] = {scale * re, scale * im};
    }
    fft::transform(w, fft::Direction::forward);
    FgnPair out;
    out.method = FgnMethod::davies_harte;
    out.x.resize(n);
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.x[i] = w[i].real();
        out.y[i] = w[i].imag();
    }
    return out;
}

inline FgnPair fgn_cholesky(std::size_t n, double hurst, double variance, Engine& rng) {
    if (n > kCholeskyMaxLength)
        throw ParameterError("fGn Cholesky path limited to " + std::to_string(kCholeskyMaxLength) +
                             " samples, requested " + std::to_string(n));
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cov(i, j) = fgn_autocovariance(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j),
                                           hurst, variance);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw ParameterError("fGn covariance is not positive definite");
    Eigen::VectorXd zx(n), zy(n);
    for (std::size_t i = 0; i < n; ++i) {
        zx[i] = standard_normal(rng);
        zy[i] = standard_normal(rng);
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::VectorXd gx = lower * zx;
    const Eigen::VectorXd gy = lower * zy;
    FgnPair out;
    out.method = FgnMethod::cholesky;
    out.x.assign(gx.data(), gx.data() + n);
    out.y.assign(gy.data(), gy.data() + n);
    return out;
}

} // namespace detail

/// Samples two independent fGn series of length n with per-step variance
/// `variance`. Davies-Harte is tried first unless `method` forces Cholesky;
/// the returned pair records which path produced it.
inline FgnPair fgn_pair(std::size_t n, double hurst, double variance, Engine& rng,
                        FgnMethod method = FgnMethod::davies_harte) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterError("hurst exponent must lie in (0, 1)");
    if (!(variance >= 0.0)) throw ParameterError("fGn variance must be >= 0");
    if (n == 0) return FgnPair{{}, {}, method};
    if (method == FgnMethod::davies_harte) {
        if (auto pair = detail::fgn_davies_harte(n, hurst, variance, rng)) return *std::move(pair);
    }
    return detail::fgn_cholesky(n, hurst, variance, rng);
}

// ---------------------------------------------------------------------------
// Trajectory generators

namespace detail {

inline Point2 initial_position(const DiffusionParams& p, Engine& rng) {
    if (p.start) return *p.start;
    const double x = uniform01(rng) * p.fov.width;
    const double y = uniform01(rng) * p.fov.height;
    return {x, y};
}

inline Trajectory integrate(const DiffusionParams& p, Point2 origin, std::span<const double> dx,
                            std::span<const double> dy) {
    Trajectory traj;
    traj.id = 1;
    traj.frame_interval = p.frame_interval;
    traj.samples.reserve(static_cast<std::size_t>(p.n_frames));
    double x = origin.x;
    double y = origin.y;
    traj.samples.push_back({0, x, y, std::nullopt});
    for (std::size_t i = 0; i < dx.size(); ++i) {
        x += dx[i];
        y += dy[i];
        traj.samples.push_back({static_cast<std::int64_t>(i + 1), x, y, std::nullopt});
    }
    return apply_boundary(std::move(traj), p.boundary, p.fov);
}

} // namespace detail

/// Brownian motion: per-axis increments i.i.d. N(0, 2 D dt) before the
/// boundary is applied. Trajectory id is 1; callers renumber.
inline Trajectory gen_brownian(const DiffusionParams& params, std::uint64_t seed) {
    validate(params);
    Engine rng = make_engine(seed, kDomainTrajectory, 0);
    const Point2 origin = detail::initial_position(params, rng);
    const auto steps = static_cast<std::size_t>(params.n_frames - 1);
    const double sigma = std::sqrt(2.0 * params.diffusion_coefficient * params.frame_interval);
    std::vector<double> dx(steps), dy(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        dx[i] = sigma * standard_normal(rng);
        dy[i] = sigma * standard_normal(rng);
    }
    return detail::integrate(params, origin, dx, dy);
}

struct FbmResult {
    Trajectory trajectory;
    FgnMethod method = FgnMethod::davies_harte;
};

/// Fractional Brownian motion with Hurst exponent params.hurst; per-axis
/// increments are fGn with unit-lag variance 2 D dt.
inline FbmResult gen_fbm(const DiffusionParams& params, std::uint64_t seed,
                         FgnMethod method = FgnMethod::davies_harte) {
    validate(params);
    Engine rng = make_engine(seed, kDomainTrajectory, 0);
    const Point2 origin = detail::initial_position(params, rng);
    const auto steps = static_cast<std::size_t>(params.n_frames - 1);
    const double variance = 2.0 * params.diffusion_coefficient * params.frame_interval;
    FgnPair noise = fgn_pair(steps, params.hurst, variance, rng, method);
    return {detail::integrate(params, origin, noise.x, noise.y), noise.method};
}

} // namespace lptem
