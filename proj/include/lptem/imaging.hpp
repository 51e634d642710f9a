#pragma once

// Synthetic LPTEM frame formation.
//
// Model: dark particles on a bright background (mass-thickness contrast).
//   ideal(p)   = B * (1 - c * [p inside a particle silhouette])
//   c          = c0 * exp(-thickness / attenuation_length)
//   B          = dose_rate * (pixel_size in A)^2 * exposure   (unless overridden)
//   observed   = clamp(round(Poisson(gauss_blur(ideal)) + N(0, read_noise^2)), 0, 65535)
// Pixel (i, j) covers [i, i+1) x [j, j+1) in pixel units; its centre sits at
// ((i + 0.5) * pixel_size, (j + 0.5) * pixel_size) nm.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lptem/error.hpp"
#include "lptem/image.hpp"
#include "lptem/parallel.hpp"
#include "lptem/rng.hpp"
#include "lptem/trajectory.hpp"

namespace lptem {

struct ParticleShape {
    enum class Kind { disc, ellipse };
    Kind kind = Kind::disc;
    double semi_major = 10.0; // nm; disc radius
    double semi_minor = 10.0; // nm; ignored for discs

    [[nodiscard]] double extent() const noexcept {
        return kind == Kind::disc ? semi_major : std::max(semi_major, semi_minor);
    }
    [[nodiscard]] double minor() const noexcept {
        return kind == Kind::disc ? semi_major : semi_minor;
    }
};

inline std::string_view to_string(ParticleShape::Kind k) {
    return k == ParticleShape::Kind::disc ? "disc" : "ellipse";
}

struct SceneConfig {
    std::size_t image_width = 1024;  // px
    std::size_t image_height = 1024; // px
    double pixel_size = 0.25;        // nm/px
    double thickness = 50.0;         // nm
    double dose_rate = 35.0;         // e-/A^2/s
    double exposure = 1.0;           // s/frame
    ParticleShape shape{};
    double base_contrast = 0.3;
    double attenuation_length = 67.0; // nm
    double psf_sigma = 1.0;           // px
    double read_noise_sigma = 2.0;    // counts
    std::optional<double> background_level; // counts/px; derived from dose when unset

    [[nodiscard]] double fov_width() const noexcept { return static_cast<double>(image_width) * pixel_size; }
    [[nodiscard]] double fov_height() const noexcept { return static_cast<double>(image_height) * pixel_size; }
};

/// Liquid thicknesses (nm) the training set samples from.
inline constexpr std::array<double, 9> kThicknessGrid{5, 10, 25, 50, 75, 100, 125, 150, 160};

inline double background_counts(const SceneConfig& cfg) {
    if (cfg.background_level) return *cfg.background_level;
    const double pixel_angstrom = cfg.pixel_size * 10.0;
    return cfg.dose_rate * pixel_angstrom * pixel_angstrom * cfg.exposure;
}

inline double effective_contrast(const SceneConfig& cfg) {
    return cfg.base_contrast * std::exp(-cfg.thickness / cfg.attenuation_length);
}

inline void validate(const SceneConfig& cfg) {
    if (cfg.image_width == 0 || cfg.image_height == 0) throw ParameterError("image size must be positive");
    if (cfg.image_width > 65535 || cfg.image_height > 65535) throw ParameterError("image size too large");
    if (!(cfg.pixel_size > 0.0)) throw ParameterError("pixel_size must be > 0");
    if (!(cfg.thickness >= 0.0)) throw ParameterError("thickness must be >= 0");
    if (!(cfg.dose_rate >= 0.0)) throw ParameterError("dose_rate must be >= 0");
    if (!(cfg.exposure >= 0.0)) throw ParameterError("exposure must be >= 0");
    // c0 = 0 is accepted: it produces pure-noise frames with intact masks.
    if (!(cfg.base_contrast >= 0.0 && cfg.base_contrast <= 1.0))
        throw ParameterError("base_contrast must lie in [0, 1]");
    if (!(cfg.attenuation_length > 0.0)) throw ParameterError("attenuation_length must be > 0");
    if (!(cfg.psf_sigma >= 0.0)) throw ParameterError("psf_sigma must be >= 0");
    if (!(cfg.read_noise_sigma >= 0.0)) throw ParameterError("read_noise_sigma must be >= 0");
    if (cfg.background_level && !(*cfg.background_level >= 0.0))
        throw ParameterError("background_level must be >= 0");
    const double half_fov = 0.5 * std::min(cfg.fov_width(), cfg.fov_height());
    if (!(cfg.shape.semi_major > 0.0) || !(cfg.shape.minor() > 0.0))
        throw ParameterError("particle dimensions must be > 0");
    if (!(cfg.shape.extent() < half_fov))
        throw ParameterError("particle dimensions must be smaller than half the field of view");
}

/// Particle pose in nm / rad.
struct ParticlePose {
    int id = 1;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

/// Continuous pixel coordinate of a nm position; pixel centres sit at integers.
inline double nm_to_px(double nm, double pixel_size) { return nm / pixel_size - 0.5; }
inline double px_to_nm(double px, double pixel_size) { return (px + 0.5) * pixel_size; }

/// Ground-truth silhouettes. Contested pixels go to the lowest id.
inline LabelImage rasterize_labels(std::span<const ParticlePose> poses, const SceneConfig& cfg) {
    LabelImage mask(cfg.image_width, cfg.image_height, 0);
    std::vector<ParticlePose> sorted(poses.begin(), poses.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    const double a = cfg.shape.semi_major;
    const double b = cfg.shape.minor();
    const double reach = cfg.shape.extent() / cfg.pixel_size + 1.0;
    const auto w = static_cast<std::ptrdiff_t>(cfg.image_width);
    const auto h = static_cast<std::ptrdiff_t>(cfg.image_height);

    for (const ParticlePose& p : sorted) {
        if (p.id < 1 || p.id > 65535) throw InputError("particle id out of range: " + std::to_string(p.id));
        const double cx = nm_to_px(p.x, cfg.pixel_size);
        const double cy = nm_to_px(p.y, cfg.pixel_size);
        const auto x0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(cx - reach)));
        const auto x1 = std::min<std::ptrdiff_t>(w - 1, static_cast<std::ptrdiff_t>(std::ceil(cx + reach)));
        const auto y0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(cy - reach)));
        const auto y1 = std::min<std::ptrdiff_t>(h - 1, static_cast<std::ptrdiff_t>(std::ceil(cy + reach)));
        const double c = std::cos(p.theta);
        const double s = std::sin(p.theta);
        for (std::ptrdiff_t j = y0; j <= y1; ++j) {
            for (std::ptrdiff_t i = x0; i <= x1; ++i) {
                const double dx = (static_cast<double>(i) + 0.5) * cfg.pixel_size - p.x;
                const double dy = (static_cast<double>(j) + 0.5) * cfg.pixel_size - p.y;
                const double u = (dx * c + dy * s) / a;
                const double v = (-dx * s + dy * c) / b;
                if (u * u + v * v <= 1.0) {
                    auto& px = mask(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                    if (px == 0) px = static_cast<std::uint16_t>(p.id);
                }
            }
        }
    }
    return mask;
}

/// Separable Gaussian blur with clamp-to-edge borders; sigma 0 is identity.
inline ImageF gaussian_blur(const ImageF& src, double sigma) {
    if (sigma <= 0.0 || src.empty()) return src;
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double norm = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        norm += v;
    }
    for (double& v : kernel) v /= norm;

    const auto w = static_cast<std::ptrdiff_t>(src.width());
    const auto h = static_cast<std::ptrdiff_t>(src.height());
    auto clampi = [](std::ptrdiff_t v, std::ptrdiff_t hi) { return std::clamp<std::ptrdiff_t>(v, 0, hi - 1); };

    ImageF tmp(src.width(), src.height());
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       src(static_cast<std::size_t>(clampi(x + k, w)), static_cast<std::size_t>(y));
            tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
        }
    ImageF out(src.width(), src.height());
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(clampi(y + k, h)));
            out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
        }
    return out;
}

/// Noise-free expected counts, after PSF blur.
inline ImageF expected_counts(const LabelImage& silhouettes, const SceneConfig& cfg) {
    const double bg = background_counts(cfg);
    const double particle = bg * (1.0 - effective_contrast(cfg));
    ImageF ideal(silhouettes.width(), silhouettes.height());
    auto src = silhouettes.pixels();
    auto dst = ideal.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] != 0 ? particle : bg;
    return gaussian_blur(ideal, cfg.psf_sigma);
}

/// Draws detector counts for each pixel of `expected`.
inline Image16 sample_counts(const ImageF& expected, const SceneConfig& cfg, Engine& rng) {
    Image16 out(expected.width(), expected.height());
    auto src = expected.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        double v = static_cast<double>(poisson(rng, src[i]));
        if (cfg.read_noise_sigma > 0.0) v += cfg.read_noise_sigma * standard_normal(rng);
        dst[i] = static_cast<std::uint16_t>(std::clamp(std::nearbyint(v), 0.0, 65535.0));
    }
    return out;
}

struct RenderedFrame {
    Image16 image;
    LabelImage mask;
};

/// Renders one noisy frame plus its ground-truth label mask.
inline RenderedFrame render_frame(std::span<const ParticlePose> poses, const SceneConfig& cfg, Engine& rng) {
    validate(cfg);
    for (const ParticlePose& p : poses)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.theta))
            throw InputError("non-finite particle pose for id " + std::to_string(p.id));
    RenderedFrame out;
    out.mask = rasterize_labels(poses, cfg);
    out.image = sample_counts(expected_counts(out.mask, cfg), cfg, rng);
    return out;
}

// ---------------------------------------------------------------------------
// Videos

struct FrameMeta {
    double pixel_size = 0.0;
    double exposure = 0.0;
    std::uint64_t seed = 0;
    double thickness = 0.0;
    std::string config_hash;
};

struct FrameStack {
    std::vector<Image16> frames;
    FrameMeta meta;
};

/// FNV-1a 64-bit, hex encoded.
inline std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Canonical one-line description of every SceneConfig field.
inline std::string canonical_string(const SceneConfig& cfg) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "w=%zu;h=%zu;px=%.17g;t=%.17g;dose=%.17g;exp=%.17g;shape=%s;a=%.17g;b=%.17g;c0=%.17g;"
                  "lambda=%.17g;psf=%.17g;read=%.17g;bg=%.17g",
                  cfg.image_width, cfg.image_height, cfg.pixel_size, cfg.thickness, cfg.dose_rate,
                  cfg.exposure, std::string(to_string(cfg.shape.kind)).c_str(), cfg.shape.semi_major,
                  cfg.shape.minor(), cfg.base_contrast, cfg.attenuation_length, cfg.psf_sigma,
                  cfg.read_noise_sigma, background_counts(cfg));
    return buf;
}

struct FrameRange {
    std::int64_t first = 0;
    std::int64_t last = -1;
    [[nodiscard]] std::size_t count() const noexcept {
        return last < first ? 0 : static_cast<std::size_t>(last - first + 1);
    }
};

/// Common frame range of `trajs`; InputError if they disagree.
inline FrameRange shared_frame_range(std::span<const Trajectory> trajs) {
    if (trajs.empty()) throw InputError("no trajectories to render");
    FrameRange range;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        validate(trajs[i]);
        if (trajs[i].empty()) throw InputError("trajectory " + std::to_string(trajs[i].id) + " is empty");
        const FrameRange r{trajs[i].samples.front().frame, trajs[i].samples.back().frame};
        if (i == 0) {
            range = r;
        } else if (r.first != range.first || r.last != range.last) {
            throw InputError("trajectories do not share a frame range (id " + std::to_string(trajs[i].id) +
                             " spans " + std::to_string(r.first) + ".." + std::to_string(r.last) +
                             ", expected " + std::to_string(range.first) + ".." +
                             std::to_string(range.last) + ")");
        }
    }
    return range;
}

/// Poses of every particle present at `frame`.
inline std::vector<ParticlePose> poses_at(std::span<const Trajectory> trajs, std::int64_t frame) {
    std::vector<ParticlePose> poses;
    for (const Trajectory& t : trajs) {
        auto it = std::lower_bound(t.samples.begin(), t.samples.end(), frame,
                                   [](const Sample& s, std::int64_t f) { return s.frame < f; });
        if (it != t.samples.end() && it->frame == frame)
            poses.push_back({t.id, it->x, it->y, it->theta.value_or(0.0)});
    }
    return poses;
}

/// Receives frames in index order: (index within range, frame number, rendered frame).
using FrameSink = std::function<void(std::size_t, std::int64_t, RenderedFrame&&)>;

/// Renders every frame of the shared range of `trajs` (nm coordinates) and
/// hands them to `sink` in order. Frame k uses RNG substream (seed, k), so the
/// output does not depend on `threads`.
inline FrameMeta simulate_video(std::span<const Trajectory> trajs, const SceneConfig& cfg, std::uint64_t seed,
                                const FrameSink& sink, unsigned threads = 1) {
    validate(cfg);
    const FrameRange range = shared_frame_range(trajs);
    const std::size_t n = range.count();
    const std::size_t batch = std::max<std::size_t>(1, threads);
    for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t count = std::min(batch, n - start);
        std::vector<RenderedFrame> rendered(count);
        parallel_for(count, threads, [&](std::size_t k) {
            const std::size_t index = start + k;
            const std::int64_t frame = range.first + static_cast<std::int64_t>(index);
            Engine rng = make_engine(seed, kDomainFrame, index);
            const auto poses = poses_at(trajs, frame);
            rendered[k] = render_frame(poses, cfg, rng);
        });
        for (std::size_t k = 0; k < count; ++k)
            sink(start + k, range.first + static_cast<std::int64_t>(start + k), std::move(rendered[k]));
    }
    return FrameMeta{cfg.pixel_size, cfg.exposure, seed, cfg.thickness, fnv1a_hex(canonical_string(cfg))};
}

struct Video {
    FrameStack stack;
    std::vector<LabelImage> masks;
    std::vector<Trajectory> ground_truth; // continuous nm positions
};

/// In-memory variant of simulate_video.
inline Video simulate_video(std::span<const Trajectory> trajs, const SceneConfig& cfg, std::uint64_t seed,
                            unsigned threads = 1) {
    Video video;
    video.stack.meta = simulate_video(
        trajs, cfg, seed,
        [&](std::size_t, std::int64_t, RenderedFrame&& f) {
            video.stack.frames.push_back(std::move(f.image));
            video.masks.push_back(std::move(f.mask));
        },
        threads);
    video.ground_truth.assign(trajs.begin(), trajs.end());
    return video;
}

// ---------------------------------------------------------------------------
// SNR

/// |mean(background) - mean(particle)| / stddev(background), with the
/// particle region taken from the nonzero pixels of `mask`.
template <typename MaskT>
double measure_snr(const Image16& image, const Image<MaskT>& mask) {
    require_same_shape(image, mask, "measure_snr");
    double fg_sum = 0.0, bg_sum = 0.0, bg_sq = 0.0;
    std::size_t fg_n = 0, bg_n = 0;
    auto px = image.pixels();
    auto mk = mask.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double v = px[i];
        if (mk[i] != 0) {
            fg_sum += v;
            ++fg_n;
        } else {
            bg_sum += v;
            ++bg_n;
        }
    }
    if (fg_n == 0) throw UndefinedSnrError("SNR undefined: mask has no foreground pixels");
    if (bg_n < 2) throw UndefinedSnrError("SNR undefined: mask has fewer than two background pixels");
    const double bg_mean = bg_sum / static_cast<double>(bg_n);
    for (std::size_t i = 0; i < px.size(); ++i)
        if (mk[i] == 0) bg_sq += (px[i] - bg_mean) * (px[i] - bg_mean);
    const double bg_sd = std::sqrt(bg_sq / static_cast<double>(bg_n - 1));
    if (bg_sd == 0.0) throw UndefinedSnrError("SNR undefined: background has zero variance");
    return std::abs(bg_mean - fg_sum / static_cast<double>(fg_n)) / bg_sd;
}

} // namespace lptem
