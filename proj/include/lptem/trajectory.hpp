#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lptem/error.hpp"

namespace lptem {

/// One observation of a particle. Coordinates are in whatever length unit the
/// owning Trajectory uses (nm for generated/ground-truth tracks, px before
/// calibration).
struct Sample {
    std::int64_t frame = 0;
    double x = 0.0;
    double y = 0.0;
    std::optional<double> theta; // rad

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// Ordered samples of one particle. Frames strictly increase; gaps are missed
/// frames.
struct Trajectory {
    int id = 0;
    std::vector<Sample> samples;
    double frame_interval = 1.0; // s

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Throws InputError unless frames strictly increase and every coordinate is
/// finite.
inline void validate(const Trajectory& traj) {
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const Sample& s = traj.samples[i];
        if (!std::isfinite(s.x) || !std::isfinite(s.y) ||
            (s.theta && !std::isfinite(*s.theta))) {
            throw InputError("trajectory " + std::to_string(traj.id) +
                             ": non-finite coordinate at frame " + std::to_string(s.frame));
        }
        if (i > 0 && s.frame <= traj.samples[i - 1].frame) {
            throw InputError("trajectory " + std::to_string(traj.id) +
                             ": frames not strictly increasing at frame " +
                             std::to_string(s.frame));
        }
    }
    if (!(traj.frame_interval > 0.0)) {
        throw InputError("trajectory " + std::to_string(traj.id) + ": frame_interval must be > 0");
    }
}

/// Multiplies all positions by `factor` (e.g. px -> nm).
inline Trajectory scaled(Trajectory traj, double factor) {
    for (Sample& s : traj.samples) {
        s.x *= factor;
        s.y *= factor;
    }
    return traj;
}

} // namespace lptem
