#pragma once

// Run configuration: one JSON document with sections simulate / track /
// stats / eval. Every field has a default, unknown keys are rejected, and
// to_json(parse(x)) is a fixed point.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lptem/error.hpp"
#include "lptem/imaging.hpp"
#include "lptem/segmetrics.hpp"
#include "lptem/tracklink.hpp"
#include "lptem/trajgen.hpp"
#include "lptem/trajstats.hpp"

namespace lptem {

using Json = nlohmann::ordered_json;

enum class MotionModel { brownian, fbm };

inline std::string_view to_string(MotionModel m) { return m == MotionModel::brownian ? "brownian" : "fbm"; }

struct SimulateConfig {
    std::optional<std::uint64_t> seed;  // required by simulate
    std::optional<int> n_particles = 1; // nullopt: drawn from n_particles_range
    int n_particles_min = 1;
    int n_particles_max = 8;
    MotionModel model = MotionModel::brownian;
    DiffusionParams diffusion{};        // fov and start are derived from the scene
    double rotational_diffusion = 0.0;  // rad^2/s
    bool random_thickness = false;      // draw scene.thickness from kThicknessGrid
    SceneConfig scene{};
};

struct TrackConfig {
    LinkConfig link{};
    std::int64_t min_area = 4;
    MaskKind mask_kind = MaskKind::labels;
};

struct StatsConfig {
    double max_lag_fraction = 0.25;
    std::optional<std::int64_t> max_lag;
    std::size_t bins = 50;
    std::int64_t hist_lag = 1; // frames
    DisplacementAxis axis = DisplacementAxis::pooled;
    std::size_t fit_lags = 10;

    [[nodiscard]] LagOptions lag_options() const { return {max_lag_fraction, max_lag}; }
};

struct EvalConfig {
    std::optional<double> tolerance; // px
    IdCorrespondence correspondence = IdCorrespondence::max_iou;
};

struct RunConfig {
    SimulateConfig simulate;
    TrackConfig track;
    StatsConfig stats;
    EvalConfig eval;
};

inline constexpr int kConfigVersion = 1;

namespace detail {

/// Strict reader over one JSON object; remembers the dotted path for errors.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    void allow(std::initializer_list<std::string_view> keys) const {
        for (const auto& [k, _] : j_.items()) {
            bool ok = false;
            for (auto a : keys) ok = ok || a == k;
            if (!ok) throw ConfigError("unknown config key '" + child(k) + "'");
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }
    [[nodiscard]] const Json& at(const std::string& key) const { return j_.at(key); }
    [[nodiscard]] std::string child(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    void number(const std::string& key, double& out) const {
        if (!has(key)) return;
        const Json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError("config key '" + child(key) + "' must be a number");
        out = v.get<double>();
    }
    template <typename Int>
    void integer(const std::string& key, Int& out) const {
        if (!has(key)) return;
        const Json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError("config key '" + child(key) + "' must be an integer");
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
                out = v.get<Int>();
                return;
            }
            throw ConfigError("config key '" + child(key) + "' must be >= 0");
        } else {
            out = v.get<Int>();
        }
    }
    void optional_number(const std::string& key, std::optional<double>& out) const {
        if (!has(key)) return;
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        double v = 0.0;
        number(key, v);
        out = v;
    }
    template <typename Int>
    void optional_integer(const std::string& key, std::optional<Int>& out) const {
        if (!has(key)) return;
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        Int v{};
        integer(key, v);
        out = v;
    }
    void string(const std::string& key, std::string& out) const {
        if (!has(key)) return;
        if (!j_.at(key).is_string()) throw ConfigError("config key '" + child(key) + "' must be a string");
        out = j_.at(key).get<std::string>();
    }
    /// Parses a string field with `parse`; parse errors are reported against the key.
    template <typename T, typename Parse>
    void choice(const std::string& key, T& out, Parse parse) const {
        if (!has(key)) return;
        std::string s;
        string(key, s);
        try {
            out = parse(s);
        } catch (const Error& e) {
            throw ConfigError("config key '" + child(key) + "': " + e.what());
        }
    }

private:
    [[nodiscard]] std::string where() const { return path_.empty() ? std::string("config") : "config key '" + path_ + "'"; }

    const Json& j_;
    std::string path_;
};

inline MotionModel parse_model(std::string_view s) {
    if (s == "brownian") return MotionModel::brownian;
    if (s == "fbm") return MotionModel::fbm;
    throw ParameterError("unknown model '" + std::string(s) + "' (expected brownian or fbm)");
}

inline ParticleShape::Kind parse_shape(std::string_view s) {
    if (s == "disc") return ParticleShape::Kind::disc;
    if (s == "ellipse") return ParticleShape::Kind::ellipse;
    throw ParameterError("unknown shape '" + std::string(s) + "' (expected disc or ellipse)");
}

inline MaskKind parse_mask_kind(std::string_view s) {
    if (s == "labels") return MaskKind::labels;
    if (s == "binary") return MaskKind::binary;
    throw ParameterError("unknown mask kind '" + std::string(s) + "' (expected labels or binary)");
}

inline std::string_view to_string(MaskKind k) { return k == MaskKind::labels ? "labels" : "binary"; }

inline IdCorrespondence parse_correspondence(std::string_view s) {
    if (s == "max_iou") return IdCorrespondence::max_iou;
    if (s == "identity") return IdCorrespondence::identity;
    throw ParameterError("unknown correspondence '" + std::string(s) + "' (expected max_iou or identity)");
}

inline std::string_view to_string(IdCorrespondence c) { return c == IdCorrespondence::max_iou ? "max_iou" : "identity"; }

inline Json nullable(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

} // namespace detail

using detail::parse_correspondence;
using detail::parse_mask_kind;

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const RunConfig& c) {
    const auto& s = c.simulate;
    Json sim;
    sim["seed"] = s.seed ? Json(*s.seed) : Json(nullptr);
    sim["n_particles"] = s.n_particles ? Json(*s.n_particles) : Json("random");
    sim["n_particles_range"] = Json::array({s.n_particles_min, s.n_particles_max});
    sim["model"] = std::string(to_string(s.model));
    sim["diffusion"] = {
        {"diffusion_coefficient", s.diffusion.diffusion_coefficient},
        {"hurst", s.diffusion.hurst},
        {"frame_interval", s.diffusion.frame_interval},
        {"n_frames", s.diffusion.n_frames},
        {"boundary", std::string(to_string(s.diffusion.boundary))},
        {"rotational_diffusion", s.rotational_diffusion},
    };
    const auto& sc = s.scene;
    sim["scene"] = {
        {"image_width", sc.image_width},
        {"image_height", sc.image_height},
        {"pixel_size", sc.pixel_size},
        {"thickness", s.random_thickness ? Json("random") : Json(sc.thickness)},
        {"dose_rate", sc.dose_rate},
        {"exposure", sc.exposure},
        {"shape",
         {{"kind", std::string(to_string(sc.shape.kind))},
          {"semi_major", sc.shape.semi_major},
          {"semi_minor", sc.shape.semi_minor}}},
        {"base_contrast", sc.base_contrast},
        {"attenuation_length", sc.attenuation_length},
        {"psf_sigma", sc.psf_sigma},
        {"read_noise_sigma", sc.read_noise_sigma},
        {"background_level", detail::nullable(sc.background_level)},
    };
    Json out;
    out["version"] = kConfigVersion;
    out["simulate"] = sim;
    out["track"] = {
        {"gate", c.track.link.gate},
        {"max_missed", c.track.link.max_missed},
        {"cost", "euclidean"},
        {"min_area", c.track.min_area},
        {"mask_kind", std::string(detail::to_string(c.track.mask_kind))},
    };
    out["stats"] = {
        {"max_lag_fraction", c.stats.max_lag_fraction},
        {"max_lag", c.stats.max_lag ? Json(*c.stats.max_lag) : Json(nullptr)},
        {"bins", c.stats.bins},
        {"hist_lag", c.stats.hist_lag},
        {"axis", std::string(to_string(c.stats.axis))},
        {"fit_lags", c.stats.fit_lags},
    };
    out["eval"] = {
        {"tolerance", detail::nullable(c.eval.tolerance)},
        {"correspondence", std::string(detail::to_string(c.eval.correspondence))},
    };
    return out;
}

inline std::string dump(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

/// Throws ConfigError for semantically invalid values.
inline void validate(const RunConfig& c) {
    const auto& s = c.simulate;
    try {
        if (s.n_particles && *s.n_particles < 1) throw ParameterError("n_particles must be >= 1");
        if (s.n_particles_min < 1 || s.n_particles_max < s.n_particles_min)
            throw ParameterError("n_particles_range must satisfy 1 <= min <= max");
        if (!(s.rotational_diffusion >= 0.0)) throw ParameterError("rotational_diffusion must be >= 0");
        DiffusionParams d = s.diffusion;
        d.fov = {1.0, 1.0};
        d.start.reset();
        validate(d);
        SceneConfig scene = s.scene;
        if (s.random_thickness) scene.thickness = kThicknessGrid.front();
        validate(scene);
        validate(c.track.link);
        if (c.track.min_area < 1) throw ParameterError("track.min_area must be >= 1");
        if (!(c.stats.max_lag_fraction > 0.0 && c.stats.max_lag_fraction <= 1.0))
            throw ParameterError("stats.max_lag_fraction must lie in (0, 1]");
        if (c.stats.max_lag && *c.stats.max_lag < 1) throw ParameterError("stats.max_lag must be >= 1");
        if (c.stats.bins < 1) throw ParameterError("stats.bins must be >= 1");
        if (c.stats.hist_lag < 1) throw ParameterError("stats.hist_lag must be >= 1");
        if (c.stats.fit_lags < 2) throw ParameterError("stats.fit_lags must be >= 2");
        if (c.eval.tolerance && !(*c.eval.tolerance >= 0.0)) throw ParameterError("eval.tolerance must be >= 0");
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

/// Parses a config document on top of `base` (defaults unless given).
inline RunConfig from_json(const Json& j, RunConfig base = {}) {
    using detail::Section;
    RunConfig c = std::move(base);
    const Section root(j, "");
    root.allow({"version", "simulate", "track", "stats", "eval"});
    if (root.has("version")) {
        int v = 0;
        root.integer("version", v);
        if (v != kConfigVersion) throw ConfigError("unsupported config version " + std::to_string(v));
    }
    if (root.has("simulate")) {
        const Section sim(root.at("simulate"), "simulate");
        sim.allow({"seed", "n_particles", "n_particles_range", "model", "diffusion", "scene"});
        auto& s = c.simulate;
        sim.optional_integer("seed", s.seed);
        if (sim.has("n_particles")) {
            const Json& v = sim.at("n_particles");
            if (v.is_string() && v.get<std::string>() == "random")
                s.n_particles.reset();
            else if (v.is_number_integer())
                s.n_particles = v.get<int>();
            else
                throw ConfigError("config key 'simulate.n_particles' must be an integer or \"random\"");
        }
        if (sim.has("n_particles_range")) {
            const Json& v = sim.at("n_particles_range");
            if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
                throw ConfigError("config key 'simulate.n_particles_range' must be [min, max]");
            s.n_particles_min = v[0].get<int>();
            s.n_particles_max = v[1].get<int>();
        }
        sim.choice("model", s.model, detail::parse_model);
        if (sim.has("diffusion")) {
            const Section d(sim.at("diffusion"), "simulate.diffusion");
            d.allow({"diffusion_coefficient", "hurst", "frame_interval", "n_frames", "boundary", "rotational_diffusion"});
            d.number("diffusion_coefficient", s.diffusion.diffusion_coefficient);
            d.number("hurst", s.diffusion.hurst);
            d.number("frame_interval", s.diffusion.frame_interval);
            d.integer("n_frames", s.diffusion.n_frames);
            d.choice("boundary", s.diffusion.boundary, parse_boundary_mode);
            d.number("rotational_diffusion", s.rotational_diffusion);
        }
        if (sim.has("scene")) {
            const Section sc(sim.at("scene"), "simulate.scene");
            sc.allow({"image_width", "image_height", "pixel_size", "thickness", "dose_rate", "exposure", "shape",
                      "base_contrast", "attenuation_length", "psf_sigma", "read_noise_sigma", "background_level"});
            auto& scene = s.scene;
            sc.integer("image_width", scene.image_width);
            sc.integer("image_height", scene.image_height);
            sc.number("pixel_size", scene.pixel_size);
            if (sc.has("thickness")) {
                const Json& v = sc.at("thickness");
                if (v.is_string() && v.get<std::string>() == "random") {
                    s.random_thickness = true;
                } else if (v.is_number()) {
                    s.random_thickness = false;
                    scene.thickness = v.get<double>();
                } else {
                    throw ConfigError("config key 'simulate.scene.thickness' must be a number or \"random\"");
                }
            }
            sc.number("dose_rate", scene.dose_rate);
            sc.number("exposure", scene.exposure);
            if (sc.has("shape")) {
                const Section sh(sc.at("shape"), "simulate.scene.shape");
                sh.allow({"kind", "semi_major", "semi_minor"});
                sh.choice("kind", scene.shape.kind, detail::parse_shape);
                sh.number("semi_major", scene.shape.semi_major);
                sh.number("semi_minor", scene.shape.semi_minor);
            }
            sc.number("base_contrast", scene.base_contrast);
            sc.number("attenuation_length", scene.attenuation_length);
            sc.number("psf_sigma", scene.psf_sigma);
            sc.number("read_noise_sigma", scene.read_noise_sigma);
            sc.optional_number("background_level", scene.background_level);
        }
    }
    if (root.has("track")) {
        const Section t(root.at("track"), "track");
        t.allow({"gate", "max_missed", "cost", "min_area", "mask_kind"});
        t.number("gate", c.track.link.gate);
        t.integer("max_missed", c.track.link.max_missed);
        std::string cost = "euclidean";
        t.string("cost", cost);
        if (cost != "euclidean") throw ConfigError("config key 'track.cost': only \"euclidean\" is supported");
        t.integer("min_area", c.track.min_area);
        t.choice("mask_kind", c.track.mask_kind, detail::parse_mask_kind);
    }
    if (root.has("stats")) {
        const Section st(root.at("stats"), "stats");
        st.allow({"max_lag_fraction", "max_lag", "bins", "hist_lag", "axis", "fit_lags"});
        st.number("max_lag_fraction", c.stats.max_lag_fraction);
        st.optional_integer("max_lag", c.stats.max_lag);
        st.integer("bins", c.stats.bins);
        st.integer("hist_lag", c.stats.hist_lag);
        st.choice("axis", c.stats.axis, parse_displacement_axis);
        st.integer("fit_lags", c.stats.fit_lags);
    }
    if (root.has("eval")) {
        const Section e(root.at("eval"), "eval");
        e.allow({"tolerance", "correspondence"});
        e.optional_number("tolerance", c.eval.tolerance);
        e.choice("correspondence", c.eval.correspondence, detail::parse_correspondence);
    }
    validate(c);
    return c;
}

inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return from_json(j, std::move(base));
}

// ---------------------------------------------------------------------------
// Presets

/// Named configurations for the reference test videos and common runs.
inline const std::map<std::string, RunConfig, std::less<>>& presets() {
    static const auto table = [] {
        std::map<std::string, RunConfig, std::less<>> p;
        p["default"] = RunConfig{};

        auto video = [](std::size_t side, std::int64_t frames, int particles, std::uint64_t seed) {
            RunConfig c;
            c.simulate.seed = seed;
            c.simulate.scene.image_width = c.simulate.scene.image_height = side;
            c.simulate.diffusion.n_frames = frames;
            c.simulate.n_particles = particles;
            return c;
        };
        p["video1"] = video(1024, 300, 3, 101);
        p["video1-two"] = video(1024, 300, 2, 101); // same video as described with two particles
        p["video2"] = video(512, 275, 1, 102);
        p["video3"] = video(1024, 600, 5, 103);

        RunConfig train = video(1024, 50, 1, 1);
        train.simulate.n_particles.reset();
        train.simulate.random_thickness = true;
        p["training"] = train;

        RunConfig rt = video(256, 1000, 1, 20241017);
        rt.simulate.scene.pixel_size = 1.0;
        rt.simulate.diffusion.diffusion_coefficient = 0.5;
        p["roundtrip"] = rt;
        return p;
    }();
    return table;
}

inline const RunConfig& preset(std::string_view name) {
    const auto& p = presets();
    auto it = p.find(name);
    if (it == p.end()) {
        std::string names;
        for (const auto& [k, _] : p) names += (names.empty() ? "" : ", ") + k;
        throw ConfigError("unknown preset '" + std::string(name) + "' (available: " + names + ")");
    }
    return it->second;
}

} // namespace lptem
