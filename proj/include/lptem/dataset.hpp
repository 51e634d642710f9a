#pragma once

// Dataset directories:
//
//   <dir>/frames/frame_00000.pgm ...   16-bit noisy frames
//   <dir>/masks/mask_00000.pgm ...     16-bit label masks (0 = background)
//   <dir>/meta.json                    scene, seed, timing, format version
//   <dir>/gt_trajectories.csv          continuous ground-truth centroids (nm)
//   <dir>/config.json                  normalized run config
//
// Every file is written to a temporary name and renamed into place.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "lptem/config.hpp"
#include "lptem/csv.hpp"
#include "lptem/imaging.hpp"
#include "lptem/pgm.hpp"
#include "lptem/rng.hpp"
#include "lptem/trajgen.hpp"

namespace lptem {

inline constexpr int kDatasetFormatVersion = 1;

namespace fs = std::filesystem;

/// Writes `bytes` to `path` via a sibling temporary file and rename.
inline void write_atomic(const fs::path& path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        os.flush();
        if (!os) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline std::string sequence_name(std::string_view prefix, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*s_%05zu.pgm", static_cast<int>(prefix.size()), prefix.data(), index);
    return buf;
}

// ---------------------------------------------------------------------------
// Scenario

/// Concrete scene and trajectories for one simulate run.
struct Scenario {
    SceneConfig scene;
    std::vector<Trajectory> trajectories; // nm, ids 1..n
    int n_particles = 0;
    std::uint64_t seed = 0;
};

/// Resolves random choices (particle count, thickness) and generates one
/// trajectory per particle. Particle k uses trajectory substream k, so adding
/// particles never changes existing ones. Centres move inside the field of
/// view inset by the particle extent.
inline Scenario make_scenario(const SimulateConfig& sim) {
    if (!sim.seed) throw ConfigError("simulate.seed is required");
    Scenario sc;
    sc.seed = *sim.seed;
    sc.scene = sim.scene;
    Engine rng = make_engine(sc.seed, kDomainScene, 0);
    if (sim.n_particles) {
        sc.n_particles = *sim.n_particles;
    } else {
        const double u = uniform01(rng);
        const int span = sim.n_particles_max - sim.n_particles_min + 1;
        sc.n_particles = sim.n_particles_min + std::min(span - 1, static_cast<int>(u * span));
    }
    if (sim.random_thickness) {
        const double u = uniform01(rng);
        const auto k = std::min(kThicknessGrid.size() - 1, static_cast<std::size_t>(u * kThicknessGrid.size()));
        sc.scene.thickness = kThicknessGrid[k];
    }
    validate(sc.scene);

    const double inset = sc.scene.shape.extent();
    DiffusionParams p = sim.diffusion;
    p.fov = {sc.scene.fov_width() - 2.0 * inset, sc.scene.fov_height() - 2.0 * inset};
    p.start.reset();
    validate(p);
    for (int i = 0; i < sc.n_particles; ++i) {
        const std::uint64_t s = substream_seed(sc.seed, kDomainTrajectory, static_cast<std::uint64_t>(i));
        Trajectory t = sim.model == MotionModel::brownian ? gen_brownian(p, s) : gen_fbm(p, s).trajectory;
        t.id = i + 1;
        Engine rot = make_engine(sc.seed, kDomainScene, 1 + static_cast<std::uint64_t>(i));
        double theta = (uniform01(rot) - 0.5) * std::numbers::pi;
        const double step = std::sqrt(2.0 * sim.rotational_diffusion * p.frame_interval);
        for (Sample& smp : t.samples) {
            smp.x += inset;
            smp.y += inset;
            smp.theta = theta;
            theta += step * standard_normal(rot);
        }
        sc.trajectories.push_back(std::move(t));
    }
    return sc;
}

// ---------------------------------------------------------------------------
// Metadata

struct DatasetMeta {
    int format_version = kDatasetFormatVersion;
    SceneConfig scene;
    std::uint64_t seed = 0;
    double frame_interval = 1.0;
    std::int64_t first_frame = 0;
    std::size_t n_frames = 0;
    int n_particles = 0;
    std::string model;
    std::string config_hash;
    std::string rng;
};

inline Json to_json(const DatasetMeta& m) {
    const SceneConfig& s = m.scene;
    Json j;
    j["format_version"] = m.format_version;
    j["image_width"] = s.image_width;
    j["image_height"] = s.image_height;
    j["pixel_size"] = s.pixel_size;
    j["thickness"] = s.thickness;
    j["dose_rate"] = s.dose_rate;
    j["exposure"] = s.exposure;
    j["shape"] = {{"kind", std::string(to_string(s.shape.kind))}, {"semi_major", s.shape.semi_major}, {"semi_minor", s.shape.semi_minor}};
    j["base_contrast"] = s.base_contrast;
    j["attenuation_length"] = s.attenuation_length;
    j["psf_sigma"] = s.psf_sigma;
    j["read_noise_sigma"] = s.read_noise_sigma;
    j["background_level"] = s.background_level ? Json(*s.background_level) : Json(nullptr);
    j["background_counts"] = background_counts(s);
    j["effective_contrast"] = effective_contrast(s);
    j["seed"] = m.seed;
    j["frame_interval"] = m.frame_interval;
    j["first_frame"] = m.first_frame;
    j["n_frames"] = m.n_frames;
    j["n_particles"] = m.n_particles;
    j["model"] = m.model;
    j["config_hash"] = m.config_hash;
    j["rng"] = m.rng;
    return j;
}

inline DatasetMeta meta_from_json(const Json& j, const std::string& where) {
    try {
        DatasetMeta m;
        if (!j.contains("format_version")) throw IoError(where + ": missing format_version");
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != kDatasetFormatVersion)
            throw IoError(where + ": unsupported format_version " + std::to_string(m.format_version));
        SceneConfig& s = m.scene;
        s.image_width = j.at("image_width").get<std::size_t>();
        s.image_height = j.at("image_height").get<std::size_t>();
        s.pixel_size = j.at("pixel_size").get<double>();
        s.thickness = j.at("thickness").get<double>();
        s.dose_rate = j.at("dose_rate").get<double>();
        s.exposure = j.at("exposure").get<double>();
        s.shape.kind = detail::parse_shape(j.at("shape").at("kind").get<std::string>());
        s.shape.semi_major = j.at("shape").at("semi_major").get<double>();
        s.shape.semi_minor = j.at("shape").at("semi_minor").get<double>();
        s.base_contrast = j.at("base_contrast").get<double>();
        s.attenuation_length = j.at("attenuation_length").get<double>();
        s.psf_sigma = j.at("psf_sigma").get<double>();
        s.read_noise_sigma = j.at("read_noise_sigma").get<double>();
        if (!j.at("background_level").is_null()) s.background_level = j.at("background_level").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.frame_interval = j.at("frame_interval").get<double>();
        m.first_frame = j.value("first_frame", std::int64_t{0});
        m.n_frames = j.at("n_frames").get<std::size_t>();
        m.n_particles = j.value("n_particles", 0);
        m.model = j.value("model", std::string{});
        m.config_hash = j.value("config_hash", std::string{});
        m.rng = j.value("rng", std::string{});
        return m;
    } catch (const Json::exception& e) {
        throw IoError(where + ": " + e.what());
    } catch (const ParameterError& e) {
        throw IoError(where + ": " + e.what());
    }
}

inline DatasetMeta read_meta(const fs::path& path) {
    const std::string text = read_text(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return meta_from_json(j, path.string());
}

// ---------------------------------------------------------------------------
// Writing

struct DatasetSummary {
    DatasetMeta meta;
    fs::path dir;
};

/// Simulates `cfg.simulate` into `dir` (created if needed). Output bytes
/// depend only on the config, never on `threads`.
inline DatasetSummary write_dataset(const fs::path& dir, const RunConfig& cfg, unsigned threads = 1) {
    const Scenario sc = make_scenario(cfg.simulate);
    std::error_code ec;
    fs::create_directories(dir / "frames", ec);
    if (ec) throw IoError("cannot create " + (dir / "frames").string() + ": " + ec.message());
    fs::create_directories(dir / "masks", ec);
    if (ec) throw IoError("cannot create " + (dir / "masks").string() + ": " + ec.message());

    const FrameMeta fm = simulate_video(
        sc.trajectories, sc.scene, sc.seed,
        [&](std::size_t index, std::int64_t, RenderedFrame&& f) {
            write_atomic(dir / "frames" / sequence_name("frame", index), pgm::encode(f.image));
            write_atomic(dir / "masks" / sequence_name("mask", index), pgm::encode(f.mask));
        },
        threads);

    DatasetMeta meta;
    meta.scene = sc.scene;
    meta.seed = sc.seed;
    meta.frame_interval = cfg.simulate.diffusion.frame_interval;
    meta.first_frame = sc.trajectories.front().samples.front().frame;
    meta.n_frames = sc.trajectories.front().size();
    meta.n_particles = sc.n_particles;
    meta.model = std::string(to_string(cfg.simulate.model));
    meta.config_hash = fm.config_hash;
    meta.rng = kRngDescription;

    std::ostringstream gt;
    csv::write_ground_truth(gt, sc.trajectories);
    write_atomic(dir / "gt_trajectories.csv", gt.str());
    write_atomic(dir / "meta.json", to_json(meta).dump(2) + "\n");
    write_atomic(dir / "config.json", dump(cfg));
    return {meta, dir};
}

// ---------------------------------------------------------------------------
// Reading

/// Paths of `<prefix>_NNNNN.pgm` in `dir`, in index order. Throws IoError
/// naming the first missing index if the numbering has a hole.
inline std::vector<fs::path> list_sequence(const fs::path& dir, const std::string& prefix) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    const std::regex pattern(prefix + "_([0-9]+)\\.pgm");
    std::map<std::size_t, fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) found[std::stoul(m[1].str())] = entry.path();
    }
    std::vector<fs::path> out;
    std::size_t expect = found.empty() ? 0 : found.begin()->first;
    for (const auto& [idx, path] : found) {
        if (idx != expect) throw IoError("missing frame file " + (dir / sequence_name(prefix, expect)).string());
        out.push_back(path);
        ++expect;
    }
    return out;
}

/// Accepts either a dataset directory (uses its masks/) or a directory of
/// mask files.
inline fs::path resolve_mask_dir(const fs::path& dir) {
    if (fs::is_directory(dir / "masks")) return dir / "masks";
    return dir;
}

/// meta.json of the dataset that `path` (a dataset dir, its masks/ dir or a
/// file inside either) belongs to, if present.
inline std::optional<DatasetMeta> find_meta(const fs::path& path) {
    fs::path p = fs::is_directory(path) ? path : path.parent_path();
    for (int up = 0; up < 2 && !p.empty(); ++up, p = p.parent_path())
        if (fs::exists(p / "meta.json")) return read_meta(p / "meta.json");
    return std::nullopt;
}

inline std::vector<LabelImage> read_masks(const fs::path& dir) {
    const fs::path mdir = resolve_mask_dir(dir);
    const auto paths = list_sequence(mdir, "mask");
    if (paths.empty()) throw IoError("no mask_NNNNN.pgm files in " + mdir.string());
    std::vector<LabelImage> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(pgm::read_file(p));
    return out;
}

} // namespace lptem
