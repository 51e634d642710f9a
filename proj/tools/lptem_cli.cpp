// lptem command line: simulate -> track -> stats -> eval, plus centroid
// agreement and config dumps.
//
// Exit codes: 0 success, 2 usage/config, 3 I/O or data.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lptem/lptem.hpp"

namespace fs = std::filesystem;
using namespace lptem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

std::string fmt(double v) { return csv::format_number(v); }

RunConfig load_config(const std::optional<std::string>& path, const std::optional<std::string>& preset_name) {
    if (path && preset_name) throw ConfigError("--config and --preset are mutually exclusive");
    if (preset_name) return preset(*preset_name);
    if (!path) return RunConfig{};
    std::string text;
    try {
        text = read_text(*path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    try {
        return parse_config(text);
    } catch (const ConfigError& e) {
        throw ConfigError(*path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::optional<std::string> config, preset;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, unsigned threads) {
    if (!a.config && !a.preset) throw ConfigError("simulate needs --config or --preset");
    RunConfig cfg = load_config(a.config, a.preset);
    if (a.seed) cfg.simulate.seed = *a.seed;
    if (!cfg.simulate.seed) throw ConfigError("simulate.seed is required (set it in the config or pass --seed)");
    const auto summary = write_dataset(a.out, cfg, threads);
    std::cout << "simulated frames=" << summary.meta.n_frames << " particles=" << summary.meta.n_particles
              << " thickness_nm=" << fmt(summary.meta.scene.thickness) << " seed=" << summary.meta.seed
              << " out=" << a.out << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// track

struct TrackArgs {
    std::string masks, out;
    std::optional<std::string> config;
    std::optional<double> gate, pixel_size;
    std::optional<std::int64_t> max_missed, min_area;
    bool binary = false;
};

int cmd_track(const TrackArgs& a, unsigned threads) {
    RunConfig cfg = load_config(a.config, std::nullopt);
    if (a.gate) cfg.track.link.gate = *a.gate;
    if (a.max_missed) cfg.track.link.max_missed = *a.max_missed;
    if (a.min_area) cfg.track.min_area = *a.min_area;
    if (a.binary) cfg.track.mask_kind = MaskKind::binary;
    validate(cfg);

    const fs::path mask_dir = resolve_mask_dir(a.masks);
    const auto paths = list_sequence(mask_dir, "mask");
    if (paths.empty()) throw IoError("no mask_NNNNN.pgm files in " + mask_dir.string());
    const auto meta = find_meta(mask_dir);
    std::optional<double> pixel_size = a.pixel_size;
    if (!pixel_size && meta) pixel_size = meta->scene.pixel_size;
    const std::int64_t first = meta ? meta->first_frame : 0;

    std::vector<std::vector<Detection>> frames(paths.size());
    const ExtractOptions opts{cfg.track.mask_kind, cfg.track.min_area};
    parallel_for(paths.size(), threads, [&](std::size_t i) {
        const LabelImage mask = pgm::read_file(paths[i]);
        frames[i] = extract_detections(mask, first + static_cast<std::int64_t>(i), opts);
    });
    const auto tracks = link(frames, cfg.track.link);

    std::ostringstream os;
    csv::write_tracks(os, tracks, pixel_size);
    write_atomic(a.out, os.str());

    std::size_t n_det = 0, bridged = 0, late = 0;
    for (const auto& f : frames) n_det += f.size();
    for (const Track& t : tracks) {
        if (t.detections.front().frame > first) ++late;
        for (std::size_t i = 1; i < t.detections.size(); ++i)
            bridged += t.detections[i].frame - t.detections[i - 1].frame > 1;
    }
    std::cout << "tracked tracks=" << tracks.size() << " frames=" << frames.size() << " detections=" << n_det
              << " gaps_bridged=" << bridged << " tracks_started_late=" << late;

    // Identity switches against ground truth when the masks come from a dataset.
    const fs::path gt_path = mask_dir.parent_path() / "gt_trajectories.csv";
    if (pixel_size && meta && fs::exists(gt_path)) {
        std::ifstream is(gt_path);
        const auto gt = csv::to_trajectories(csv::read(is), csv::Units::nm, meta->frame_interval);
        std::vector<Trajectory> pred;
        for (const Track& t : tracks) pred.push_back(to_trajectory(t, pixel_size, meta->frame_interval));
        std::cout << " identity_switches=" << identity_switch_count(pred, gt, cfg.track.link.gate * *pixel_size);
    }
    std::cout << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
    std::string tracks, out;
    std::optional<std::string> config, axis;
    std::optional<std::int64_t> max_lag, hist_lag;
    std::optional<double> lag_fraction, pixel_size, dt;
    std::optional<std::size_t> bins, fit_lags;
};

struct Unit {
    std::string name; // "nm" or "px"
};

void write_msd(const fs::path& dir, const MsdCurve& c, const Unit& u, const std::string& title,
               const std::optional<DiffusionFit>& fit) {
    std::ostringstream os;
    os << "tau_s,msd_" << u.name << "2,n_pairs\n";
    svg::Series data{"MSD", {}, {}, "#1f77b4", false, true};
    for (const auto& p : c.points) {
        os << fmt(p.tau) << ',' << fmt(p.msd) << ',' << p.n_pairs << '\n';
        data.x.push_back(p.tau);
        data.y.push_back(p.msd);
    }
    write_atomic(dir / "msd.csv", os.str());
    std::vector<svg::Series> series{data};
    if (fit) {
        svg::Series line{"4 D tau (D = " + fmt(fit->diffusion_coefficient) + ")", {}, {}, "#d62728", true, false};
        for (const auto& p : c.points) {
            line.x.push_back(p.tau);
            line.y.push_back(4.0 * fit->diffusion_coefficient * p.tau);
        }
        series.push_back(line);
    }
    const svg::Axes axes{title, "lag time tau (s)", "MSD (" + u.name + "^2)", true, true};
    write_atomic(dir / "msd.svg", svg::line_plot(axes, series));
}

void write_vacf(const fs::path& dir, const VacfCurve& c, const std::string& title) {
    std::ostringstream os;
    os << "tau_s,c,n_pairs\n";
    svg::Series data{"VACF", {}, {}, "#2ca02c", false, true};
    for (const auto& p : c.points) {
        os << fmt(p.tau) << ',' << fmt(p.c) << ',' << p.n_pairs << '\n';
        data.x.push_back(p.tau);
        data.y.push_back(p.c);
    }
    write_atomic(dir / "vacf.csv", os.str());
    const std::vector<svg::Series> series{data};
    write_atomic(dir / "vacf.svg", svg::line_plot({title, "lag time tau (s)", "normalized VACF c(tau)"}, series));
}

void write_hist(const fs::path& dir, const DisplacementHist& h, const Unit& u, const std::string& title,
                const std::optional<DiffusionFit>& fit) {
    std::vector<double> ref(h.density.size(), std::numeric_limits<double>::quiet_NaN());
    if (fit && fit->diffusion_coefficient > 0.0 && h.tau > 0.0) {
        const auto g = gaussian_reference(fit->diffusion_coefficient, h.tau);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double c = 0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]);
            // radial: 2D Gaussian in polar form, r / s^2 exp(-r^2 / 2 s^2)
            ref[i] = h.axis == DisplacementAxis::radial ? c / g.variance * std::exp(-c * c / (2.0 * g.variance)) : g(c);
        }
    }
    std::ostringstream os;
    os << "bin_lo_" << u.name << ",bin_hi_" << u.name << ",density_per_" << u.name << ",gaussian_per_" << u.name << '\n';
    for (std::size_t i = 0; i < h.density.size(); ++i) {
        os << fmt(h.bin_edges[i]) << ',' << fmt(h.bin_edges[i + 1]) << ',' << fmt(h.density[i]) << ',';
        if (std::isfinite(ref[i])) os << fmt(ref[i]);
        os << '\n';
    }
    write_atomic(dir / "disp_hist.csv", os.str());
    std::vector<svg::Series> overlays;
    if (fit) {
        svg::Series s{"Gaussian, fitted D", {}, {}, "#d62728", true, false};
        for (std::size_t i = 0; i < ref.size(); ++i) {
            s.x.push_back(0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]));
            s.y.push_back(ref[i]);
        }
        overlays.push_back(s);
    }
    const std::string what = h.axis == DisplacementAxis::radial ? "|dr|" : "dx";
    const svg::Axes axes{title + " (tau = " + fmt(h.tau) + " s)", "displacement " + what + " (" + u.name + ")",
                         "probability density (1/" + u.name + ")"};
    write_atomic(dir / "disp_hist.svg", svg::histogram_plot(axes, h.bin_edges, h.density, overlays));
}

struct Analysis {
    std::optional<DiffusionFit> fit;
    std::vector<std::string> problems;
};

template <typename Fn>
void attempt(Analysis& an, const std::string& what, Fn&& fn) {
    try {
        fn();
    } catch (const InsufficientDataError& e) {
        an.problems.push_back(what + ": " + e.what());
    } catch (const FitError& e) {
        an.problems.push_back(what + ": " + e.what());
    }
}

int cmd_stats(const StatsArgs& a, unsigned threads) {
    RunConfig cfg = load_config(a.config, std::nullopt);
    auto& st = cfg.stats;
    if (a.max_lag) st.max_lag = *a.max_lag;
    if (a.lag_fraction) st.max_lag_fraction = *a.lag_fraction;
    if (a.bins) st.bins = *a.bins;
    if (a.hist_lag) st.hist_lag = *a.hist_lag;
    if (a.fit_lags) st.fit_lags = *a.fit_lags;
    if (a.axis) {
        try {
            st.axis = parse_displacement_axis(*a.axis);
        } catch (const ParameterError& e) {
            throw ConfigError(e.what());
        }
    }
    validate(cfg);

    std::ifstream is(a.tracks);
    if (!is) throw IoError("cannot open " + a.tracks);
    const csv::Table table = csv::read(is);
    const auto meta = find_meta(fs::path(a.tracks));
    std::optional<double> pixel_size = a.pixel_size;
    if (!pixel_size && meta) pixel_size = meta->scene.pixel_size;
    double dt = 1.0;
    if (a.dt) dt = *a.dt;
    else if (meta) dt = meta->frame_interval;
    if (!(dt > 0.0)) throw ConfigError("--dt must be > 0");

    std::vector<Trajectory> trajs;
    Unit unit{"nm"};
    if (table.has_nm) {
        trajs = csv::to_trajectories(table, csv::Units::nm, dt);
    } else if (pixel_size) {
        trajs = csv::to_trajectories(table, csv::Units::px, dt);
        for (auto& t : trajs)
            for (auto& s : t.samples) {
                s.x = px_to_nm(s.x, *pixel_size);
                s.y = px_to_nm(s.y, *pixel_size);
            }
    } else {
        trajs = csv::to_trajectories(table, csv::Units::px, dt);
        unit.name = "px";
        std::cerr << "warning: no pixel size known; statistics are in px\n";
    }
    for (const auto& t : trajs) validate(t);

    const fs::path out(a.out);
    std::vector<Analysis> results(trajs.size());
    parallel_for(trajs.size(), threads, [&](std::size_t i) {
        const Trajectory& t = trajs[i];
        char name[32];
        std::snprintf(name, sizeof name, "id_%04d", t.id);
        const fs::path dir = out / name;
        fs::create_directories(dir);
        Analysis& an = results[i];
        const std::string title = "trajectory " + std::to_string(t.id);
        attempt(an, "msd", [&] {
            const auto curve = msd(t, st.lag_options());
            attempt(an, "fit", [&] { an.fit = fit_diffusion(curve, st.fit_lags); });
            write_msd(dir, curve, unit, title, an.fit);
        });
        attempt(an, "vacf", [&] { write_vacf(dir, vacf(t, st.lag_options()), title); });
        attempt(an, "displacements", [&] { write_hist(dir, displacement_pdf(t, st.hist_lag, st.bins, st.axis), unit, title, an.fit); });
    });

    Analysis pooled;
    fs::create_directories(out);
    attempt(pooled, "pooled msd", [&] {
        const auto curve = pooled_msd(trajs, st.lag_options());
        attempt(pooled, "pooled fit", [&] { pooled.fit = fit_diffusion(curve, st.fit_lags); });
        write_msd(out, curve, unit, "all trajectories", pooled.fit);
    });
    attempt(pooled, "pooled vacf", [&] { write_vacf(out, pooled_vacf(trajs, st.lag_options()), "all trajectories"); });
    attempt(pooled, "pooled displacements", [&] {
        std::vector<double> values;
        for (const auto& t : trajs) {
            const auto d = displacements(t, st.hist_lag, st.axis);
            values.insert(values.end(), d.begin(), d.end());
        }
        write_hist(out, histogram(values, st.bins, static_cast<double>(st.hist_lag) * dt, st.axis), unit, "all trajectories", pooled.fit);
    });

    std::ostringstream summary;
    summary << "id,n_samples,D_" << unit.name << "2_per_s,alpha,status\n";
    std::size_t skipped = 0;
    auto row = [&](const std::string& id, std::size_t n, const Analysis& an) {
        summary << id << ',' << n << ',';
        if (an.fit) summary << fmt(an.fit->diffusion_coefficient) << ',' << fmt(an.fit->alpha);
        else summary << ',';
        summary << ',' << (an.problems.empty() ? "ok" : "incomplete") << '\n';
    };
    std::size_t total = 0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        total += trajs[i].size();
        for (const auto& p : results[i].problems) std::cerr << "warning: trajectory " << trajs[i].id << ": " << p << '\n';
        skipped += !results[i].problems.empty();
        row(std::to_string(trajs[i].id), trajs[i].size(), results[i]);
    }
    for (const auto& p : pooled.problems) std::cerr << "warning: " << p << '\n';
    row("pooled", total, pooled);
    write_atomic(out / "summary.csv", summary.str());

    std::cout << "stats trajectories=" << trajs.size() << " skipped=" << skipped << " unit=" << unit.name;
    if (pooled.fit)
        std::cout << " D=" << fmt(pooled.fit->diffusion_coefficient) << " alpha=" << fmt(pooled.fit->alpha);
    std::cout << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string pred, gt, out;
    std::optional<std::string> config, correspondence;
    std::optional<double> tolerance;
};

std::vector<LabelImage> read_masks_parallel(const fs::path& dir, unsigned threads) {
    const fs::path mdir = resolve_mask_dir(dir);
    const auto paths = list_sequence(mdir, "mask");
    if (paths.empty()) throw IoError("no mask_NNNNN.pgm files in " + mdir.string());
    std::vector<LabelImage> out(paths.size());
    parallel_for(paths.size(), threads, [&](std::size_t i) { out[i] = pgm::read_file(paths[i]); });
    return out;
}

Json nan_to_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json report_json(const MetricReport& r) {
    Json j;
    j["tolerance_px"] = r.tolerance;
    j["correspondence"] = std::string(detail::to_string(r.correspondence));
    j["conventions"] = {
        {"both_empty", "J = 1, F = 1"},
        {"absent_in_both", "frame excluded from the object's mean"},
        {"absent_in_one", "J = 0, F = 0"},
        {"unmatched_pred_objects", "listed, not scored"},
        {"boundary", "4-neighbour, image border counts as outside"},
    };
    j["n_frames"] = r.n_frames;
    j["mean_j"] = r.mean_j;
    j["mean_f"] = r.mean_f;
    j["mean_jf"] = r.mean_jf;
    j["mean_jf_of_objects"] = r.mean_jf_of_objects;
    j["unmatched_pred_ids"] = r.unmatched_pred_ids;
    Json objs = Json::array();
    for (const auto& o : r.per_object)
        objs.push_back({{"object_id", o.object_id},
                        {"pred_id", o.pred_id ? Json(*o.pred_id) : Json(nullptr)},
                        {"mean_j", o.mean_j},
                        {"mean_f", o.mean_f},
                        {"mean_jf", o.mean_jf},
                        {"n_scored", o.n_scored},
                        {"n_absent_both", o.n_absent_both},
                        {"n_missed", o.n_missed},
                        {"n_spurious", o.n_spurious}});
    j["per_object"] = objs;
    Json fm = Json::array();
    for (double v : r.frame_mean_jf) fm.push_back(nan_to_null(v));
    j["frame_mean_jf"] = fm;
    Json frames = Json::array();
    for (const auto& s : r.per_frame)
        frames.push_back({{"frame", s.frame},
                          {"object_id", s.object_id},
                          {"pred_id", s.pred_id ? Json(*s.pred_id) : Json(nullptr)},
                          {"j", s.j},
                          {"f", s.f},
                          {"jf", s.jf}});
    j["per_frame"] = frames;
    return j;
}

int cmd_eval(const EvalArgs& a, unsigned threads) {
    RunConfig cfg = load_config(a.config, std::nullopt);
    if (a.tolerance) cfg.eval.tolerance = *a.tolerance;
    if (a.correspondence) {
        try {
            cfg.eval.correspondence = parse_correspondence(*a.correspondence);
        } catch (const ParameterError& e) {
            throw ConfigError(e.what());
        }
    }
    validate(cfg);
    const auto pred = read_masks_parallel(a.pred, threads);
    const auto gt = read_masks_parallel(a.gt, threads);
    if (pred.size() != gt.size())
        throw InputError("layout mismatch: " + std::to_string(pred.size()) + " predicted frames vs " +
                         std::to_string(gt.size()) + " ground-truth frames");
    const MetricReport r = jf_video(pred, gt, {cfg.eval.tolerance, cfg.eval.correspondence});
    write_atomic(a.out, report_json(r).dump(2) + "\n");
    char line[256];
    std::snprintf(line, sizeof line, "eval mean_jf=%.6f mean_j=%.6f mean_f=%.6f objects=%zu frames=%zu tolerance_px=%g\n",
                  r.mean_jf, r.mean_j, r.mean_f, r.per_object.size(), r.n_frames, r.tolerance);
    std::cout << line;
    return 0;
}

// ---------------------------------------------------------------------------
// centroid-agree

struct CentroidArgs {
    std::string pred, ref, out;
    std::optional<double> pixel_size;
};

std::vector<Trajectory> load_nm(const std::string& path, std::optional<double> pixel_size) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    const csv::Table t = csv::read(is);
    if (t.has_nm) return csv::to_trajectories(t, csv::Units::nm, 1.0);
    if (!pixel_size) throw ConfigError(path + " has only px columns; pass --pixel-size");
    auto trajs = csv::to_trajectories(t, csv::Units::px, 1.0);
    for (auto& tr : trajs)
        for (auto& s : tr.samples) {
            s.x = px_to_nm(s.x, *pixel_size);
            s.y = px_to_nm(s.y, *pixel_size);
        }
    return trajs;
}

int cmd_centroid(const CentroidArgs& a) {
    if (a.pixel_size && !(*a.pixel_size > 0.0)) throw ConfigError("--pixel-size must be > 0");
    const auto pred = load_nm(a.pred, a.pixel_size);
    const auto ref = load_nm(a.ref, a.pixel_size);
    const auto r = centroid_agreement(pred, ref, 1.0);
    std::ostringstream os;
    os << "frame,pred_id,ref_id,distance_nm\n";
    for (const auto& d : r.distances) os << d.frame << ',' << d.pred_id << ',' << d.ref_id << ',' << fmt(d.distance) << '\n';
    write_atomic(a.out, os.str());
    const auto& s = r.summary;
    std::cout << "centroid n=" << s.n << " median_nm=" << fmt(s.median) << " q1_nm=" << fmt(s.q1) << " q3_nm=" << fmt(s.q3)
              << " whisker_low_nm=" << fmt(s.whisker_low) << " whisker_high_nm=" << fmt(s.whisker_high)
              << " outliers=" << s.outliers.size() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic liquid-phase TEM videos, particle tracking, trajectory statistics and segmentation metrics"};
    app.require_subcommand(1);
    unsigned threads = default_thread_count();
    app.add_option("--threads", threads, "worker threads (default: LPTEM_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "render a synthetic video with masks and ground truth");
    c_sim->add_option("--config", sim.config, "run config (JSON)")->check(CLI::ExistingFile);
    c_sim->add_option("--preset", sim.preset, "named preset (see print-config --list)");
    c_sim->add_option("--seed", sim.seed, "override simulate.seed");
    c_sim->add_option("--out", sim.out, "output dataset directory")->required();

    TrackArgs trk;
    auto* c_trk = app.add_subcommand("track", "link mask sequences into trajectories");
    c_trk->add_option("--masks", trk.masks, "dataset directory or directory of mask_NNNNN.pgm")->required();
    c_trk->add_option("--out", trk.out, "output trajectory CSV")->required();
    c_trk->add_option("--config", trk.config, "run config (JSON)")->check(CLI::ExistingFile);
    c_trk->add_option("--gate", trk.gate, "max matching distance (px)");
    c_trk->add_option("--max-missed", trk.max_missed, "frames a track survives unmatched");
    c_trk->add_option("--min-area", trk.min_area, "minimum object area (px)");
    c_trk->add_option("--pixel-size", trk.pixel_size, "nm per px (default: from meta.json)");
    c_trk->add_flag("--binary", trk.binary, "treat masks as binary; objects are connected components");

    StatsArgs sta;
    auto* c_sta = app.add_subcommand("stats", "MSD, VACF and displacement distributions per trajectory and pooled");
    c_sta->add_option("--tracks", sta.tracks, "trajectory CSV")->required()->check(CLI::ExistingFile);
    c_sta->add_option("--out", sta.out, "output directory")->required();
    c_sta->add_option("--config", sta.config, "run config (JSON)")->check(CLI::ExistingFile);
    c_sta->add_option("--max-lag", sta.max_lag, "max lag (frames)");
    c_sta->add_option("--lag-fraction", sta.lag_fraction, "max lag as a fraction of trajectory length");
    c_sta->add_option("--bins", sta.bins, "histogram bins");
    c_sta->add_option("--hist-lag", sta.hist_lag, "displacement lag (frames)");
    c_sta->add_option("--fit-lags", sta.fit_lags, "lags used by the diffusion fit");
    c_sta->add_option("--axis", sta.axis, "x, y, radial or pooled");
    c_sta->add_option("--pixel-size", sta.pixel_size, "nm per px for px-only CSVs");
    c_sta->add_option("--dt", sta.dt, "frame interval (s)");

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "score predicted masks against ground truth (J, F, J&F)");
    c_ev->add_option("--pred", ev.pred, "predicted dataset or mask directory")->required();
    c_ev->add_option("--gt", ev.gt, "ground-truth dataset or mask directory")->required();
    c_ev->add_option("--out", ev.out, "report path")->default_val("report.json");
    c_ev->add_option("--config", ev.config, "run config (JSON)")->check(CLI::ExistingFile);
    c_ev->add_option("--tolerance", ev.tolerance, "boundary tolerance (px)");
    c_ev->add_option("--correspondence", ev.correspondence, "max_iou or identity");

    CentroidArgs ca;
    auto* c_ca = app.add_subcommand("centroid-agree", "per-frame centroid distances between two trajectory CSVs");
    c_ca->add_option("--pred", ca.pred, "predicted trajectory CSV")->required()->check(CLI::ExistingFile);
    c_ca->add_option("--ref", ca.ref, "reference trajectory CSV")->required()->check(CLI::ExistingFile);
    c_ca->add_option("--pixel-size", ca.pixel_size, "nm per px for px-only CSVs");
    c_ca->add_option("--out", ca.out, "distances CSV")->default_val("centroid_distances.csv");

    std::optional<std::string> print_preset;
    bool list_presets = false;
    auto* c_pc = app.add_subcommand("print-config", "print the full default config or a preset");
    c_pc->add_option("--preset", print_preset, "preset name");
    c_pc->add_flag("--list", list_presets, "list preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*c_sim) return cmd_simulate(sim, threads);
        if (*c_trk) return cmd_track(trk, threads);
        if (*c_sta) return cmd_stats(sta, threads);
        if (*c_ev) return cmd_eval(ev, threads);
        if (*c_ca) return cmd_centroid(ca);
        if (*c_pc) {
            if (list_presets) {
                for (const auto& [name, _] : presets()) std::cout << name << '\n';
                return 0;
            }
            std::cout << dump(print_preset ? preset(*print_preset) : RunConfig{});
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
