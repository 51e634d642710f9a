// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Reference values come from independent brute-force
// implementations in this file, not from the library.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lptem/lptem.hpp"

using namespace lptem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body, double limit_s = 0.0) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs > limit_s) {
        o.pass = false;
        o.detail += "; runtime over " + std::to_string(static_cast<int>(limit_s)) + " s";
    }
    if (!o.pass) ++g_failures;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string f6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Brute-force metric oracle

using Mask = std::vector<std::vector<int>>; // [y][x]

struct OracleScores {
    double j, p, r, f;
};

OracleScores oracle(const Mask& m, const Mask& g, double tol) {
    const int h = static_cast<int>(m.size()), w = static_cast<int>(m[0].size());
    std::size_t inter = 0, uni = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            inter += m[y][x] && g[y][x];
            uni += m[y][x] || g[y][x];
        }
    auto boundary = [&](const Mask& a) {
        std::vector<std::array<int, 2>> b;
        auto in = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && a[y][x]; };
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (in(x, y) && !(in(x - 1, y) && in(x + 1, y) && in(x, y - 1) && in(x, y + 1))) b.push_back({x, y});
        return b;
    };
    const auto bm = boundary(m), bg = boundary(g);
    auto fraction = [&](const auto& from, const auto& to) {
        if (from.empty()) return 0.0;
        std::size_t hit = 0;
        for (const auto& a : from) {
            bool ok = false;
            for (const auto& b : to) {
                const double dx = a[0] - b[0], dy = a[1] - b[1];
                if (std::sqrt(dx * dx + dy * dy) <= tol) {
                    ok = true;
                    break;
                }
            }
            hit += ok;
        }
        return static_cast<double>(hit) / static_cast<double>(from.size());
    };
    OracleScores s{};
    s.j = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    if (bm.empty() && bg.empty()) {
        s.p = s.r = s.f = 1.0;
    } else if (bm.empty() || bg.empty()) {
        s.p = s.r = s.f = 0.0;
    } else {
        s.p = fraction(bm, bg);
        s.r = fraction(bg, bm);
        s.f = s.p + s.r > 0 ? 2 * s.p * s.r / (s.p + s.r) : 0.0;
    }
    return s;
}

Mask random_mask(std::mt19937_64& rng, int w, int h) {
    Mask m(h, std::vector<int>(w, 0));
    std::uniform_int_distribution<int> kind(0, 2);
    switch (kind(rng)) {
    case 0: { // salt noise
        std::bernoulli_distribution on(std::uniform_real_distribution<double>(0.0, 0.7)(rng));
        for (auto& row : m)
            for (auto& v : row) v = on(rng);
        break;
    }
    case 1: { // a few discs
        std::uniform_int_distribution<int> n(0, 4);
        const int k = n(rng);
        for (int i = 0; i < k; ++i) {
            const double cx = std::uniform_real_distribution<double>(0, w)(rng);
            const double cy = std::uniform_real_distribution<double>(0, h)(rng);
            const double r = std::uniform_real_distribution<double>(0.5, 0.4 * std::max(w, h))(rng);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if ((x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r) m[y][x] = 1;
        }
        break;
    }
    default: { // rectangles
        std::uniform_int_distribution<int> n(0, 3), xs(0, w - 1), ys(0, h - 1);
        const int k = n(rng);
        for (int i = 0; i < k; ++i) {
            int x0 = xs(rng), x1 = xs(rng), y0 = ys(rng), y1 = ys(rng);
            if (x0 > x1) std::swap(x0, x1);
            if (y0 > y1) std::swap(y0, y1);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) m[y][x] = 1;
        }
    }
    }
    return m;
}

BinaryMask to_image(const Mask& m) {
    BinaryMask img(m[0].size(), m.size(), 0);
    for (std::size_t y = 0; y < m.size(); ++y)
        for (std::size_t x = 0; x < m[0].size(); ++x) img(x, y) = static_cast<std::uint8_t>(m[y][x]);
    return img;
}

Outcome metric_oracle() {
    std::mt19937_64 rng(20260101);
    std::uniform_int_distribution<int> side(1, 64);
    std::uniform_int_distribution<int> tol_int(0, 6);
    std::size_t j_mismatch = 0, f_mismatch = 0;
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const int w = side(rng), h = side(rng);
        const Mask m = random_mask(rng, w, h);
        const Mask g = t % 10 == 0 ? m : random_mask(rng, w, h);
        const double tol = tol_int(rng) + (t % 4 == 0 ? 0.5 : 0.0);
        const OracleScores want = oracle(m, g, tol);
        const BinaryMask mi = to_image(m), gi = to_image(g);
        const double j = jaccard(mi, gi);
        const BoundaryScore b = boundary_f(mi, gi, tol);
        const double jf = jf_frame(mi, gi, tol);
        j_mismatch += j != want.j;
        const double err = std::max({std::abs(b.match.precision - want.p), std::abs(b.match.recall - want.r),
                                     std::abs(b.f - want.f), std::abs(jf - 0.5 * (want.j + want.f))});
        worst = std::max(worst, err);
        f_mismatch += err > 1e-12;
    }
    return {j_mismatch == 0 && f_mismatch == 0,
            "500 pairs, J mismatches=" + std::to_string(j_mismatch) + ", P/R/F/J&F beyond 1e-12=" +
                std::to_string(f_mismatch) + " (max err " + f6(worst) + ")"};
}

Outcome hand_cases() {
    std::vector<std::string> bad;
    // J: M = {(0,0),(0,1)}, G = {(0,1),(0,2)} as (row, col)
    BinaryMask m(3, 1, 0), g(3, 1, 0);
    m(0, 0) = m(1, 0) = 1;
    g(1, 0) = g(2, 0) = 1;
    const double j = jaccard(m, g);
    if (j != 1.0 / 3.0) bad.push_back("J=" + f6(j));
    // two vertical 1-px lines 3 px apart
    BinaryMask a(12, 10, 0), b(12, 10, 0);
    for (std::size_t y = 1; y < 9; ++y) a(3, y) = 1, b(6, y) = 1;
    const auto t2 = boundary_f(a, b, 2.0), t3 = boundary_f(a, b, 3.0);
    if (!(t2.f == 0.0 && t2.match.precision == 0.0 && t2.match.recall == 0.0)) bad.push_back("F(tol 2)=" + f6(t2.f));
    if (!(t3.f == 1.0)) bad.push_back("F(tol 3)=" + f6(t3.f));
    // box plot
    const std::vector<double> d{1, 2, 3, 4, 100};
    const BoxSummary s = box_summary(d);
    if (!(s.median == 3.0 && s.q1 == 2.0 && s.q3 == 4.0 && s.outliers == std::vector<double>{100.0}))
        bad.push_back("box median/q1/q3=" + f6(s.median) + "/" + f6(s.q1) + "/" + f6(s.q3));
    // centroid shift (+3,+4) px at 0.25 nm/px
    Trajectory p, r;
    p.id = r.id = 1;
    for (int f = 0; f < 4; ++f) {
        p.samples.push_back({f, 10.0 * f, 5.0, std::nullopt});
        r.samples.push_back({f, 10.0 * f + 3.0, 9.0, std::nullopt});
    }
    const std::vector<Trajectory> pv{p}, rv{r};
    const auto ca = centroid_agreement(pv, rv, 0.25);
    for (const auto& c : ca.distances)
        if (c.distance != 1.25) bad.push_back("centroid distance " + f6(c.distance));
    if (bad.empty()) return {true, "J=1/3, F flips 0->1 between tolerance 2 and 3, box {1,2,3,4,100} -> median 3 q1 2 q3 4 outlier 100, shift 5 px -> 1.25 nm"};
    std::string msg;
    for (const auto& x : bad) msg += x + "; ";
    return {false, msg};
}

// ---------------------------------------------------------------------------
// Trajectory statistics

DiffusionParams free_params(double d, double h, std::int64_t n) {
    DiffusionParams p;
    p.diffusion_coefficient = d;
    p.hurst = h;
    p.n_frames = n;
    p.frame_interval = 1.0;
    p.boundary = BoundaryMode::open;
    p.start = Point2{0.0, 0.0};
    return p;
}

Outcome brownian_msd() {
    const Trajectory t = gen_brownian(free_params(1.0, 0.5, 100000), 1001);
    const DiffusionFit fit = fit_diffusion(msd(t));
    const bool ok = fit.diffusion_coefficient >= 0.95 && fit.diffusion_coefficient <= 1.05 && fit.alpha >= 0.95 &&
                    fit.alpha <= 1.05;
    return {ok, "D=" + f6(fit.diffusion_coefficient) + " alpha=" + f6(fit.alpha) + " (need both in [0.95, 1.05])"};
}

double lag1_autocorrelation(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        den += (v[i] - mean) * (v[i] - mean);
        if (i + 1 < v.size()) num += (v[i] - mean) * (v[i + 1] - mean);
    }
    return num / den;
}

Outcome fbm_exponent() {
    const auto res = gen_fbm(free_params(1.0, 0.75, 100000), 1002);
    const double alpha = fit_diffusion(msd(res.trajectory)).alpha;
    const auto white = gen_fbm(free_params(1.0, 0.5, 100001), 1003).trajectory;
    std::vector<double> dx, dy;
    for (std::size_t i = 1; i < white.samples.size(); ++i) {
        dx.push_back(white.samples[i].x - white.samples[i - 1].x);
        dy.push_back(white.samples[i].y - white.samples[i - 1].y);
    }
    const double band = 3.0 / std::sqrt(static_cast<double>(dx.size()));
    const double rx = lag1_autocorrelation(dx), ry = lag1_autocorrelation(dy);
    const bool ok = alpha >= 1.45 && alpha <= 1.55 && std::abs(rx) < band && std::abs(ry) < band;
    return {ok, "H=0.75 alpha=" + f6(alpha) + " (need [1.45, 1.55], method " + std::string(to_string(res.method)) +
                    "); H=0.5 lag-1 autocorrelation x=" + f6(rx) + " y=" + f6(ry) + " (band " + f6(band) + ")"};
}

Outcome vacf_whiteness() {
    const Trajectory t = gen_brownian(free_params(1.0, 0.5, 100000), 1004);
    const VacfCurve c = vacf(t, {.max_lag_fraction = 0.25, .max_lag = 50});
    const double band = 3.0 / std::sqrt(static_cast<double>(t.size()));
    double worst = 0.0;
    bool lags_ok = c.points.size() == 51;
    for (std::size_t k = 1; k < c.points.size(); ++k) worst = std::max(worst, std::abs(c.points[k].c));
    const bool ok = lags_ok && c.points[0].c == 1.0 && worst < band;
    return {ok, "c(0)=" + f6(c.points[0].c) + ", max |c(tau)| over lags 1..50 = " + f6(worst) + " (band " + f6(band) + ")"};
}

Outcome displacement_gaussianity() {
    const Trajectory t = gen_brownian(free_params(1.0, 0.5, 50001), 1005);
    const auto values = displacements(t, 1, DisplacementAxis::pooled);
    const DisplacementHist h = histogram(values, 100, 1.0, DisplacementAxis::pooled);
    const double k = excess_kurtosis(values);
    double integral = 0.0;
    for (std::size_t i = 0; i < h.density.size(); ++i) integral += h.density[i] * (h.bin_edges[i + 1] - h.bin_edges[i]);
    const bool ok = values.size() == 100000 && k >= -0.15 && k <= 0.15 && std::abs(integral - 1.0) <= 1e-9;
    return {ok, std::to_string(values.size()) + " displacements, excess kurtosis=" + f6(k) + ", density integral - 1 = " +
                    f6(integral - 1.0)};
}

// ---------------------------------------------------------------------------
// Imaging

Outcome snr_monotonic() {
    SceneConfig cfg;
    cfg.image_width = cfg.image_height = 512;
    std::vector<double> medians;
    const ParticlePose pose{1, 64.0, 64.0, 0.0};
    std::string detail;
    for (double thickness : kThicknessGrid) {
        cfg.thickness = thickness;
        std::vector<double> snr;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Engine rng = make_engine(seed, kDomainFrame, 0);
            const auto frame = render_frame(std::span(&pose, 1), cfg, rng);
            snr.push_back(measure_snr(frame.image, frame.mask));
        }
        std::sort(snr.begin(), snr.end());
        medians.push_back(0.5 * (snr[4] + snr[5]));
        detail += f6(thickness) + ":" + f6(medians.back()) + " ";
    }
    bool ok = true;
    for (std::size_t i = 1; i < medians.size(); ++i) ok = ok && medians[i] < medians[i - 1];
    return {ok, "median SNR by thickness (nm) " + detail};
}

Outcome poisson_statistics() {
    SceneConfig cfg;
    cfg.image_width = cfg.image_height = 64;
    cfg.pixel_size = 0.25;
    cfg.shape.semi_major = cfg.shape.semi_minor = 4.0;
    cfg.psf_sigma = 0.0;
    cfg.read_noise_sigma = 0.0;
    const ParticlePose pose{1, 8.0, 8.0, 0.0};
    const std::size_t n_px = cfg.image_width * cfg.image_height;
    std::vector<double> sum(n_px, 0.0), sq(n_px, 0.0);
    const int frames = 500;
    for (int f = 0; f < frames; ++f) {
        Engine rng = make_engine(77, kDomainFrame, static_cast<std::uint64_t>(f));
        const auto fr = render_frame(std::span(&pose, 1), cfg, rng);
        auto px = fr.image.pixels();
        for (std::size_t i = 0; i < n_px; ++i) {
            sum[i] += px[i];
            sq[i] += static_cast<double>(px[i]) * px[i];
        }
    }
    double ratio_sum = 0.0;
    std::size_t used = 0, fg = 0, in_band = 0;
    double lo = 1e9, hi = 0;
    const LabelImage mask = rasterize_labels(std::span(&pose, 1), cfg);
    for (std::size_t i = 0; i < n_px; ++i) {
        const double mean = sum[i] / frames;
        if (mean < 100.0) continue;
        const double var = (sq[i] - frames * mean * mean) / (frames - 1);
        const double r = var / mean;
        ratio_sum += r;
        in_band += r >= 0.95 && r <= 1.05;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        ++used;
        fg += mask.pixels()[i] != 0;
    }
    const double ratio = ratio_sum / static_cast<double>(used);
    const bool ok = used > 0 && ratio >= 0.95 && ratio <= 1.05;
    return {ok, "mean var/mean over " + std::to_string(used) + " pixels with mean >= 100 (" + std::to_string(fg) +
                    " inside the particle) = " + f6(ratio) + "; single-pixel range [" + f6(lo) + ", " + f6(hi) + "], " +
                    std::to_string(in_band) + " pixels individually inside [0.95, 1.05]"};
}

// ---------------------------------------------------------------------------
// Assignment

/// Minimum cost over assignments of maximum cardinality, by enumeration.
double exhaustive(const std::vector<std::vector<double>>& c) {
    const std::size_t rows = c.size(), cols = c[0].size();
    int best_n = -1;
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> used(cols, 0);
    std::function<void(std::size_t, int, double)> go = [&](std::size_t r, int n, double cost) {
        if (r == rows) {
            if (n > best_n || (n == best_n && cost < best)) {
                best_n = n;
                best = cost;
            }
            return;
        }
        go(r + 1, n, cost); // row r unassigned
        for (std::size_t j = 0; j < cols; ++j) {
            if (used[j] || !std::isfinite(c[r][j])) continue;
            used[j] = 1;
            go(r + 1, n + 1, cost + c[r][j]);
            used[j] = 0;
        }
    };
    go(0, 0, 0.0);
    return best_n <= 0 ? 0.0 : best;
}

Outcome assignment_optimality() {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> dim(1, 7), val(-20, 100);
    std::bernoulli_distribution gated(0.3);
    std::size_t mismatches = 0, with_forbidden = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t r = dim(rng), c = dim(rng);
        const bool g = gated(rng);
        with_forbidden += g;
        std::vector<std::vector<double>> m(r, std::vector<double>(c));
        CostMatrix cm(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) {
                double v = val(rng);
                if (g && v > 60) v = kForbidden;
                m[i][j] = v;
                cm(i, j) = v;
            }
        const Assignment a = min_cost_assignment(cm);
        double cost = 0.0;
        std::vector<char> seen_r(r, 0), seen_c(c, 0);
        bool valid = true;
        for (const auto& [i, j] : a.pairs) {
            valid = valid && !seen_r[i] && !seen_c[j] && std::isfinite(m[i][j]);
            seen_r[i] = seen_c[j] = 1;
            cost += m[i][j];
        }
        // maximal cardinality is part of the optimum
        int n_opt = 0;
        {
            std::vector<char> used(c, 0);
            std::function<int(std::size_t)> most = [&](std::size_t i) -> int {
                if (i == r) return 0;
                int best = most(i + 1);
                for (std::size_t j = 0; j < c; ++j)
                    if (!used[j] && std::isfinite(m[i][j])) {
                        used[j] = 1;
                        best = std::max(best, 1 + most(i + 1));
                        used[j] = 0;
                    }
                return best;
            };
            n_opt = most(0);
        }
        const double want = exhaustive(m);
        if (!valid || cost != want || a.cost != want || static_cast<int>(a.pairs.size()) != n_opt) ++mismatches;
    }
    return {mismatches == 0, "1000 matrices up to 7x7 (" + std::to_string(with_forbidden) +
                                 " with forbidden entries), mismatches vs exhaustive search=" + std::to_string(mismatches)};
}

// ---------------------------------------------------------------------------
// Tracking fidelity

Outcome tracking_fidelity() {
    SceneConfig cfg; // 1024 x 1024 px at 0.25 nm/px, disc radius 10 nm
    const LinkConfig link_cfg{};
    const double r = cfg.shape.extent();
    const double quad = 0.5 * cfg.fov_width();
    // Each particle reflects inside its own quadrant inset by the radius, so
    // centres stay >= 2 r = 80 px apart, above 2 * gate = 40 px.
    std::vector<Trajectory> gt;
    for (int q = 0; q < 4; ++q) {
        DiffusionParams p;
        p.diffusion_coefficient = 0.25;
        p.n_frames = 600;
        p.fov = {quad - 2 * r, quad - 2 * r};
        p.boundary = BoundaryMode::reflect;
        Trajectory t = gen_brownian(p, substream_seed(555, kDomainTrajectory, static_cast<std::uint64_t>(q)));
        t.id = q + 1;
        for (Sample& s : t.samples) {
            s.x += r + (q % 2) * quad;
            s.y += r + (q / 2) * quad;
            s.theta = 0.0;
        }
        gt.push_back(std::move(t));
    }
    double min_sep = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < 600; ++f)
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                min_sep = std::min(min_sep, std::hypot(gt[a].samples[f].x - gt[b].samples[f].x, gt[a].samples[f].y - gt[b].samples[f].y));
    min_sep /= cfg.pixel_size;

    std::vector<std::vector<Detection>> frames(600);
    simulate_video(
        gt, cfg, 556,
        [&](std::size_t index, std::int64_t frame, RenderedFrame&& fr) { frames[index] = extract_detections(fr.mask, frame); },
        default_thread_count());
    const auto tracks = link(frames, link_cfg);

    std::vector<Trajectory> pred;
    for (const Track& t : tracks) pred.push_back(to_trajectory(t, std::nullopt, 1.0));
    std::vector<Trajectory> gt_px = gt;
    for (auto& t : gt_px)
        for (auto& s : t.samples) {
            s.x = nm_to_px(s.x, cfg.pixel_size);
            s.y = nm_to_px(s.y, cfg.pixel_size);
        }
    const std::size_t switches = identity_switch_count(pred, gt_px, link_cfg.gate);

    // RMS error of every tracked point against the gt point it maps to.
    double se = 0.0;
    std::size_t n = 0;
    for (const auto& t : pred)
        for (const auto& s : t.samples) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& g : gt_px) {
                const Sample& gs = g.samples[static_cast<std::size_t>(s.frame)];
                best = std::min(best, std::hypot(s.x - gs.x, s.y - gs.y));
            }
            se += best * best;
            ++n;
        }
    const double rms = std::sqrt(se / static_cast<double>(n));
    std::size_t full_length = 0;
    for (const auto& t : pred) full_length += t.size() == 600;
    const bool ok = tracks.size() == 4 && full_length == 4 && switches == 0 && rms < 1.0 && min_sep > 2 * link_cfg.gate;
    return {ok, "tracks=" + std::to_string(tracks.size()) + " (full length " + std::to_string(full_length) +
                    ") identity switches=" + std::to_string(switches) + " RMS centroid error=" + f6(rms) +
                    " px, min separation=" + f6(min_sep) + " px"};
}

// ---------------------------------------------------------------------------
// CLI round trips

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(LPTEM_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int st = pclose(pipe);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::optional<double> field(const std::string& text, const std::string& key) {
    const auto pos = text.find(" " + key + "=");
    if (pos == std::string::npos) return std::nullopt;
    return std::strtod(text.c_str() + pos + key.size() + 2, nullptr);
}

fs::path workdir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lptem_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Outcome end_to_end() {
    const fs::path d = workdir("roundtrip");
    const std::string ds = (d / "ds").string();
    const auto s = cli("simulate --preset roundtrip --out " + ds);
    if (s.code != 0) return {false, "simulate failed: " + s.out};
    const auto t = cli("track --masks " + ds + " --out " + ds + "/tracks.csv");
    if (t.code != 0) return {false, "track failed: " + t.out};
    // Two-lag fit: lowest-variance window for a single noise-free Brownian
    // track (sd ~3.6% at 1000 frames against ~7% for ten lags).
    const auto st = cli("stats --fit-lags 2 --tracks " + ds + "/tracks.csv --out " + (d / "stats").string());
    if (st.code != 0) return {false, "stats failed: " + st.out};
    const auto st10 = cli("stats --tracks " + ds + "/tracks.csv --out " + (d / "stats10").string());
    const auto dhat = field(st.out, "D");
    const auto d10 = field(st10.out, "D");
    fs::remove_all(d);
    if (!dhat) return {false, "no D in stats output: " + st.out};
    const double rel = std::abs(*dhat - 0.5) / 0.5;
    return {rel <= 0.10, "1 particle, 1000 frames, D=0.5 nm^2/s -> D_hat=" + f6(*dhat) + " nm^2/s over 2 lags (relative error " +
                             f6(100 * rel) + "%, limit 10%); 10-lag fit gives " + (d10 ? f6(*d10) : "n/a")};
}

Outcome determinism() {
    const fs::path d = workdir("determinism");
    RunConfig c;
    c.simulate.seed = 8675309;
    c.simulate.n_particles = 3;
    c.simulate.diffusion.n_frames = 60;
    c.simulate.scene.image_width = c.simulate.scene.image_height = 256;
    c.simulate.scene.pixel_size = 0.5;
    const std::string cfg = (d / "config.json").string();
    write_atomic(cfg, dump(c));
    const auto a = cli("--threads 1 simulate --config " + cfg + " --out " + (d / "a").string());
    const auto b = cli("--threads 4 simulate --config " + cfg + " --out " + (d / "b").string());
    const auto a2 = cli("--threads 1 simulate --config " + cfg + " --out " + (d / "c").string());
    if (a.code != 0 || b.code != 0 || a2.code != 0) return {false, "simulate failed: " + a.out + b.out + a2.out};
    std::size_t files = 0, differ = 0;
    for (const auto& e : fs::recursive_directory_iterator(d / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(e.path(), d / "a");
        const std::string ref = read_text(e.path());
        differ += ref != read_text(d / "b" / rel);
        differ += ref != read_text(d / "c" / rel);
    }
    const auto ev = cli("eval --pred " + (d / "a").string() + " --gt " + (d / "a").string() + " --out " + (d / "report.json").string());
    const auto jf = field(ev.out, "mean_jf");
    const Json report = Json::parse(read_text(d / "report.json"));
    const double exact = report.at("mean_jf").get<double>();
    fs::remove_all(d);
    const bool ok = files == 123 && differ == 0 && ev.code == 0 && jf && exact == 1.0;
    return {ok, std::to_string(files) + " files compared across 3 runs (threads 1/4/1), differing=" + std::to_string(differ) +
                    "; self-eval mean J&F=" + f6(exact)};
}

} // namespace

int main() {
    criterion("metric oracle equivalence", metric_oracle, 60);
    criterion("hand-verified metric cases", hand_cases);
    criterion("Brownian MSD law", brownian_msd, 30);
    criterion("fBm exponent", fbm_exponent);
    criterion("VACF whiteness", vacf_whiteness);
    criterion("displacement Gaussianity", displacement_gaussianity);
    criterion("SNR monotonicity", snr_monotonic, 120);
    criterion("Poisson statistics", poisson_statistics);
    criterion("assignment optimality", assignment_optimality);
    criterion("tracking fidelity", tracking_fidelity, 300);
    criterion("end-to-end round trip", end_to_end);
    criterion("determinism", determinism);
    std::printf("%d of 12 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
