#pragma once

// Minimal self-contained SVG line and histogram plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace lptem::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
    bool markers = false;
};

struct Axes {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    double width = 640;
    double height = 420;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0, hi = 1;
        if (hi == lo) lo -= 0.5, hi += 0.5;
    }
};

/// "Nice" tick positions covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

class Canvas {
public:
    Canvas(const Axes& axes, Range xr, Range yr) : a_(axes), xr_(xr), yr_(yr) {
        pw_ = a_.width - left_ - right_;
        ph_ = a_.height - top_ - bottom_;
    }

    [[nodiscard]] double sx(double v) const {
        const double t = a_.log_x ? std::log10(v) : v;
        return left_ + (t - xr_.lo) / (xr_.hi - xr_.lo) * pw_;
    }
    [[nodiscard]] double sy(double v) const {
        const double t = a_.log_y ? std::log10(v) : v;
        return top_ + ph_ - (t - yr_.lo) / (yr_.hi - yr_.lo) * ph_;
    }

    void frame(std::ostringstream& os) const {
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(a_.width) << "\" height=\"" << num(a_.height)
           << "\" viewBox=\"0 0 " << num(a_.width) << ' ' << num(a_.height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << num(a_.width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(a_.title) << "</text>\n";
        os << "<rect x=\"" << num(left_) << "\" y=\"" << num(top_) << "\" width=\"" << num(pw_) << "\" height=\"" << num(ph_)
           << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (double t : ticks(xr_.lo, xr_.hi)) {
            const double x = left_ + (t - xr_.lo) / (xr_.hi - xr_.lo) * pw_;
            os << "<line x1=\"" << num(x) << "\" y1=\"" << num(top_ + ph_) << "\" x2=\"" << num(x) << "\" y2=\"" << num(top_ + ph_ + 5)
               << "\" stroke=\"black\"/>\n";
            os << "<text x=\"" << num(x) << "\" y=\"" << num(top_ + ph_ + 18) << "\" text-anchor=\"middle\">"
               << label(t, a_.log_x) << "</text>\n";
        }
        for (double t : ticks(yr_.lo, yr_.hi)) {
            const double y = top_ + ph_ - (t - yr_.lo) / (yr_.hi - yr_.lo) * ph_;
            os << "<line x1=\"" << num(left_ - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left_) << "\" y2=\"" << num(y)
               << "\" stroke=\"black\"/>\n";
            os << "<text x=\"" << num(left_ - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << label(t, a_.log_y)
               << "</text>\n";
        }
        os << "<text x=\"" << num(left_ + pw_ / 2) << "\" y=\"" << num(a_.height - 10) << "\" text-anchor=\"middle\">"
           << escape(a_.x_label) << "</text>\n";
        os << "<text transform=\"translate(16," << num(top_ + ph_ / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
           << escape(a_.y_label) << "</text>\n";
    }

    void legend(std::ostringstream& os, std::span<const Series> series) const {
        double y = top_ + 14;
        for (const Series& s : series) {
            if (s.name.empty()) continue;
            os << "<line x1=\"" << num(left_ + pw_ - 130) << "\" y1=\"" << num(y - 4) << "\" x2=\"" << num(left_ + pw_ - 110)
               << "\" y2=\"" << num(y - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
               << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
            os << "<text x=\"" << num(left_ + pw_ - 105) << "\" y=\"" << num(y) << "\">" << escape(s.name) << "</text>\n";
            y += 16;
        }
    }

private:
    static std::string label(double t, bool log) { return log ? num(std::pow(10.0, t)) : num(t); }

    Axes a_;
    Range xr_, yr_;
    double left_ = 70, right_ = 20, top_ = 32, bottom_ = 48;
    double pw_ = 0, ph_ = 0;
};

} // namespace detail

/// Line plot; non-positive values are dropped on log axes.
inline std::string line_plot(const Axes& axes, std::span<const Series> series) {
    detail::Range xr, yr;
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!axes.log_x || x > 0) && (!axes.log_y || y > 0);
    };
    for (const Series& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            xr.add(axes.log_x ? std::log10(s.x[i]) : s.x[i]);
            yr.add(axes.log_y ? std::log10(s.y[i]) : s.y[i]);
        }
    xr.finish();
    yr.finish();
    const detail::Canvas canvas(axes, xr, yr);
    std::ostringstream os;
    canvas.frame(os);
    for (const Series& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
           << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (usable(s.x[i], s.y[i])) os << detail::num(canvas.sx(s.x[i])) << ',' << detail::num(canvas.sy(s.y[i])) << ' ';
        os << "\"/>\n";
        if (s.markers)
            for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
                if (usable(s.x[i], s.y[i]))
                    os << "<circle cx=\"" << detail::num(canvas.sx(s.x[i])) << "\" cy=\"" << detail::num(canvas.sy(s.y[i]))
                       << "\" r=\"2\" fill=\"" << s.color << "\"/>\n";
    }
    canvas.legend(os, series);
    os << "</svg>\n";
    return os.str();
}

/// Bar histogram from bin edges and densities, with optional line overlays.
inline std::string histogram_plot(const Axes& axes, std::span<const double> edges, std::span<const double> density,
                                  std::span<const Series> overlays = {}) {
    detail::Range xr, yr;
    for (double e : edges) xr.add(e);
    yr.add(0.0);
    for (double d : density) yr.add(d);
    for (const Series& s : overlays)
        for (double v : s.y) yr.add(v);
    xr.finish();
    yr.finish();
    yr.hi *= 1.05;
    Axes flat = axes;
    flat.log_x = flat.log_y = false;
    const detail::Canvas canvas(flat, xr, yr);
    std::ostringstream os;
    canvas.frame(os);
    for (std::size_t i = 0; i + 1 < edges.size() && i < density.size(); ++i) {
        const double x0 = canvas.sx(edges[i]), x1 = canvas.sx(edges[i + 1]);
        const double y0 = canvas.sy(density[i]), yb = canvas.sy(0.0);
        os << "<rect x=\"" << detail::num(x0) << "\" y=\"" << detail::num(y0) << "\" width=\"" << detail::num(std::max(0.0, x1 - x0))
           << "\" height=\"" << detail::num(std::max(0.0, yb - y0)) << "\" fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\"/>\n";
    }
    for (const Series& s : overlays) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
           << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            os << detail::num(canvas.sx(s.x[i])) << ',' << detail::num(canvas.sy(s.y[i])) << ' ';
        os << "\"/>\n";
    }
    canvas.legend(os, overlays);
    os << "</svg>\n";
    return os.str();
}

} // namespace lptem::svg
