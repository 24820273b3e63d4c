#pragma once

// Hand-rolled SVG plots with deterministic bytes: fixed canvas, fixed number
// formatting, no timestamps or generator metadata.  Two chart types cover the
// experiment runner: a log-scale sup-norm history and a dilation-sweep strip
// with verdict-coded markers.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fracheat/solvability.hpp"
#include "fracheat/solver.hpp"

namespace fracheat {
namespace svg {

constexpr int kWidth = 720, kHeight = 420;
constexpr int kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string header(const std::string& config_hash) {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
         std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
    s += "<!-- config=" + config_hash + " -->\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    return s;
}

inline std::string text(double x, double y, const std::string& t,
                        const std::string& anchor = "start", int size = 13,
                        const std::string& fill = "#222222") {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
           std::to_string(size) + "\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\">" + t +
           "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2,
                        const std::string& stroke = "#444444", double w = 1.0,
                        const std::string& dash = "") {
    std::string s = "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
                    "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(w) +
                    "\"";
    if (!dash.empty()) s += " stroke-dasharray=\"" + dash + "\"";
    return s + "/>\n";
}

inline std::string placeholder(const std::string& config_hash, const std::string& message) {
    std::string s = header(config_hash);
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
         num(kWidth - kLeft - kRight) + "\" height=\"" + num(kHeight - kTop - kBottom) +
         "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n";
    s += text(kWidth / 2.0, kHeight / 2.0, message, "middle", 16, "#888888");
    s += "</svg>\n";
    return s;
}

struct Axis {
    double lo = 0.0, hi = 1.0; // data range
    double p0 = 0.0, p1 = 1.0; // pixel range
    double at(double v) const { return p0 + (v - lo) / (hi - lo) * (p1 - p0); }
};

/// Evenly spaced ticks with labels; `log_ticks` renders 10^k labels.
inline std::string draw_axes(const Axis& x, const Axis& y, const std::string& x_label,
                             const std::string& y_label, bool y_log, int n = 5) {
    std::string s;
    const double bottom = y.p0, top = y.p1, left = x.p0, right = x.p1;
    s += line(left, bottom, right, bottom);
    s += line(left, bottom, left, top);
    for (int i = 0; i <= n; ++i) {
        const double xv = x.lo + (x.hi - x.lo) * i / n;
        const double xp = x.at(xv);
        s += line(xp, bottom, xp, bottom + 5);
        s += text(xp, bottom + 22, num(xv), "middle", 12);
        const double yv = y.lo + (y.hi - y.lo) * i / n;
        const double yp = y.at(yv);
        s += line(left - 5, yp, left, yp);
        s += text(left - 9, yp + 4, y_log ? "1e" + num(yv) : num(yv), "end", 12);
    }
    s += text((left + right) / 2.0, kHeight - 14, x_label, "middle", 14);
    s += text(18, (top + bottom) / 2.0, y_label, "middle", 14);
    return s;
}

} // namespace svg

/// Sup-norm history on a log y-scale; flat-zero histories get a placeholder.
inline std::string render_evolve_svg(const MildSolveReport& rep,
                                     const std::string& config_hash) {
    if (rep.sup_history.size() < 2)
        return svg::placeholder(config_hash, "no history recorded");
    double vmax = 0.0;
    for (double v : rep.sup_history) vmax = std::max(vmax, v);
    if (!(vmax > 0.0)) return svg::placeholder(config_hash, "field is identically zero");

    double lmin = 0.0, lmax = 0.0;
    bool first = true;
    std::vector<double> logs(rep.sup_history.size());
    for (std::size_t i = 0; i < rep.sup_history.size(); ++i) {
        const double v = std::max(rep.sup_history[i], vmax * 1e-16);
        logs[i] = std::log10(v);
        if (first) {
            lmin = lmax = logs[i];
            first = false;
        } else {
            lmin = std::min(lmin, logs[i]);
            lmax = std::max(lmax, logs[i]);
        }
    }
    if (lmax - lmin < 0.5) {
        lmax += 0.25;
        lmin -= 0.25;
    }
    const double t_hi = rep.dt * double(rep.sup_history.size() - 1);

    svg::Axis x{0.0, t_hi, double(svg::kLeft), double(svg::kWidth - svg::kRight)};
    svg::Axis y{lmin, lmax, double(svg::kHeight - svg::kBottom), double(svg::kTop)};

    std::string s = svg::header(config_hash);
    s += svg::draw_axes(x, y, "t", "sup", true);
    s += "<polyline fill=\"none\" stroke=\"#1565c0\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < logs.size(); ++i) {
        if (i) s += ' ';
        s += svg::num(x.at(rep.dt * double(i))) + "," + svg::num(y.at(logs[i]));
    }
    s += "\"/>\n";
    s += svg::text(svg::kWidth / 2.0, 24,
                   "sup-norm history (verdict: " + to_string(rep.verdict) + ")", "middle", 15);
    s += "</svg>\n";
    return s;
}

/// Dilation sweep: one marker per row at (log10 lambda, verdict band), colors
/// graded by severity; bracket edges drawn as dashed verticals when finite.
inline std::string render_sweep_svg(const LambdaBracket& bracket,
                                    const std::string& config_hash) {
    const auto& rows = bracket.rows;
    if (rows.empty()) return svg::placeholder(config_hash, "no sweep data");

    double llo = std::log10(rows.front().lambda), lhi = std::log10(rows.back().lambda);
    if (lhi - llo < 1e-9) {
        llo -= 0.5;
        lhi += 0.5;
    }
    svg::Axis x{llo, lhi, double(svg::kLeft), double(svg::kWidth - svg::kRight)};
    svg::Axis y{-0.5, 2.5, double(svg::kHeight - svg::kBottom), double(svg::kTop)};

    std::string s = svg::header(config_hash);
    // band guides and labels instead of a numeric y axis
    const char* band_names[3] = {"converged", "inconclusive", "blowup_evidence"};
    const char* band_colors[3] = {"#2e7d32", "#f9a825", "#c62828"};
    s += svg::line(x.p0, y.p0, x.p1, y.p0);
    for (int b = 0; b < 3; ++b) {
        const double yp = y.at(double(b));
        s += svg::line(x.p0, yp, x.p1, yp, "#dddddd", 1.0, "3,3");
        s += svg::text(x.p0 - 9, yp + 4, band_names[b], "end", 12, band_colors[b]);
    }
    const int n = 5;
    for (int i = 0; i <= n; ++i) {
        const double xv = llo + (lhi - llo) * i / n;
        const double xp = x.at(xv);
        s += svg::line(xp, y.p0, xp, y.p0 + 5);
        s += svg::text(xp, y.p0 + 22, "1e" + svg::num(xv), "middle", 12);
    }
    s += svg::text((x.p0 + x.p1) / 2.0, svg::kHeight - 14, "lambda", "middle", 14);

    if (bracket.lo > 0.0) {
        const double xp = x.at(std::log10(bracket.lo));
        s += svg::line(xp, y.p0, xp, y.p1, "#2e7d32", 1.0, "5,4");
    }
    if (std::isfinite(bracket.hi)) {
        const double xp = x.at(std::log10(bracket.hi));
        s += svg::line(xp, y.p0, xp, y.p1, "#c62828", 1.0, "5,4");
    }
    for (const auto& r : rows) {
        const int band = r.verdict == SolveVerdict::Converged      ? 0
                         : r.verdict == SolveVerdict::Inconclusive ? 1
                                                                   : 2;
        s += "<circle cx=\"" + svg::num(x.at(std::log10(r.lambda))) + "\" cy=\"" +
             svg::num(y.at(double(band))) + "\" r=\"5\" fill=\"" + band_colors[band] +
             "\" stroke=\"#222222\" stroke-width=\"0.5\"/>\n";
    }
    s += svg::text(svg::kWidth / 2.0, 24, "dilation sweep verdicts", "middle", 15);
    s += "</svg>\n";
    return s;
}

} // namespace fracheat
