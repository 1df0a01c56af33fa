#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "calibkit/diagram.hpp"

namespace calibkit {

/// Rendering style. The bin fill uses a sequential five-stop ramp
/// (ColorBrewer "Blues": #f7fbff, #c6dbef, #6baed6, #2171b5, #08306b)
/// interpolated linearly in sRGB over p_hat scaled by the largest bin mass.
struct SvgStyle {
    int width = 640;
    int height = 420;
    int simplex_size = 560;
    std::string marker_color = "#1f3a93";
    std::string band_color = "#d64541";
    std::string histogram_color = "#9ecae1";
    std::string curve_color = "#1e824c";
    std::string grid_color = "#b0b0b0";
    std::string arrow_color = "#c0392b";
    std::array<std::array<int, 3>, 5> ramp = {{{0xf7, 0xfb, 0xff},
                                               {0xc6, 0xdb, 0xef},
                                               {0x6b, 0xae, 0xd6},
                                               {0x21, 0x71, 0xb5},
                                               {0x08, 0x30, 0x6b}}};
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::string ramp_color(const SvgStyle& style, double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 4.0;
    const int seg = std::min(static_cast<int>(pos), 3);
    const double frac = pos - seg;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(style.ramp[seg][0] +
                                               frac * (style.ramp[seg + 1][0] - style.ramp[seg][0]))),
                  static_cast<int>(std::lround(style.ramp[seg][1] +
                                               frac * (style.ramp[seg + 1][1] - style.ramp[seg][1]))),
                  static_cast<int>(std::lround(style.ramp[seg][2] +
                                               frac * (style.ramp[seg + 1][2] - style.ramp[seg][2]))));
    return buf;
}

inline void svg_line(std::string& out, double x1, double y1, double x2, double y2,
                     const std::string& color, double width) {
    out += "<line x1=\"" + svg_num(x1) + "\" y1=\"" + svg_num(y1) + "\" x2=\"" + svg_num(x2) +
           "\" y2=\"" + svg_num(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" +
           svg_num(width) + "\"/>\n";
}

}  // namespace detail

/// Deviation reliability diagram: deviation crosses at the per-bin average
/// prediction, red consistency bars, the prediction histogram along the
/// bottom, and the analytic deviation curve when present.
inline std::string render_svg(const Diagram1D& diagram, const SvgStyle& style = {}) {
    using detail::svg_line;
    using detail::svg_num;

    const double left = 50.0;
    const double right = style.width - 15.0;
    const double top = 15.0;
    const double bottom = style.height - 40.0;
    const double hist_height = 0.25 * (bottom - top);

    double dev_span = 0.1;
    for (const auto& mark : diagram.marks) {
        dev_span = std::max(dev_span, std::abs(mark.deviation));
        if (mark.band) {
            dev_span = std::max({dev_span, std::abs(mark.band->first),
                                 std::abs(mark.band->second)});
        }
    }
    for (const auto& [t, dev] : diagram.analytic_deviation) {
        dev_span = std::max(dev_span, std::abs(dev));
    }
    dev_span = std::ceil(dev_span * 10.0) / 10.0;

    const auto x_of = [&](double t) { return left + t * (right - left); };
    const auto y_of = [&](double dev) {
        return top + (dev_span - dev) / (2.0 * dev_span) * (bottom - top);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
           "\" height=\"" + std::to_string(style.height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // histogram along the bottom edge
    long max_count = 1;
    for (long c : diagram.histogram) max_count = std::max(max_count, c);
    const auto bins = static_cast<double>(diagram.histogram.size());
    for (std::size_t b = 0; b < diagram.histogram.size(); ++b) {
        if (diagram.histogram[b] == 0) continue;
        const double h =
            hist_height * static_cast<double>(diagram.histogram[b]) / static_cast<double>(max_count);
        const double x0 = x_of(static_cast<double>(b) / bins);
        const double x1 = x_of(static_cast<double>(b + 1) / bins);
        out += "<rect x=\"" + svg_num(x0) + "\" y=\"" + svg_num(bottom - h) + "\" width=\"" +
               svg_num(x1 - x0) + "\" height=\"" + svg_num(h) + "\" fill=\"" +
               style.histogram_color + "\" fill-opacity=\"0.7\"/>\n";
    }

    // frame and zero-deviation line
    svg_line(out, left, top, left, bottom, style.grid_color, 1.0);
    svg_line(out, left, bottom, right, bottom, style.grid_color, 1.0);
    svg_line(out, left, y_of(0.0), right, y_of(0.0), style.grid_color, 1.0);
    out += "<text x=\"" + svg_num(left - 8) + "\" y=\"" + svg_num(y_of(0.0) + 4) +
           "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">0</text>\n";
    out += "<text x=\"" + svg_num(left - 8) + "\" y=\"" + svg_num(top + 8) +
           "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" +
           svg_num(dev_span) + "</text>\n";
    out += "<text x=\"" + svg_num((left + right) / 2) + "\" y=\"" +
           svg_num(style.height - 12.0) +
           "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
           "average prediction</text>\n";

    // analytic deviation curve
    if (!diagram.analytic_deviation.empty()) {
        out += "<polyline fill=\"none\" stroke=\"" + style.curve_color +
               "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [t, dev] : diagram.analytic_deviation) {
            out += svg_num(x_of(t)) + "," + svg_num(y_of(dev)) + " ";
        }
        out += "\"/>\n";
    }

    // consistency bars then deviation crosses
    for (const auto& mark : diagram.marks) {
        if (!mark.band) continue;
        const double x = x_of(mark.g_hat);
        out += "<rect x=\"" + svg_num(x - 3.0) + "\" y=\"" + svg_num(y_of(mark.band->second)) +
               "\" width=\"6\" height=\"" +
               svg_num(y_of(mark.band->first) - y_of(mark.band->second)) + "\" fill=\"" +
               style.band_color + "\" fill-opacity=\"0.6\"/>\n";
    }
    for (const auto& mark : diagram.marks) {
        const double x = x_of(mark.g_hat);
        const double y = y_of(mark.deviation);
        svg_line(out, x - 4.0, y - 4.0, x + 4.0, y + 4.0, style.marker_color, 1.5);
        svg_line(out, x - 4.0, y + 4.0, x + 4.0, y - 4.0, style.marker_color, 1.5);
    }

    out += "</svg>\n";
    return out;
}

/// Simplex reliability diagram: triangle with vertex order class 0 at the
/// bottom-left, class 1 at the bottom-right, class 2 at the top; grid cells
/// filled by occupancy, arrows from average prediction to regression value.
inline std::string render_svg(const DiagramSimplex& diagram, const SvgStyle& style = {}) {
    using detail::svg_num;

    const double size = style.simplex_size;
    const double pad = 40.0;
    const double side = size - 2.0 * pad;
    const double v0x = pad, v0y = size - pad;               // class 0
    const double v1x = size - pad, v1y = size - pad;        // class 1
    const double v2x = size / 2.0, v2y = size - pad - side * 0.86602540378443864676;

    const auto to_xy = [&](const std::array<double, 3>& b) {
        return std::array<double, 2>{b[0] * v0x + b[1] * v1x + b[2] * v2x,
                                     b[0] * v0y + b[1] * v1y + b[2] * v2y};
    };

    double max_p = 0.0;
    for (double p : diagram.p_hats) max_p = std::max(max_p, p);
    if (max_p <= 0.0) max_p = 1.0;

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(style.simplex_size) + "\" height=\"" +
           std::to_string(style.simplex_size) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t cell = 0; cell < diagram.cells.size(); ++cell) {
        const auto& verts = diagram.cells[cell];
        std::string points;
        for (const auto& v : verts) {
            const auto [x, y] = to_xy(v);
            points += svg_num(x) + "," + svg_num(y) + " ";
        }
        const std::string fill = diagram.p_hats[cell] > 0.0
                                     ? detail::ramp_color(style, diagram.p_hats[cell] / max_p)
                                     : std::string("white");
        out += "<polygon points=\"" + points + "\" fill=\"" + fill + "\" stroke=\"" +
               style.grid_color + "\" stroke-width=\"0.5\"/>\n";
    }

    for (const auto& arrow : diagram.arrows) {
        const auto [tx, ty] = to_xy(arrow.tail);
        const auto [hx, hy] = to_xy(arrow.head);
        const double dx = hx - tx;
        const double dy = hy - ty;
        const double len = std::sqrt(dx * dx + dy * dy);
        out += "<line x1=\"" + svg_num(tx) + "\" y1=\"" + svg_num(ty) + "\" x2=\"" +
               svg_num(hx) + "\" y2=\"" + svg_num(hy) + "\" stroke=\"" + style.arrow_color +
               "\" stroke-width=\"1.5\"/>\n";
        if (len > 1e-9) {
            const double ux = dx / len;
            const double uy = dy / len;
            const double head_len = std::min(6.0, len);
            const double bx = hx - head_len * ux;
            const double by = hy - head_len * uy;
            out += "<polygon points=\"" + svg_num(hx) + "," + svg_num(hy) + " " +
                   svg_num(bx - 2.5 * uy) + "," + svg_num(by + 2.5 * ux) + " " +
                   svg_num(bx + 2.5 * uy) + "," + svg_num(by - 2.5 * ux) +
                   "\" fill=\"" + style.arrow_color + "\"/>\n";
        } else {
            out += "<circle cx=\"" + svg_num(hx) + "\" cy=\"" + svg_num(hy) +
                   "\" r=\"1.5\" fill=\"" + style.arrow_color + "\"/>\n";
        }
    }

    const std::array<std::array<double, 2>, 3> anchors = {
        {{v0x - 6.0, v0y + 16.0}, {v1x + 6.0, v1y + 16.0}, {v2x, v2y - 8.0}}};
    const std::array<std::string, 3> align = {"end", "start", "middle"};
    for (std::size_t c = 0; c < 3; ++c) {
        out += "<text x=\"" + svg_num(anchors[c][0]) + "\" y=\"" + svg_num(anchors[c][1]) +
               "\" font-size=\"13\" text-anchor=\"" + align[c] +
               "\" font-family=\"sans-serif\">" + diagram.labels[c] + "</text>\n";
    }

    out += "</svg>\n";
    return out;
}

}  // namespace calibkit
