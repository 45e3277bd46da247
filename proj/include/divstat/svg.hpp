#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "scores.hpp"
#include "stats.hpp"

namespace divstat {

enum class plot_axis {
    log10_lscd,
    log10_risk,
    predicted_risk,
    observed_risk,
    ear,
    err_axis,
    s_axis,
    sd_product
};

enum class plot_overlay { none, regression_line, identity_line, ers_contours };

struct plot_spec {
    plot_axis x_axis = plot_axis::log10_lscd;
    plot_axis y_axis = plot_axis::log10_risk;
    plot_overlay overlay = plot_overlay::none;
    std::vector<double> contour_levels; // used by the ers_contours overlay
    unsigned width = 720;
    unsigned height = 540;
    bool point_labels = false;
};

namespace svg_detail {

inline const char* axis_column(plot_axis a) {
    switch (a) {
        case plot_axis::log10_lscd: return "lscd";
        case plot_axis::log10_risk: return "lifetime_risk";
        case plot_axis::predicted_risk: return "predicted_risk";
        case plot_axis::observed_risk: return "observed_risk";
        case plot_axis::ear: return "ear";
        case plot_axis::err_axis: return "err";
        case plot_axis::s_axis: return "s";
        case plot_axis::sd_product: return "sd_product";
    }
    return "";
}

inline bool axis_is_log(plot_axis a) {
    return a == plot_axis::log10_lscd || a == plot_axis::log10_risk;
}

inline const char* axis_title(plot_axis a) {
    switch (a) {
        case plot_axis::log10_lscd: return "lscd (log scale)";
        case plot_axis::log10_risk: return "lifetime risk (log scale)";
        case plot_axis::predicted_risk: return "predicted risk";
        case plot_axis::observed_risk: return "observed risk";
        case plot_axis::ear: return "EAR";
        case plot_axis::err_axis: return "ERR";
        case plot_axis::s_axis: return "s";
        case plot_axis::sd_product: return "s*d";
    }
    return "";
}

inline std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline void escape_text(std::string& out, const std::string& s) {
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
}

} // namespace svg_detail

// Standalone SVG scatter plot. Log axes carry decade ticks (1e-8 .. 1e13
// style labels); overlays use one <line> element for the regression and
// identity variants and one <polyline> per contour level, with data points
// as <circle> elements only, so structural checks can count shapes.
inline std::string render_scatter(const csv::table& t, const plot_spec& spec) {
    using namespace svg_detail;
    if (spec.x_axis == spec.y_axis) throw validation_error("plot: axes must differ");
    if (spec.width < 100 || spec.height < 100)
        throw validation_error("plot: dimensions must be at least 100 px");

    const std::size_t cx = csv::column_index(t, axis_column(spec.x_axis));
    const std::size_t cy = csv::column_index(t, axis_column(spec.y_axis));
    const auto cname = csv::find_column(t, "name");
    if (spec.point_labels && !cname)
        throw validation_error("plot: point labels need a 'name' column");
    if (t.rows.empty()) throw validation_error("plot: no data rows");

    std::vector<double> xs, ys;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::size_t line = t.row_numbers[i];
        double x = csv::parse_real(t.rows[i][cx], line, axis_column(spec.x_axis));
        double y = csv::parse_real(t.rows[i][cy], line, axis_column(spec.y_axis));
        if (axis_is_log(spec.x_axis)) {
            if (!(x > 0.0))
                throw validation_error("row " + std::to_string(line) +
                                       ": log axis needs positive values");
            x = std::log10(x);
        }
        if (axis_is_log(spec.y_axis)) {
            if (!(y > 0.0))
                throw validation_error("row " + std::to_string(line) +
                                       ": log axis needs positive values");
            y = std::log10(y);
        }
        xs.push_back(x);
        ys.push_back(y);
        if (cname) names.push_back(t.rows[i][*cname]);
    }

    const auto pad_range = [](double lo, double hi) {
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double pad = 0.05 * (hi - lo);
        return std::pair<double, double>(lo - pad, hi + pad);
    };
    auto [xmin, xmax] = pad_range(*std::min_element(xs.begin(), xs.end()),
                                  *std::max_element(xs.begin(), xs.end()));
    auto [ymin, ymax] = pad_range(*std::min_element(ys.begin(), ys.end()),
                                  *std::max_element(ys.begin(), ys.end()));

    const double ml = 78.0, mr = 22.0, mt = 22.0, mb = 56.0;
    const double pw = static_cast<double>(spec.width) - ml - mr;
    const double ph = static_cast<double>(spec.height) - mt - mb;
    const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
           "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " +
           std::to_string(spec.width) + " " + std::to_string(spec.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    svg += "<clipPath id=\"plotarea\"><rect x=\"" + fmt2(ml) + "\" y=\"" + fmt2(mt) +
           "\" width=\"" + fmt2(pw) + "\" height=\"" + fmt2(ph) + "\"/></clipPath>\n";
    svg += "<rect x=\"" + fmt2(ml) + "\" y=\"" + fmt2(mt) + "\" width=\"" + fmt2(pw) +
           "\" height=\"" + fmt2(ph) + "\" fill=\"none\" stroke=\"#333333\"/>\n";

    // Ticks: every decade inside a log axis range, five even steps otherwise.
    std::string tickpath;
    const auto x_tick = [&](double v, const std::string& label) {
        const double X = px(v);
        tickpath += "M" + fmt2(X) + " " + fmt2(mt + ph) + "V" + fmt2(mt + ph + 6.0);
        svg += "<text x=\"" + fmt2(X) + "\" y=\"" + fmt2(mt + ph + 20.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + label +
               "</text>\n";
    };
    const auto y_tick = [&](double v, const std::string& label) {
        const double Y = py(v);
        tickpath += "M" + fmt2(ml) + " " + fmt2(Y) + "H" + fmt2(ml - 6.0);
        svg += "<text x=\"" + fmt2(ml - 9.0) + "\" y=\"" + fmt2(Y + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + label +
               "</text>\n";
    };
    if (axis_is_log(spec.x_axis)) {
        for (int k = static_cast<int>(std::ceil(xmin)); k <= static_cast<int>(std::floor(xmax));
             ++k) {
            char lab[16];
            std::snprintf(lab, sizeof lab, "1e%d", k);
            x_tick(static_cast<double>(k), lab);
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            const double v = xmin + (xmax - xmin) * static_cast<double>(i) / 4.0;
            x_tick(v, fmt_tick(v));
        }
    }
    if (axis_is_log(spec.y_axis)) {
        for (int k = static_cast<int>(std::ceil(ymin)); k <= static_cast<int>(std::floor(ymax));
             ++k) {
            char lab[16];
            std::snprintf(lab, sizeof lab, "1e%d", k);
            y_tick(static_cast<double>(k), lab);
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            const double v = ymin + (ymax - ymin) * static_cast<double>(i) / 4.0;
            y_tick(v, fmt_tick(v));
        }
    }
    svg += "<path d=\"" + tickpath + "\" stroke=\"#333333\" fill=\"none\"/>\n";

    svg += "<text x=\"" + fmt2(ml + pw / 2.0) + "\" y=\"" +
           fmt2(static_cast<double>(spec.height) - 14.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
           axis_title(spec.x_axis) + "</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt2(mt + ph / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 18 " +
           fmt2(mt + ph / 2.0) + ")\">" + axis_title(spec.y_axis) + "</text>\n";

    if (spec.overlay == plot_overlay::regression_line) {
        const regression_fit f = ols(xs, ys);
        svg += "<line x1=\"" + fmt2(px(xmin)) + "\" y1=\"" + fmt2(py(f.at(xmin))) + "\" x2=\"" +
               fmt2(px(xmax)) + "\" y2=\"" + fmt2(py(f.at(xmax))) +
               "\" stroke=\"#c0392b\" stroke-width=\"1.5\" clip-path=\"url(#plotarea)\"/>\n";
    } else if (spec.overlay == plot_overlay::identity_line) {
        const double a = std::max(xmin, ymin);
        const double b = std::min(xmax, ymax);
        if (a < b)
            svg += "<line x1=\"" + fmt2(px(a)) + "\" y1=\"" + fmt2(py(a)) + "\" x2=\"" +
                   fmt2(px(b)) + "\" y2=\"" + fmt2(py(b)) +
                   "\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";
    } else if (spec.overlay == plot_overlay::ers_contours) {
        if (spec.x_axis != plot_axis::log10_lscd || spec.y_axis != plot_axis::log10_risk)
            throw validation_error("plot: ers_contours requires log10_lscd vs log10_risk axes");
        if (spec.contour_levels.empty())
            throw validation_error("plot: ers_contours needs at least one level");
        const double x_lo = std::max(xmin, 0.05);
        for (double level : spec.contour_levels) {
            const ers_contour c = ers_contour_points(level, x_lo, xmax, 256);
            std::string pts;
            for (const auto& [x, y] : c.points) {
                pts += fmt2(px(x));
                pts += ',';
                pts += fmt2(py(y));
                pts += ' ';
            }
            if (!pts.empty()) pts.pop_back();
            svg += "<polyline points=\"" + pts +
                   "\" fill=\"none\" stroke=\"#7f8c8d\" stroke-width=\"1\" "
                   "clip-path=\"url(#plotarea)\"/>\n";
        }
    }

    for (std::size_t i = 0; i < xs.size(); ++i) {
        svg += "<circle cx=\"" + fmt2(px(xs[i])) + "\" cy=\"" + fmt2(py(ys[i])) +
               "\" r=\"3.5\" fill=\"#2c6fbb\" fill-opacity=\"0.85\"/>\n";
        if (spec.point_labels) {
            svg += "<text x=\"" + fmt2(px(xs[i]) + 5.0) + "\" y=\"" + fmt2(py(ys[i]) - 4.0) +
                   "\" font-family=\"sans-serif\" font-size=\"9\">";
            escape_text(svg, names[i]);
            svg += "</text>\n";
        }
    }

    svg += "</svg>\n";
    return svg;
}

} // namespace divstat
