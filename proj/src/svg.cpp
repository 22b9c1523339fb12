#include "scorelab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Bounds {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(lo <= hi)) {  // no finite data
            lo = 0.0;
            hi = 1.0;
            return;
        }
        double span = hi - lo;
        if (span <= 0.0) span = std::abs(hi) > 0.0 ? std::abs(hi) : 1.0;
        lo -= 0.05 * span;
        hi += 0.05 * span;
    }
};

}  // namespace

std::string render_svg_plot(const std::vector<SvgSeries>& series,
                            const SvgPlotOptions& options) {
    const double margin_left = 64, margin_right = 16, margin_top = 36,
                 margin_bottom = 48;
    const double plot_w = options.width - margin_left - margin_right;
    const double plot_h = options.height - margin_top - margin_bottom;
    if (plot_w <= 0 || plot_h <= 0)
        throw std::invalid_argument("render_svg_plot: canvas too small");

    auto y_value = [&](double y) {
        if (!options.log_y) return y;
        if (!(y > 0.0))
            throw std::invalid_argument(
                "render_svg_plot: log_y requires positive y values");
        return std::log10(y);
    };

    Bounds bx, by;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("render_svg_plot: x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            bx.add(s.x[i]);
            by.add(y_value(s.y[i]));
        }
    }
    bx.pad();
    by.pad();

    auto px = [&](double x) {
        return margin_left + (x - bx.lo) / (bx.hi - bx.lo) * plot_w;
    };
    auto py = [&](double y) {
        return margin_top + (by.hi - y_value(y)) / (by.hi - by.lo) * plot_h;
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
        << "\" height=\"" << options.height << "\" viewBox=\"0 0 "
        << options.width << ' ' << options.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<rect x=\"" << fmt(margin_left) << "\" y=\"" << fmt(margin_top)
        << "\" width=\"" << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    const int ticks = 5;
    for (int t = 0; t <= ticks; ++t) {
        const double fx = bx.lo + (bx.hi - bx.lo) * t / ticks;
        const double gx = px(fx);
        svg << "<line x1=\"" << fmt(gx) << "\" y1=\"" << fmt(margin_top)
            << "\" x2=\"" << fmt(gx) << "\" y2=\""
            << fmt(margin_top + plot_h) << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << fmt(gx) << "\" y=\""
            << fmt(margin_top + plot_h + 16)
            << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">"
            << fmt(fx) << "</text>\n";

        const double fy = by.lo + (by.hi - by.lo) * t / ticks;
        const double gy = margin_top + (by.hi - fy) / (by.hi - by.lo) * plot_h;
        svg << "<line x1=\"" << fmt(margin_left) << "\" y1=\"" << fmt(gy)
            << "\" x2=\"" << fmt(margin_left + plot_w) << "\" y2=\"" << fmt(gy)
            << "\" stroke=\"#ddd\"/>\n";
        const double label = options.log_y ? std::pow(10.0, fy) : fy;
        svg << "<text x=\"" << fmt(margin_left - 6) << "\" y=\"" << fmt(gy + 4)
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">"
            << fmt(label) << "</text>\n";
    }

    int color_index = 0;
    double legend_y = margin_top + 14;
    for (const auto& s : series) {
        const std::string color =
            s.color.empty() ? kPalette[color_index % kPaletteSize] : s.color;
        ++color_index;
        if (s.lines) {
            svg << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                svg << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
            }
            svg << "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                svg << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
                    << fmt(py(s.y[i])) << "\" r=\"2\" fill=\"" << color
                    << "\" fill-opacity=\"0.6\"/>\n";
            }
        }
        if (!s.label.empty()) {
            svg << "<text x=\"" << fmt(margin_left + plot_w - 8) << "\" y=\""
                << fmt(legend_y) << "\" font-size=\"12\" text-anchor=\"end\" "
                << "fill=\"" << color << "\">" << escape_text(s.label)
                << "</text>\n";
            legend_y += 16;
        }
    }

    if (!options.title.empty())
        svg << "<text x=\"" << fmt(options.width / 2.0)
            << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\" "
            << "fill=\"#000\">" << escape_text(options.title) << "</text>\n";
    if (!options.x_label.empty())
        svg << "<text x=\"" << fmt(margin_left + plot_w / 2.0) << "\" y=\""
            << fmt(options.height - 12.0)
            << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#000\">"
            << escape_text(options.x_label) << "</text>\n";
    if (!options.y_label.empty())
        svg << "<text x=\"16\" y=\"" << fmt(margin_top + plot_h / 2.0)
            << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#000\" "
            << "transform=\"rotate(-90 16 " << fmt(margin_top + plot_h / 2.0)
            << ")\">" << escape_text(options.y_label) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void save_svg_plot(const std::string& path,
                   const std::vector<SvgSeries>& series,
                   const SvgPlotOptions& options) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open SVG output file: " + path);
    out << render_svg_plot(series, options);
    if (!out) throw ConfigError("failed writing SVG output file: " + path);
}

SvgSeries scatter_series(const Eigen::MatrixXd& points,
                         const std::string& label, const std::string& color) {
    if (points.rows() < 2)
        throw std::invalid_argument("scatter_series: need at least 2-D points");
    SvgSeries s;
    s.lines = false;
    s.label = label;
    s.color = color;
    s.x.reserve(static_cast<std::size_t>(points.cols()));
    s.y.reserve(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        s.x.push_back(points(0, i));
        s.y.push_back(points(1, i));
    }
    return s;
}

}  // namespace scorelab
