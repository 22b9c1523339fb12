#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace scorelab {

// Minimal hand-rolled SVG plotting: scatter points and polylines, nothing
// else. Plots are a convenience view of the CSV outputs, not a contract.
struct SvgSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
    std::string color;  // empty -> palette color by series index
    bool lines = true;  // false -> scatter dots
};

struct SvgPlotOptions {
    int width = 720;
    int height = 480;
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;  // positive y values required when set
};

std::string render_svg_plot(const std::vector<SvgSeries>& series,
                            const SvgPlotOptions& options);

void save_svg_plot(const std::string& path,
                   const std::vector<SvgSeries>& series,
                   const SvgPlotOptions& options);

// Scatter of 2-D points (columns); convenience wrapper for sample dumps.
SvgSeries scatter_series(const Eigen::MatrixXd& points,
                         const std::string& label = "",
                         const std::string& color = "");

}  // namespace scorelab
