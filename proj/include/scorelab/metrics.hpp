#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scorelab {

// Diversity summary for samples measured against a set of mode centers.
// Samples farther than `threshold` from every center stay unassigned and are
// excluded from the histogram; the KL term compares the assigned histogram
// against the uniform distribution over all modes (zero-count modes contribute
// zero terms and show up as reduced coverage instead).
struct ModeReport {
    int covered = 0;
    int total_modes = 0;
    double kl_nats = 0.0;
    std::vector<std::int64_t> counts;
    std::int64_t unassigned = 0;
    std::int64_t samples = 0;
    double threshold = 0.0;
};

// Nearest-center assignment with a distance cutoff. Columns are points.
ModeReport mode_coverage(const Eigen::MatrixXd& samples,
                         const Eigen::MatrixXd& centers, double threshold);

// Mean over samples of the Euclidean distance to the nearest center (or to
// the nearest reference data point, when a dataset is passed instead).
double mean_nearest_mode_distance(const Eigen::MatrixXd& samples,
                                  const Eigen::MatrixXd& centers);

// Two-sample energy distance 2 E||a-b|| - E||a-a'|| - E||b-b'|| with the
// plug-in (V-statistic) expectations, so identical samples give exactly zero
// and the value is non-negative for any pair of inputs.
double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

nlohmann::json mode_report_to_json(const ModeReport& report);
ModeReport mode_report_from_json(const nlohmann::json& j);

// One fixed-width row per report so runs can be concatenated into a table.
std::string mode_report_csv_header();
std::string mode_report_csv_row(const ModeReport& report);

}  // namespace scorelab
