#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace scorelab {

// %.17g formatting: shortest text that round-trips the double exactly
std::string format_double(double v);

// Point sets (d x n, one point per column) serialize one point per row
// under the header "x0,x1,...".
void save_points_csv(const std::string& path, const Eigen::MatrixXd& points);
Eigen::MatrixXd load_points_csv(const std::string& path);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void save_csv(const std::string& path, const CsvTable& table);
CsvTable load_csv(const std::string& path);

}  // namespace scorelab
