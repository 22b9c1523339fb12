#include "scorelab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "scorelab/errors.hpp"

namespace scorelab {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

std::vector<double> parse_row(const std::string& line, const std::string& path) {
    std::vector<double> row;
    for (const auto& f : split_line(line)) {
        try {
            std::size_t pos = 0;
            row.push_back(std::stod(f, &pos));
            if (pos != f.size()) throw std::invalid_argument(f);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric field '" + f + "' in " + path);
        }
    }
    return row;
}

}  // namespace

void save_points_csv(const std::string& path, const Eigen::MatrixXd& points) {
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out << (i ? ",x" : "x") << i;
    out << "\n";
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            if (i) out << ",";
            out << format_double(points(i, j));
        }
        out << "\n";
    }
}

Eigen::MatrixXd load_points_csv(const std::string& path) {
    const CsvTable t = load_csv(path);
    if (t.columns.empty() || t.columns[0] != "x0")
        throw ConfigError("expected point CSV with header x0,x1,... in " + path);
    Eigen::MatrixXd points(t.columns.size(), t.rows.size());
    for (std::size_t j = 0; j < t.rows.size(); ++j) {
        if (t.rows[j].size() != t.columns.size())
            throw ConfigError("ragged row in " + path);
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                t.rows[j][i];
    }
    return points;
}

void save_csv(const std::string& path, const CsvTable& table) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

CsvTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.columns = split_line(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        t.rows.push_back(parse_row(line, path));
    }
    return t;
}

}  // namespace scorelab
