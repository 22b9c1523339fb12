#include "scorelab/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "scorelab/csv.hpp"

namespace scorelab {

namespace {

void require_points(const Eigen::MatrixXd& m, const char* what) {
    if (m.cols() == 0 || m.rows() == 0)
        throw std::invalid_argument(std::string(what) + " must be non-empty");
}

// Index and distance of the center nearest to x.
std::pair<Eigen::Index, double> nearest_center(const Eigen::MatrixXd& centers,
                                               const Eigen::VectorXd& x) {
    Eigen::Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < centers.cols(); ++k) {
        const double d2 = (centers.col(k) - x).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = k;
        }
    }
    return {best, std::sqrt(best_d2)};
}

// Sum over all column pairs of ||a_i - b_j||, including i == j when a and b
// alias the same matrix.
double pairwise_distance_sum(const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        total += (a.colwise() - b.col(j)).colwise().norm().sum();
    return total;
}

}  // namespace

ModeReport mode_coverage(const Eigen::MatrixXd& samples,
                         const Eigen::MatrixXd& centers, double threshold) {
    require_points(samples, "mode_coverage: samples");
    require_points(centers, "mode_coverage: centers");
    if (samples.rows() != centers.rows())
        throw std::invalid_argument("mode_coverage: dimension mismatch");
    if (!(threshold > 0.0))
        throw std::invalid_argument("mode_coverage: threshold must be > 0");

    ModeReport report;
    report.total_modes = static_cast<int>(centers.cols());
    report.samples = samples.cols();
    report.threshold = threshold;
    report.counts.assign(static_cast<std::size_t>(centers.cols()), 0);

    for (Eigen::Index i = 0; i < samples.cols(); ++i) {
        const auto [k, dist] = nearest_center(centers, samples.col(i));
        if (dist <= threshold)
            ++report.counts[static_cast<std::size_t>(k)];
        else
            ++report.unassigned;
    }

    std::int64_t assigned = 0;
    for (std::int64_t c : report.counts) {
        assigned += c;
        if (c > 0) ++report.covered;
    }
    if (assigned > 0) {
        const double k_modes = static_cast<double>(report.total_modes);
        double kl = 0.0;
        for (std::int64_t c : report.counts) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / static_cast<double>(assigned);
            kl += p * std::log(p * k_modes);
        }
        report.kl_nats = std::max(kl, 0.0);
    }
    return report;
}

double mean_nearest_mode_distance(const Eigen::MatrixXd& samples,
                                  const Eigen::MatrixXd& centers) {
    require_points(samples, "mean_nearest_mode_distance: samples");
    require_points(centers, "mean_nearest_mode_distance: centers");
    if (samples.rows() != centers.rows())
        throw std::invalid_argument("mean_nearest_mode_distance: dimension mismatch");
    double total = 0.0;
    for (Eigen::Index i = 0; i < samples.cols(); ++i)
        total += nearest_center(centers, samples.col(i)).second;
    return total / static_cast<double>(samples.cols());
}

double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    require_points(a, "energy_distance: first sample");
    require_points(b, "energy_distance: second sample");
    if (a.rows() != b.rows())
        throw std::invalid_argument("energy_distance: dimension mismatch");
    const double na = static_cast<double>(a.cols());
    const double nb = static_cast<double>(b.cols());
    const double cross = pairwise_distance_sum(a, b) / (na * nb);
    const double within_a = pairwise_distance_sum(a, a) / (na * na);
    const double within_b = pairwise_distance_sum(b, b) / (nb * nb);
    return 2.0 * cross - within_a - within_b;
}

nlohmann::json mode_report_to_json(const ModeReport& report) {
    return nlohmann::json{{"covered", report.covered},
                          {"total_modes", report.total_modes},
                          {"kl_nats", report.kl_nats},
                          {"counts", report.counts},
                          {"unassigned", report.unassigned},
                          {"samples", report.samples},
                          {"threshold", report.threshold}};
}

ModeReport mode_report_from_json(const nlohmann::json& j) {
    ModeReport report;
    report.covered = j.at("covered").get<int>();
    report.total_modes = j.at("total_modes").get<int>();
    report.kl_nats = j.at("kl_nats").get<double>();
    report.counts = j.at("counts").get<std::vector<std::int64_t>>();
    report.unassigned = j.at("unassigned").get<std::int64_t>();
    report.samples = j.at("samples").get<std::int64_t>();
    report.threshold = j.at("threshold").get<double>();
    return report;
}

std::string mode_report_csv_header() {
    return "covered,total_modes,kl_nats,unassigned,samples,threshold";
}

std::string mode_report_csv_row(const ModeReport& report) {
    std::ostringstream out;
    out << report.covered << ',' << report.total_modes << ','
        << format_double(report.kl_nats) << ',' << report.unassigned << ','
        << report.samples << ',' << format_double(report.threshold);
    return out.str();
}

}  // namespace scorelab
