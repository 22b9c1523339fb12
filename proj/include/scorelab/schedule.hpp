#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace scorelab {

// Geometric sequence of noise levels, largest first.
struct NoiseSchedule {
    std::vector<double> sigmas;  // sigmas[0] = sigma1 >= ... >= sigmas[L-1] = sigmaL
    double gamma = 1.0;          // common ratio; 1.0 when L == 1

    int levels() const { return static_cast<int>(sigmas.size()); }
    double sigma1() const { return sigmas.front(); }
    double sigmaL() const { return sigmas.back(); }
};

// Builds the L-level geometric schedule from sigma1 down to sigmaL.
// Endpoints are stored exactly; interior levels are sigma1 * gamma^i.
// Requires sigma1 >= sigmaL > 0 and L >= 1; L == 1 requires sigma1 == sigmaL,
// and sigma1 == sigmaL requires L == 1.
NoiseSchedule geometric_schedule(double sigma1, double sigmaL, int L);

// Refines a schedule by inserting n_sigma - 1 intermediate levels between
// consecutive pairs, keeping the geometric spacing: the result has
// (L - 1) * n_sigma + 1 levels with ratio gamma^(1/n_sigma). Every original
// level appears in the result at stride n_sigma.
NoiseSchedule dilate(const NoiseSchedule& s, int n_sigma);

// Largest pairwise Euclidean distance in a point set (columns are points).
double max_pairwise_distance(const Eigen::MatrixXd& points);

// Recommended sigma1 for a dataset: the maximum pairwise distance, so the
// coarsest level lets a chain cross between any two data modes in one jump.
double sigma1_from_data(const Eigen::MatrixXd& points);

struct SamplerConstants {
    double epsilon;  // sampling step size
    double eta;      // epsilon / sigmaL^2
    double beta;     // sqrt(1 - (1 - eta)^2 / gamma^2)
};

// Derives the sampling-step constants for a schedule and step size epsilon.
// Requires 0 < eta <= 1 (step-too-large otherwise) and (1 - eta)^2 <= gamma^2
// (step-too-small: the per-step contraction cannot keep up with the schedule's
// decay, so the prescribed noise levels are unreachable). Hard errors, never
// clamped, because the sampler's exact-variance guarantee depends on them.
SamplerConstants cas_constants(const NoiseSchedule& s, double epsilon);

// JSON round-trip: {"sigma1", "sigmaL", "L", "gamma", "sigmas": [...]}
std::string schedule_to_json(const NoiseSchedule& s);
NoiseSchedule schedule_from_json(const std::string& text);

}  // namespace scorelab
