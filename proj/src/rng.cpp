#include "scorelab/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scorelab {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

// map a 64-bit word to (0, 1]; never returns 0 so log() is safe
double u64_to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

double box_muller(double u1, double u2) {
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

double Rng::uniform() { return u64_to_unit(engine_()); }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    // rejection sampling over the top multiple of n; unbiased
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return box_muller(u1, u2);
}

Eigen::VectorXd Rng::normal_vector(int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = normal();
    return v;
}

Eigen::MatrixXd Rng::normal_matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    // column-major fill: sample j is fully drawn before sample j+1
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
}

ChainRng::ChainRng(std::uint64_t run_seed, std::uint64_t chain_index)
    : key_(mix64(run_seed ^ mix64(chain_index))) {}

double ChainRng::uniform(std::uint64_t counter) const {
    return u64_to_unit(mix64(key_ ^ mix64(counter)));
}

double ChainRng::normal(std::uint64_t step, std::uint64_t slot) const {
    // two distinct counters per (step, slot) cell
    const std::uint64_t base = step * 0x10000ULL + slot;
    const double u1 = uniform(2 * base);
    const double u2 = uniform(2 * base + 1);
    return box_muller(u1, u2);
}

Eigen::VectorXd ChainRng::normal_vector(std::uint64_t step, int d) const {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = normal(step, static_cast<std::uint64_t>(i));
    return v;
}

}  // namespace scorelab
