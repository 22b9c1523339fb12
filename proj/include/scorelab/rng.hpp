#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace scorelab {

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Sequential stream used where draws are consumed in a documented order
// (training loops, dataset generators). Normals always cost two uniform
// draws; nothing is cached, so the draw count per operation is fixed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on (0, 1)
    double uniform();

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n);

    // standard normal (Box-Muller, two uniforms, cosine branch only)
    double normal();

    Eigen::VectorXd normal_vector(int d);
    Eigen::MatrixXd normal_matrix(int rows, int cols);

  private:
    std::mt19937_64 engine_;
};

// Counter-based stream for sampling chains. The draw for a given
// (seed, chain, step, slot) is a pure function of those four values, so
// chains can be evaluated in any order or in parallel and still reproduce.
class ChainRng {
  public:
    ChainRng(std::uint64_t run_seed, std::uint64_t chain_index);

    // standard normal for draw slot `slot` of step `step`
    double normal(std::uint64_t step, std::uint64_t slot) const;

    // fills a d-vector with slots [0, d)
    Eigen::VectorXd normal_vector(std::uint64_t step, int d) const;

  private:
    double uniform(std::uint64_t counter) const;
    std::uint64_t key_;
};

}  // namespace scorelab
