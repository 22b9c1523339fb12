#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "scorelab/mlp.hpp"

namespace scorelab {

// On-disk model snapshot: "SLCP" magic, a little-endian uint64 header
// length, a JSON header (widths, activation, conditional flag, training
// step, parameter count, EMA presence/decay), then the raw parameters as
// little-endian float64, followed by the EMA shadow when present.
struct Checkpoint {
    std::vector<int> widths;
    bool conditional = false;
    std::uint64_t step = 0;
    Eigen::VectorXd params;
    std::optional<Eigen::VectorXd> ema;
    double ema_decay = 0.0;

    Mlp make_net(bool use_ema) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace scorelab
