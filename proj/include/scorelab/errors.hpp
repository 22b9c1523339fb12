#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scorelab {

// Bad user-facing configuration (CLI flags, config files, malformed inputs).
// The CLI maps this to its own exit code, distinct from numeric failures.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an iterative process produces non-finite or runaway state.
// `step` names the first offending update so bad step sizes are debuggable.
struct DivergenceError : std::runtime_error {
    std::size_t step;
    DivergenceError(const std::string& what, std::size_t step_index)
        : std::runtime_error(what), step(step_index) {}
};

}  // namespace scorelab
