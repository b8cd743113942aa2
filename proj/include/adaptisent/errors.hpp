#pragma once

#include <stdexcept>
#include <string>

namespace adaptisent {

// Invalid RunConfig / SyntheticSpec values (bad dims, out-of-range knobs).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape mismatch in an operation.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN/Inf produced or consumed where finite values are required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File / parse failures (JSONL, checkpoints, config files).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace adaptisent
