#pragma once

#include "adaptisent/core.hpp"

namespace adaptisent {

inline constexpr const char* kCheckpointVersion = "adaptisent-ckpt-v1";

struct Checkpoint {
    RunConfig config;
    ModelParams params;
};

// Structured-text dump: version line, config key/value section, then one
// shape-headed block per tensor with hexfloat entries so a save/load round
// trip is bit-exact.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);

} // namespace adaptisent
