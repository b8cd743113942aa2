#pragma once

#include "adaptisent/train.hpp"

namespace adaptisent::testing {

inline RunConfig tiny_config() { return grad_check_config(); }

inline MultimodalInstance tiny_instance(const RunConfig& cfg, int length, int patches,
                                        std::uint64_t seed) {
    return probe_instance(cfg, length, patches, seed);
}

} // namespace adaptisent::testing
