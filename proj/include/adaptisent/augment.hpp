#pragma once

#include "adaptisent/core.hpp"

namespace adaptisent {

// word id -> POS id observed in data; pools[pos] lists the words carrying
// that POS. Built from the training split so perturbation never invents
// unseen (word, pos) pairings.
struct PosPools {
    std::vector<std::vector<int>> pools;
    static PosPools from_dataset(const std::vector<MultimodalInstance>& data, int vocab_pos);
};

// Deterministic stand-in for the LLM augmenter: each non-aspect token is
// replaced, with the given probability, by a word drawn from the same-POS
// pool. Aspect spans, tags, patches, and the caption are untouched.
MultimodalInstance perturb_text(const MultimodalInstance& inst, const PosPools& pools,
                                std::uint64_t seed, double rate);

struct AugmentedCandidate {
    MultimodalInstance instance;
    double coherence = 0.0;
    bool kept = false;
};

// Keeps candidates with coherence >= tau; the no_augmentation switch keeps
// none. Marks each candidate's kept flag in place.
std::vector<MultimodalInstance> filter_augmented(std::vector<AugmentedCandidate>& candidates,
                                                 double tau, bool no_augmentation);

// Sentence-level coherence of a candidate under the given parameters: the
// aligned projection of the mean text-branch state against the mean of the
// alignment-projected patch rows.
double candidate_coherence(const ModelParams& params, const RunConfig& config,
                           const MultimodalInstance& inst);

} // namespace adaptisent
