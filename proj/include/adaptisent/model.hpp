#pragma once

#include "adaptisent/attention.hpp"
#include "adaptisent/extraction.hpp"
#include "adaptisent/importance.hpp"

namespace adaptisent {

// Inputs pinned at a reference parameter point. The training objective treats
// the masked token ids and the per-token loss weights as data (no gradient
// flows through the masking decision or the weights), so the gradient
// checker must evaluate the loss with both frozen to keep the analytic and
// finite-difference sides looking at the same function.
struct InstanceFreeze {
    std::vector<int> masked_tokens;
    std::vector<double> token_weights;
};

struct AspectForward {
    AspectSpan span;
    AlignedPair pair;
    VarId alpha_j;
    VarId fused;
    VarId sent_logits; // 1 x 3
    double alpha_j_value = 0.0;
};

struct InstanceForward {
    ImportanceProfile importance;
    VarId r_vis, r_ling, s; // L x 1 each
    std::vector<int> masked_tokens;
    VarId tag_logits;  // L x 3
    VarId text_states; // L x d, masked text states + text-branch output
    VarId v_i;         // (K+1) x d_v
    VarId c0;          // L_c x d
    AttentionOutput attention;
    std::vector<AspectForward> aspects;
};

// Builds the full per-instance graph: encode, importance, mask, unified
// attention, tagging head. Aspect subgraphs are appended afterwards with
// add_aspect (gold spans while training, decoded spans at evaluation).
InstanceForward forward_instance(Tape& tape, const ParamVars& pv, const RunConfig& config,
                                 const MultimodalInstance& inst,
                                 const InstanceFreeze* freeze = nullptr);

AspectForward add_aspect(Tape& tape, const ParamVars& pv, const RunConfig& config,
                         InstanceForward& fwd, const AspectSpan& span);

// Full prediction path: decode spans from the tag argmax, then classify each
// decoded span. Pure value-level output.
std::vector<AspectSpan> predict_instance(const ModelParams& params, const RunConfig& config,
                                         const MultimodalInstance& inst);

} // namespace adaptisent
