#pragma once

#include "adaptisent/alignment.hpp"

namespace adaptisent {

enum class BioTag : int { B = 0, I = 1, O = 2 };

// Gold tag sequence for a set of non-overlapping spans.
std::vector<BioTag> gold_bio(std::size_t length, const std::vector<AspectSpan>& aspects);

// Maximal B(I)* runs; an I with no live run is repaired to B.
std::vector<std::pair<int, int>> decode_spans(const std::vector<BioTag>& tags);

// Argmax per row with the fixed tag order breaking ties.
std::vector<BioTag> argmax_tags(const Tensor& logits);

// Linear BIO head over per-token states. Returns L x 3 logits.
VarId tag_head(Tape& tape, const ParamVars& pv, VarId token_states);

struct AspectEmbeddings {
    VarId e_t; // 1 x d, mean of text-branch states over the span
    VarId e_i; // 1 x d_v, attention-pooled visual values
};

// e_t is the span mean of the text-branch states. e_i pools the content
// patch rows (raw, d_v) together with caption rows mapped into the visual
// value space, scored against the span mean through the relevance
// projections; softmax over all pooled rows.
AspectEmbeddings aspect_embeddings(Tape& tape, const ParamVars& pv, const RunConfig& config,
                                   const AspectSpan& span, VarId text_states, VarId v_i, VarId c0);

struct BalanceFused {
    VarId fused;   // 1 x d
    VarId alpha_j; // 1 x 1
};

// alpha_j = sigmoid(u . [e_t' ; e_i'] + b_g); fused = alpha_j e_t' +
// (1 - alpha_j) e_i'. The no_balancing switch pins alpha_j at 0.5.
BalanceFused balance_fuse(Tape& tape, const ParamVars& pv, const AlignedPair& pair, bool no_balancing);

// Linear sentiment head; softmax happens inside the loss / prediction.
VarId sentiment_logits(Tape& tape, const ParamVars& pv, VarId fused);

} // namespace adaptisent
