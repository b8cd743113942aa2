#pragma once

#include "adaptisent/core.hpp"
#include "adaptisent/tape.hpp"

namespace adaptisent {

// Deterministic sinusoidal positional encodings, one row per position.
Tensor positional_encoding(std::size_t positions, std::size_t dim);

// ModelParams staged onto a tape as leaves; one per training step.
struct ParamVars {
    VarId word_emb, pos_emb, dep_emb, ner_emb, caption_emb;
    VarId composite_proj, patch_proj, vis_key_proj, cap_val_proj;
    VarId rel_text, rel_vis, rel_cap;
    VarId imp_dep, imp_pos, imp_ner, imp_bias;
    VarId alpha_m, beta;
    VarId text_q, text_k, text_v, text_o;
    VarId vis_q, vis_k, vis_v, vis_o;
    VarId tag_w, tag_b, sent_w, sent_b;
    VarId gate_u, gate_b;
    VarId align_text_w, align_text_b, align_vis_w, align_vis_b;

    std::vector<std::pair<std::string, VarId>> groups() const;
};

ParamVars stage_params(Tape& tape, const ModelParams& params);

struct EncodedText {
    VarId t0;       // (L+2) x d, cls and sep rows are positional-only
    VarId ling_dep; // L x d_d
    VarId ling_pos; // L x d_p
    VarId ling_ner; // L x d_n
};

// Composite token embedding concat(w_i, p_i, d_i), projected to the shared
// dim, plus positional encoding. The NER embedding feeds only the linguistic
// importance score, so it is returned alongside rather than folded in.
// An optional mask gate (L x 1, entries 0/1) blends the word embedding with
// the reserved MASK row; the hard path swaps token ids instead.
EncodedText encode_text(Tape& tape, const ParamVars& pv, const RunConfig& config,
                        const std::vector<int>& tokens, const std::vector<int>& pos,
                        const std::vector<int>& dep, const std::vector<int>& ner,
                        VarId mask_gate = VarId{});

// (K+1) x d_v: projected patches plus positional encoding, p_cls row prepended.
VarId encode_visual(Tape& tape, const ParamVars& pv, const RunConfig& config, const Tensor& patches);

// L_c x d caption embeddings plus positional encoding; 0 x d when empty.
VarId encode_caption(Tape& tape, const ParamVars& pv, const RunConfig& config,
                     const std::vector<int>& caption);

} // namespace adaptisent
