#pragma once

#include "adaptisent/encoder.hpp"

namespace adaptisent {

struct BiasedAttention {
    VarId output;  // L_q x d_h
    VarId weights; // L_q x L_k, rows sum to 1
};

// softmax(Q K^T / sqrt(d_h) + beta * 1 s_bias^T) V: the bias is a per-key
// column added to every query row's logits. beta and s_bias are tape nodes,
// so gradients reach both.
BiasedAttention biased_attention(Tape& tape, VarId q, VarId k, VarId v, VarId s_bias, VarId beta);

struct ModalityCoefficients {
    VarId alpha_t; // sum(r_ling) / (sum(r_ling) + sum(r_vis))
    VarId alpha_v; // 1 - alpha_t, formed by subtraction so the pair sums to 1 exactly
};

ModalityCoefficients modality_coefficients(Tape& tape, VarId r_ling, VarId r_vis);

struct AttentionOutput {
    VarId fused;       // L x d, alpha_t * text branch + alpha_v * visual branch
    VarId text_branch; // L x d, before mixing
    VarId vis_branch;  // L x d
    std::vector<Tensor> weights_text; // per head, L x L
    std::vector<Tensor> weights_vis;  // per head, L x R
    VarId alpha_t_var, alpha_v_var;
    double alpha_t = 0.0;
    double alpha_v = 0.0;
};

// Both branches query from the (masked) text states; the visual branch keys
// and values come from the stacked patch/caption rows already projected to
// the shared dim. Multi-head with a per-branch output projection.
AttentionOutput unified_attention(Tape& tape, const ParamVars& pv, const RunConfig& config,
                                  VarId text_states, VarId visual_kv, VarId s_text, VarId s_vis,
                                  VarId r_ling, VarId r_vis);

} // namespace adaptisent
