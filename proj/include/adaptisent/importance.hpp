#pragma once

#include "adaptisent/encoder.hpp"

namespace adaptisent {

// Per-token importance profile. r_vis is a distribution over content tokens,
// r_ling a per-token sigmoid score, s their gamma-blend, and mask[i] is
// exactly s[i] > theta.
struct ImportanceProfile {
    std::vector<double> r_vis;
    std::vector<double> r_ling;
    std::vector<double> s;
    double theta = 0.0;
    std::vector<bool> mask;
};

// Visual-to-text relevance: per content token, mean scaled dot product of the
// relevance-projected token row against the projected patch rows, plus the
// same against caption rows when a caption is present; softmax over tokens.
// t0 includes cls/sep rows, which are excluded; v_i includes the p_cls row,
// also excluded. Returns L x 1.
VarId visual_relevance(Tape& tape, const ParamVars& pv, const RunConfig& config,
                       VarId t0, VarId v_i, VarId c0);

// Patch-side mirror image: softmax over visual rows (content patches, then
// caption tokens) of mean scaled dot products against the text tokens.
// Returns (K + L_c) x 1; the key-side bias for the visual attention branch.
VarId patch_relevance(Tape& tape, const ParamVars& pv, const RunConfig& config,
                      VarId t0, VarId v_i, VarId c0);

// sigmoid(W_d d_i + W_p p_i + W_n n_i + b) per token. Returns L x 1.
VarId linguistic_importance(Tape& tape, const ParamVars& pv,
                            VarId ling_dep, VarId ling_pos, VarId ling_ner);

// gamma * r_ling + (1 - gamma) * r_vis
VarId combined_score(Tape& tape, VarId r_ling, VarId r_vis, double gamma);

// theta = mean(s) + alpha_m * population_std(s). The divide-by-L convention
// is pinned by tests.
double adaptive_threshold(const std::vector<double>& s, double alpha_m);

// On-tape threshold for the straight-through masking path.
VarId adaptive_threshold_var(Tape& tape, VarId s_col, VarId alpha_m);

// Token i is replaced by mask_id iff s[i] > theta (strict).
std::vector<int> apply_mask(const std::vector<int>& tokens, const std::vector<double>& s,
                            double theta, int mask_id);

ImportanceProfile make_profile(const Tape& tape, VarId r_vis, VarId r_ling, VarId s, double alpha_m);

} // namespace adaptisent
