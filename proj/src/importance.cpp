#include "adaptisent/importance.hpp"

#include <cmath>

namespace adaptisent {

namespace {

// mean_j [(X P_x) (Y P_y)^T]_ij / sqrt(d): rows of X scored against all rows
// of Y through the relevance projections, averaged over Y rows.
VarId mean_scaled_scores(Tape& tape, VarId x, VarId proj_x, VarId y, VarId proj_y, int d) {
    VarId qx = tape.matmul(x, proj_x);
    VarId ky = tape.matmul(y, proj_y);
    VarId scores = tape.matmul(qx, tape.transpose(ky));
    VarId scaled = tape.scale(scores, 1.0 / std::sqrt(static_cast<double>(d)));
    return tape.mean_cols(scaled);
}

} // namespace

VarId visual_relevance(Tape& tape, const ParamVars& pv, const RunConfig& config,
                       VarId t0, VarId v_i, VarId c0) {
    const std::size_t rows = tape.val(t0).rows();
    if (rows < 3) throw ShapeError("visual_relevance: no content tokens");
    VarId tokens = tape.slice_rows(t0, 1, rows - 1);
    VarId patches = tape.slice_rows(v_i, 1, tape.val(v_i).rows());

    VarId logits = mean_scaled_scores(tape, tokens, pv.rel_text, patches, pv.rel_vis, config.d);
    if (tape.val(c0).rows() > 0) {
        VarId cap = mean_scaled_scores(tape, tokens, pv.rel_text, c0, pv.rel_cap, config.d);
        logits = tape.add(logits, cap);
    }
    // softmax over tokens: transpose the column into a row, softmax, back
    return tape.transpose(tape.softmax_rows(tape.transpose(logits)));
}

VarId patch_relevance(Tape& tape, const ParamVars& pv, const RunConfig& config,
                      VarId t0, VarId v_i, VarId c0) {
    const std::size_t rows = tape.val(t0).rows();
    if (rows < 3) throw ShapeError("patch_relevance: no content tokens");
    VarId tokens = tape.slice_rows(t0, 1, rows - 1);
    VarId patches = tape.slice_rows(v_i, 1, tape.val(v_i).rows());

    VarId logits = mean_scaled_scores(tape, patches, pv.rel_vis, tokens, pv.rel_text, config.d);
    if (tape.val(c0).rows() > 0) {
        VarId cap_logits = mean_scaled_scores(tape, c0, pv.rel_cap, tokens, pv.rel_text, config.d);
        logits = tape.concat_rows({logits, cap_logits});
    }
    return tape.transpose(tape.softmax_rows(tape.transpose(logits)));
}

VarId linguistic_importance(Tape& tape, const ParamVars& pv,
                            VarId ling_dep, VarId ling_pos, VarId ling_ner) {
    VarId z = tape.matmul(ling_dep, pv.imp_dep);
    z = tape.add(z, tape.matmul(ling_pos, pv.imp_pos));
    z = tape.add(z, tape.matmul(ling_ner, pv.imp_ner));
    const std::size_t L = tape.val(z).rows();
    Tensor ones(L, 1, 1.0);
    z = tape.add(z, tape.mul_scalar(tape.leaf(ones), pv.imp_bias));
    return tape.sigmoid(z);
}

VarId combined_score(Tape& tape, VarId r_ling, VarId r_vis, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("combined_score: gamma must be in [0,1]");
    if (!tape.val(r_ling).same_shape(tape.val(r_vis)))
        throw ShapeError("combined_score: length mismatch");
    return tape.add(tape.scale(r_ling, gamma), tape.scale(r_vis, 1.0 - gamma));
}

double adaptive_threshold(const std::vector<double>& s, double alpha_m) {
    if (s.empty()) throw ShapeError("adaptive_threshold: empty scores");
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size());
    return mean + alpha_m * std::sqrt(var);
}

VarId adaptive_threshold_var(Tape& tape, VarId s_col, VarId alpha_m) {
    const std::size_t L = tape.val(s_col).rows();
    const double inv_l = 1.0 / static_cast<double>(L);
    VarId mean = tape.scale(tape.sum_all(s_col), inv_l);
    VarId mean_sq = tape.scale(tape.sum_all(tape.mul(s_col, s_col)), inv_l);
    VarId var = tape.sub(mean_sq, tape.mul(mean, mean));
    VarId sigma = tape.sqrt_guarded(var);
    return tape.add(mean, tape.mul(alpha_m, sigma));
}

std::vector<int> apply_mask(const std::vector<int>& tokens, const std::vector<double>& s,
                            double theta, int mask_id) {
    if (tokens.size() != s.size()) throw ShapeError("apply_mask: length mismatch");
    std::vector<int> out = tokens;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (s[i] > theta) out[i] = mask_id;
    return out;
}

ImportanceProfile make_profile(const Tape& tape, VarId r_vis, VarId r_ling, VarId s, double alpha_m) {
    ImportanceProfile prof;
    prof.r_vis = tape.val(r_vis).data();
    prof.r_ling = tape.val(r_ling).data();
    prof.s = tape.val(s).data();
    prof.theta = adaptive_threshold(prof.s, alpha_m);
    prof.mask.resize(prof.s.size());
    for (std::size_t i = 0; i < prof.s.size(); ++i) prof.mask[i] = prof.s[i] > prof.theta;
    return prof;
}

} // namespace adaptisent
