#include "adaptisent/attention.hpp"

#include <cmath>

namespace adaptisent {

BiasedAttention biased_attention(Tape& tape, VarId q, VarId k, VarId v, VarId s_bias, VarId beta) {
    const std::size_t d_h = tape.val(q).cols();
    if (tape.val(k).cols() != d_h) throw ShapeError("biased_attention: Q/K dim mismatch");
    if (tape.val(k).rows() != tape.val(v).rows())
        throw ShapeError("biased_attention: K/V row mismatch");
    if (tape.val(s_bias).rows() != tape.val(k).rows() || tape.val(s_bias).cols() != 1)
        throw ShapeError("biased_attention: bias must be one column entry per key");

    VarId logits = tape.scale(tape.matmul(q, tape.transpose(k)),
                              1.0 / std::sqrt(static_cast<double>(d_h)));
    VarId bias_row = tape.mul_scalar(tape.transpose(s_bias), beta);
    VarId weights = tape.softmax_rows(tape.add_row_broadcast(logits, bias_row));
    return BiasedAttention{tape.matmul(weights, v), weights};
}

ModalityCoefficients modality_coefficients(Tape& tape, VarId r_ling, VarId r_vis) {
    if (tape.val(r_ling).size() == 0 || tape.val(r_vis).size() == 0)
        throw ShapeError("modality_coefficients: empty scores");
    VarId sum_ling = tape.sum_all(r_ling);
    VarId sum_vis = tape.sum_all(r_vis);
    VarId alpha_t = tape.div(sum_ling, tape.add(sum_ling, sum_vis));
    VarId alpha_v = tape.sub(tape.leaf(Tensor(1, 1, 1.0)), alpha_t);
    return ModalityCoefficients{alpha_t, alpha_v};
}

namespace {

struct Branch {
    VarId output;
    std::vector<Tensor> head_weights;
};

Branch attention_branch(Tape& tape, VarId queries_src, VarId kv_src, VarId s_bias, VarId beta,
                        VarId w_q, VarId w_k, VarId w_v, VarId w_o, int heads) {
    VarId q_all = tape.matmul(queries_src, w_q);
    VarId k_all = tape.matmul(kv_src, w_k);
    VarId v_all = tape.matmul(kv_src, w_v);
    const std::size_t d = tape.val(q_all).cols();
    const std::size_t d_h = d / static_cast<std::size_t>(heads);

    Branch branch;
    std::vector<VarId> head_outputs;
    head_outputs.reserve(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
        const std::size_t c0 = static_cast<std::size_t>(h) * d_h;
        BiasedAttention att = biased_attention(tape,
                                               tape.slice_cols(q_all, c0, c0 + d_h),
                                               tape.slice_cols(k_all, c0, c0 + d_h),
                                               tape.slice_cols(v_all, c0, c0 + d_h),
                                               s_bias, beta);
        head_outputs.push_back(att.output);
        branch.head_weights.push_back(tape.val(att.weights));
    }
    VarId heads_cat = heads == 1 ? head_outputs[0] : tape.concat_cols(head_outputs);
    branch.output = tape.matmul(heads_cat, w_o);
    return branch;
}

} // namespace

AttentionOutput unified_attention(Tape& tape, const ParamVars& pv, const RunConfig& config,
                                  VarId text_states, VarId visual_kv, VarId s_text, VarId s_vis,
                                  VarId r_ling, VarId r_vis) {
    Branch text = attention_branch(tape, text_states, text_states, s_text, pv.beta,
                                   pv.text_q, pv.text_k, pv.text_v, pv.text_o, config.heads);
    Branch vis = attention_branch(tape, text_states, visual_kv, s_vis, pv.beta,
                                  pv.vis_q, pv.vis_k, pv.vis_v, pv.vis_o, config.heads);

    ModalityCoefficients coeff = modality_coefficients(tape, r_ling, r_vis);

    AttentionOutput out;
    out.fused = tape.add(tape.mul_scalar(text.output, coeff.alpha_t),
                         tape.mul_scalar(vis.output, coeff.alpha_v));
    out.text_branch = text.output;
    out.vis_branch = vis.output;
    out.weights_text = std::move(text.head_weights);
    out.weights_vis = std::move(vis.head_weights);
    out.alpha_t_var = coeff.alpha_t;
    out.alpha_v_var = coeff.alpha_v;
    out.alpha_t = tape.val(coeff.alpha_t)[0];
    out.alpha_v = tape.val(coeff.alpha_v)[0];
    return out;
}

} // namespace adaptisent
