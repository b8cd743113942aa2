#include "adaptisent/encoder.hpp"

#include <cmath>

namespace adaptisent {

namespace {
// Keeps position subordinate to content: the composite projections emit
// values around 0.05-0.2 at init, and unit-amplitude sinusoids would drown
// them out.
constexpr double kPosAmplitude = 0.1;
} // namespace

Tensor positional_encoding(std::size_t positions, std::size_t dim) {
    Tensor pe(positions, dim);
    for (std::size_t pos = 0; pos < positions; ++pos) {
        for (std::size_t j = 0; j < dim; j += 2) {
            const double freq = std::exp(-std::log(10000.0) * static_cast<double>(j) /
                                         static_cast<double>(dim));
            pe(pos, j) = kPosAmplitude * std::sin(static_cast<double>(pos) * freq);
            if (j + 1 < dim) pe(pos, j + 1) = kPosAmplitude * std::cos(static_cast<double>(pos) * freq);
        }
    }
    return pe;
}

std::vector<std::pair<std::string, VarId>> ParamVars::groups() const {
    return {
        {"word_emb", word_emb},
        {"pos_emb", pos_emb},
        {"dep_emb", dep_emb},
        {"ner_emb", ner_emb},
        {"caption_emb", caption_emb},
        {"composite_proj", composite_proj},
        {"patch_proj", patch_proj},
        {"vis_key_proj", vis_key_proj},
        {"cap_val_proj", cap_val_proj},
        {"rel_text", rel_text},
        {"rel_vis", rel_vis},
        {"rel_cap", rel_cap},
        {"imp_dep", imp_dep},
        {"imp_pos", imp_pos},
        {"imp_ner", imp_ner},
        {"imp_bias", imp_bias},
        {"alpha_m", alpha_m},
        {"beta", beta},
        {"text_q", text_q},
        {"text_k", text_k},
        {"text_v", text_v},
        {"text_o", text_o},
        {"vis_q", vis_q},
        {"vis_k", vis_k},
        {"vis_v", vis_v},
        {"vis_o", vis_o},
        {"tag_w", tag_w},
        {"tag_b", tag_b},
        {"sent_w", sent_w},
        {"sent_b", sent_b},
        {"gate_u", gate_u},
        {"gate_b", gate_b},
        {"align_text_w", align_text_w},
        {"align_text_b", align_text_b},
        {"align_vis_w", align_vis_w},
        {"align_vis_b", align_vis_b},
    };
}

ParamVars stage_params(Tape& tape, const ModelParams& p) {
    ParamVars v;
    v.word_emb = tape.leaf(p.word_emb);
    v.pos_emb = tape.leaf(p.pos_emb);
    v.dep_emb = tape.leaf(p.dep_emb);
    v.ner_emb = tape.leaf(p.ner_emb);
    v.caption_emb = tape.leaf(p.caption_emb);
    v.composite_proj = tape.leaf(p.composite_proj);
    v.patch_proj = tape.leaf(p.patch_proj);
    v.vis_key_proj = tape.leaf(p.vis_key_proj);
    v.cap_val_proj = tape.leaf(p.cap_val_proj);
    v.rel_text = tape.leaf(p.rel_text);
    v.rel_vis = tape.leaf(p.rel_vis);
    v.rel_cap = tape.leaf(p.rel_cap);
    v.imp_dep = tape.leaf(p.imp_dep);
    v.imp_pos = tape.leaf(p.imp_pos);
    v.imp_ner = tape.leaf(p.imp_ner);
    v.imp_bias = tape.leaf(p.imp_bias);
    v.alpha_m = tape.leaf(p.alpha_m);
    v.beta = tape.leaf(p.beta);
    v.text_q = tape.leaf(p.text_q);
    v.text_k = tape.leaf(p.text_k);
    v.text_v = tape.leaf(p.text_v);
    v.text_o = tape.leaf(p.text_o);
    v.vis_q = tape.leaf(p.vis_q);
    v.vis_k = tape.leaf(p.vis_k);
    v.vis_v = tape.leaf(p.vis_v);
    v.vis_o = tape.leaf(p.vis_o);
    v.tag_w = tape.leaf(p.tag_w);
    v.tag_b = tape.leaf(p.tag_b);
    v.sent_w = tape.leaf(p.sent_w);
    v.sent_b = tape.leaf(p.sent_b);
    v.gate_u = tape.leaf(p.gate_u);
    v.gate_b = tape.leaf(p.gate_b);
    v.align_text_w = tape.leaf(p.align_text_w);
    v.align_text_b = tape.leaf(p.align_text_b);
    v.align_vis_w = tape.leaf(p.align_vis_w);
    v.align_vis_b = tape.leaf(p.align_vis_b);
    return v;
}

EncodedText encode_text(Tape& tape, const ParamVars& pv, const RunConfig& config,
                        const std::vector<int>& tokens, const std::vector<int>& pos,
                        const std::vector<int>& dep, const std::vector<int>& ner,
                        VarId mask_gate) {
    const std::size_t L = tokens.size();
    if (pos.size() != L || dep.size() != L || ner.size() != L)
        throw ShapeError("encode_text: tag length mismatch");

    VarId words = tape.gather_rows(pv.word_emb, tokens);
    if (mask_gate.valid()) {
        // soft blend toward the MASK row; forward-identical to hard masking
        // because the gate values are exactly 0/1
        std::vector<int> mask_ids(L, config.mask_word_id());
        VarId mask_rows = tape.gather_rows(pv.word_emb, mask_ids);
        VarId keep = tape.sub(tape.leaf(Tensor(L, 1, 1.0)), mask_gate);
        words = tape.add(tape.mul_col_broadcast(words, keep),
                         tape.mul_col_broadcast(mask_rows, mask_gate));
    }
    VarId pos_rows = tape.gather_rows(pv.pos_emb, pos);
    VarId dep_rows = tape.gather_rows(pv.dep_emb, dep);
    VarId ner_rows = tape.gather_rows(pv.ner_emb, ner);

    VarId composite = tape.concat_cols({words, pos_rows, dep_rows});
    VarId projected = tape.matmul(composite, pv.composite_proj);

    // cls at position 0, tokens at 1..L, sep at L+1; special rows carry only
    // their positional encoding
    const Tensor pe = positional_encoding(L + 2, static_cast<std::size_t>(config.d));
    Tensor pe_tokens(L, static_cast<std::size_t>(config.d));
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < pe_tokens.cols(); ++j) pe_tokens(i, j) = pe(i + 1, j);
    VarId body = tape.add(projected, tape.leaf(pe_tokens));

    Tensor cls_row(1, static_cast<std::size_t>(config.d));
    Tensor sep_row(1, static_cast<std::size_t>(config.d));
    for (std::size_t j = 0; j < cls_row.cols(); ++j) {
        cls_row(0, j) = pe(0, j);
        sep_row(0, j) = pe(L + 1, j);
    }
    VarId t0 = tape.concat_rows({tape.leaf(cls_row), body, tape.leaf(sep_row)});
    return EncodedText{t0, dep_rows, pos_rows, ner_rows};
}

VarId encode_visual(Tape& tape, const ParamVars& pv, const RunConfig& config, const Tensor& patches) {
    if (patches.rows() < 1) throw ShapeError("encode_visual: at least one patch required");
    if (patches.cols() != static_cast<std::size_t>(config.d_v))
        throw ShapeError("encode_visual: patch width != d_v");
    const std::size_t K = patches.rows();
    VarId projected = tape.matmul(tape.leaf(patches), pv.patch_proj);

    const Tensor pe = positional_encoding(K + 1, static_cast<std::size_t>(config.d_v));
    Tensor pe_patches(K, static_cast<std::size_t>(config.d_v));
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < pe_patches.cols(); ++j) pe_patches(i, j) = pe(i + 1, j);
    VarId body = tape.add(projected, tape.leaf(pe_patches));

    Tensor cls_row(1, static_cast<std::size_t>(config.d_v));
    for (std::size_t j = 0; j < cls_row.cols(); ++j) cls_row(0, j) = pe(0, j);
    return tape.concat_rows({tape.leaf(cls_row), body});
}

VarId encode_caption(Tape& tape, const ParamVars& pv, const RunConfig& config,
                     const std::vector<int>& caption) {
    if (caption.empty() || config.no_captions)
        return tape.leaf(Tensor(0, static_cast<std::size_t>(config.d)));
    VarId rows = tape.gather_rows(pv.caption_emb, caption);
    const Tensor pe = positional_encoding(caption.size(), static_cast<std::size_t>(config.d));
    return tape.add(rows, tape.leaf(pe));
}

} // namespace adaptisent
