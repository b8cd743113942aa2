#include "adaptisent/model.hpp"

namespace adaptisent {

InstanceForward forward_instance(Tape& tape, const ParamVars& pv, const RunConfig& config,
                                 const MultimodalInstance& inst, const InstanceFreeze* freeze) {
    const std::size_t L = inst.length();
    if (L == 0) throw ShapeError("forward_instance: empty instance");

    InstanceForward fwd;

    // importance runs on the original (unmasked) token sequence
    EncodedText enc = encode_text(tape, pv, config, inst.tokens, inst.pos, inst.dep, inst.ner);
    fwd.v_i = encode_visual(tape, pv, config, inst.patches);
    fwd.c0 = encode_caption(tape, pv, config, inst.caption);

    fwd.r_vis = visual_relevance(tape, pv, config, enc.t0, fwd.v_i, fwd.c0);
    fwd.r_ling = linguistic_importance(tape, pv, enc.ling_dep, enc.ling_pos, enc.ling_ner);
    fwd.s = combined_score(tape, fwd.r_ling, fwd.r_vis, config.gamma);
    fwd.importance = make_profile(tape, fwd.r_vis, fwd.r_ling, fwd.s, tape.val(pv.alpha_m)[0]);

    EncodedText masked_enc;
    if (config.no_masking) {
        fwd.masked_tokens = inst.tokens;
        masked_enc = enc;
    } else if (config.mask_ste) {
        // straight-through path: hard gate forward, sigmoid surrogate backward
        VarId theta = adaptive_threshold_var(tape, fwd.s, pv.alpha_m);
        VarId gate = tape.ste_gate(fwd.s, theta, config.ste_temp);
        fwd.masked_tokens = inst.tokens;
        const Tensor& g = tape.val(gate);
        for (std::size_t i = 0; i < L; ++i)
            if (g(i, 0) > 0.5) fwd.masked_tokens[i] = config.mask_word_id();
        masked_enc = encode_text(tape, pv, config, inst.tokens, inst.pos, inst.dep, inst.ner, gate);
    } else {
        fwd.masked_tokens = freeze ? freeze->masked_tokens
                                   : apply_mask(inst.tokens, fwd.importance.s, fwd.importance.theta,
                                                config.mask_word_id());
        masked_enc = encode_text(tape, pv, config, fwd.masked_tokens, inst.pos, inst.dep, inst.ner);
    }

    // content rows only; cls/sep and p_cls stay out of attention and scoring
    VarId x = tape.slice_rows(masked_enc.t0, 1, L + 1);

    VarId patches = tape.slice_rows(fwd.v_i, 1, tape.val(fwd.v_i).rows());
    VarId visual_kv = tape.matmul(patches, pv.vis_key_proj);
    if (tape.val(fwd.c0).rows() > 0) visual_kv = tape.concat_rows({visual_kv, fwd.c0});

    VarId s_vis = patch_relevance(tape, pv, config, enc.t0, fwd.v_i, fwd.c0);

    fwd.attention = unified_attention(tape, pv, config, x, visual_kv, fwd.s, s_vis,
                                      fwd.r_ling, fwd.r_vis);

    // residual keeps per-token identity under near-uniform early attention;
    // aspect pooling reads the bare text branch so span means carry context
    // rather than the span's own word identity
    VarId h = tape.add(x, fwd.attention.fused);
    fwd.text_states = fwd.attention.text_branch;
    fwd.tag_logits = tag_head(tape, pv, h);
    return fwd;
}

AspectForward add_aspect(Tape& tape, const ParamVars& pv, const RunConfig& config,
                         InstanceForward& fwd, const AspectSpan& span) {
    AspectForward af;
    af.span = span;
    AspectEmbeddings emb = aspect_embeddings(tape, pv, config, span, fwd.text_states, fwd.v_i, fwd.c0);
    af.pair = project_pair(tape, pv, emb.e_t, emb.e_i);
    BalanceFused fused = balance_fuse(tape, pv, af.pair, config.no_balancing);
    af.alpha_j = fused.alpha_j;
    af.alpha_j_value = tape.val(fused.alpha_j)[0];
    af.fused = fused.fused;
    af.sent_logits = sentiment_logits(tape, pv, fused.fused);
    fwd.aspects.push_back(af);
    return af;
}

std::vector<AspectSpan> predict_instance(const ModelParams& params, const RunConfig& config,
                                         const MultimodalInstance& inst) {
    Tape tape;
    ParamVars pv = stage_params(tape, params);
    InstanceForward fwd = forward_instance(tape, pv, config, inst);

    const std::vector<BioTag> tags = argmax_tags(tape.val(fwd.tag_logits));
    std::vector<AspectSpan> result;
    for (auto [start, end] : decode_spans(tags)) {
        AspectSpan span{start, end, SentimentLabel::neutral};
        AspectForward af = add_aspect(tape, pv, config, fwd, span);
        const Tensor& logits = tape.val(af.sent_logits);
        std::size_t best = 0;
        for (std::size_t j = 1; j < 3; ++j)
            if (logits(0, j) > logits(0, best)) best = j;
        span.sentiment = static_cast<SentimentLabel>(best);
        result.push_back(span);
    }
    return result;
}

} // namespace adaptisent
