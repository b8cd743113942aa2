#include "adaptisent/extraction.hpp"

#include <cmath>

namespace adaptisent {

std::vector<BioTag> gold_bio(std::size_t length, const std::vector<AspectSpan>& aspects) {
    std::vector<BioTag> tags(length, BioTag::O);
    for (const AspectSpan& a : aspects) {
        if (a.start < 0 || a.end > static_cast<int>(length) || a.start >= a.end)
            throw ShapeError("gold_bio: span out of range");
        tags[static_cast<std::size_t>(a.start)] = BioTag::B;
        for (int i = a.start + 1; i < a.end; ++i) tags[static_cast<std::size_t>(i)] = BioTag::I;
    }
    return tags;
}

std::vector<std::pair<int, int>> decode_spans(const std::vector<BioTag>& tags) {
    std::vector<std::pair<int, int>> spans;
    int start = -1;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        switch (tags[i]) {
        case BioTag::B:
            if (start >= 0) spans.emplace_back(start, static_cast<int>(i));
            start = static_cast<int>(i);
            break;
        case BioTag::I:
            if (start < 0) start = static_cast<int>(i); // orphan I repaired to B
            break;
        case BioTag::O:
            if (start >= 0) {
                spans.emplace_back(start, static_cast<int>(i));
                start = -1;
            }
            break;
        }
    }
    if (start >= 0) spans.emplace_back(start, static_cast<int>(tags.size()));
    return spans;
}

std::vector<BioTag> argmax_tags(const Tensor& logits) {
    if (logits.cols() != 3) throw ShapeError("argmax_tags: expected 3 columns");
    std::vector<BioTag> tags(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < 3; ++j)
            if (logits(i, j) > logits(i, best)) best = j;
        tags[i] = static_cast<BioTag>(best);
    }
    return tags;
}

VarId tag_head(Tape& tape, const ParamVars& pv, VarId token_states) {
    return tape.add_row_broadcast(tape.matmul(token_states, pv.tag_w), pv.tag_b);
}

AspectEmbeddings aspect_embeddings(Tape& tape, const ParamVars& pv, const RunConfig& config,
                                   const AspectSpan& span, VarId text_states, VarId v_i, VarId c0) {
    const std::size_t L = tape.val(text_states).rows();
    if (span.start < 0 || span.start >= span.end || span.end > static_cast<int>(L))
        throw ShapeError("aspect_embeddings: span out of range");

    AspectEmbeddings emb;
    emb.e_t = tape.mean_rows(tape.slice_rows(text_states, static_cast<std::size_t>(span.start),
                                             static_cast<std::size_t>(span.end)));

    // visual values: content patch rows as-is, caption rows mapped to d_v
    VarId patches = tape.slice_rows(v_i, 1, tape.val(v_i).rows());
    VarId values = patches;
    const bool with_caption = tape.val(c0).rows() > 0;
    if (with_caption) values = tape.concat_rows({patches, tape.matmul(c0, pv.cap_val_proj)});

    // scores through the relevance projections, query = span mean
    VarId query = tape.matmul(emb.e_t, pv.rel_text); // 1 x d
    VarId patch_keys = tape.matmul(patches, pv.rel_vis);
    VarId keys = patch_keys;
    if (with_caption) keys = tape.concat_rows({patch_keys, tape.matmul(c0, pv.rel_cap)});
    VarId scores = tape.scale(tape.matmul(query, tape.transpose(keys)),
                              1.0 / std::sqrt(static_cast<double>(config.d)));
    VarId weights = tape.softmax_rows(scores); // 1 x R
    emb.e_i = tape.matmul(weights, values);    // 1 x d_v
    return emb;
}

BalanceFused balance_fuse(Tape& tape, const ParamVars& pv, const AlignedPair& pair, bool no_balancing) {
    if (tape.val(pair.e_t_prime).cols() != tape.val(pair.e_i_prime).cols())
        throw ShapeError("balance_fuse: projected dims disagree");
    BalanceFused out;
    if (no_balancing) {
        out.alpha_j = tape.leaf(Tensor(1, 1, 0.5));
    } else {
        VarId both = tape.concat_cols({pair.e_t_prime, pair.e_i_prime}); // 1 x 2d
        VarId z = tape.add(tape.matmul(both, pv.gate_u), pv.gate_b);
        out.alpha_j = tape.sigmoid(z);
    }
    VarId one_minus = tape.sub(tape.leaf(Tensor(1, 1, 1.0)), out.alpha_j);
    out.fused = tape.add(tape.mul_scalar(pair.e_t_prime, out.alpha_j),
                         tape.mul_scalar(pair.e_i_prime, one_minus));
    return out;
}

VarId sentiment_logits(Tape& tape, const ParamVars& pv, VarId fused) {
    return tape.add_row_broadcast(tape.matmul(fused, pv.sent_w), pv.sent_b);
}

} // namespace adaptisent
