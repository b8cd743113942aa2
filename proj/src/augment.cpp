#include "adaptisent/augment.hpp"

#include <algorithm>

#include "adaptisent/model.hpp"

namespace adaptisent {

PosPools PosPools::from_dataset(const std::vector<MultimodalInstance>& data, int vocab_pos) {
    PosPools pp;
    pp.pools.resize(static_cast<std::size_t>(vocab_pos));
    std::vector<std::vector<bool>> seen(static_cast<std::size_t>(vocab_pos));
    for (const MultimodalInstance& inst : data) {
        for (std::size_t i = 0; i < inst.tokens.size(); ++i) {
            const auto p = static_cast<std::size_t>(inst.pos[i]);
            const auto w = static_cast<std::size_t>(inst.tokens[i]);
            if (p >= pp.pools.size()) continue;
            if (seen[p].size() <= w) seen[p].resize(w + 1, false);
            if (!seen[p][w]) {
                seen[p][w] = true;
                pp.pools[p].push_back(inst.tokens[i]);
            }
        }
    }
    for (auto& pool : pp.pools) std::sort(pool.begin(), pool.end());
    return pp;
}

MultimodalInstance perturb_text(const MultimodalInstance& inst, const PosPools& pools,
                                std::uint64_t seed, double rate) {
    if (rate < 0.0 || rate > 1.0) throw ConfigError("perturb_text: rate must be in [0,1]");
    std::vector<bool> in_aspect(inst.tokens.size(), false);
    for (const AspectSpan& a : inst.aspects)
        for (int i = a.start; i < a.end; ++i) in_aspect[static_cast<std::size_t>(i)] = true;

    MultimodalInstance out = inst;
    SeededRng rng(seed);
    for (std::size_t i = 0; i < out.tokens.size(); ++i) {
        if (in_aspect[i]) continue;
        // draw both decisions unconditionally so the stream is rate-independent
        const double roll = rng.uniform(0.0, 1.0);
        const auto p = static_cast<std::size_t>(out.pos[i]);
        const auto& pool = pools.pools.at(p);
        if (pool.empty()) throw ConfigError("perturb_text: vocab too small for same-POS pools");
        const auto pick = static_cast<std::size_t>(rng.uniform_int(pool.size()));
        if (roll < rate) out.tokens[i] = pool[pick];
    }
    return out;
}

std::vector<MultimodalInstance> filter_augmented(std::vector<AugmentedCandidate>& candidates,
                                                 double tau, bool no_augmentation) {
    if (tau < -1.0 || tau > 1.0) throw ConfigError("filter_augmented: tau must be in [-1,1]");
    std::vector<MultimodalInstance> kept;
    for (AugmentedCandidate& c : candidates) {
        c.kept = !no_augmentation && c.coherence >= tau;
        if (c.kept) kept.push_back(c.instance);
    }
    return kept;
}

double candidate_coherence(const ModelParams& params, const RunConfig& config,
                           const MultimodalInstance& inst) {
    Tape tape;
    ParamVars pv = stage_params(tape, params);
    InstanceForward fwd = forward_instance(tape, pv, config, inst);

    VarId text_mean = tape.mean_rows(fwd.text_states);
    VarId e_t_prime = tape.add(tape.matmul(text_mean, pv.align_text_w), pv.align_text_b);

    VarId patches = tape.slice_rows(fwd.v_i, 1, tape.val(fwd.v_i).rows());
    VarId patch_mean = tape.mean_rows(patches);
    VarId e_i = tape.add(tape.matmul(patch_mean, pv.align_vis_w), pv.align_vis_b);

    return coherence(tape.val(e_t_prime), tape.val(e_i));
}

} // namespace adaptisent
