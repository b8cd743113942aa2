#include "adaptisent/core.hpp"

#include <algorithm>
#include <cmath>

namespace adaptisent {

const char* to_string(SentimentLabel s) {
    switch (s) {
    case SentimentLabel::positive: return "positive";
    case SentimentLabel::negative: return "negative";
    case SentimentLabel::neutral: return "neutral";
    }
    return "neutral";
}

SentimentLabel sentiment_from_string(const std::string& s) {
    if (s == "positive") return SentimentLabel::positive;
    if (s == "negative") return SentimentLabel::negative;
    if (s == "neutral") return SentimentLabel::neutral;
    throw IoError("unknown sentiment label: " + s);
}

void RunConfig::validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must be in [0,1]");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (d < 1 || d_t < 1 || d_v < 1 || d_p < 1 || d_d < 1 || d_n < 1)
        throw ConfigError("all dims must be >= 1");
    if (heads < 1) throw ConfigError("heads must be >= 1");
    if (d % heads != 0) throw ConfigError("d must be divisible by heads");
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (tau_coherence < -1.0 || tau_coherence > 1.0) throw ConfigError("tau_coherence must be in [-1,1]");
    if (vocab_words < 1 || vocab_pos < 1 || vocab_dep < 1 || vocab_ner < 1)
        throw ConfigError("vocab sizes must be >= 1");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
    if (augment_rate < 0.0 || augment_rate > 1.0) throw ConfigError("augment_rate must be in [0,1]");
    if (ste_temp <= 0.0) throw ConfigError("ste_temp must be positive");
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::groups() {
    return {
        {"word_emb", &word_emb},
        {"pos_emb", &pos_emb},
        {"dep_emb", &dep_emb},
        {"ner_emb", &ner_emb},
        {"caption_emb", &caption_emb},
        {"composite_proj", &composite_proj},
        {"patch_proj", &patch_proj},
        {"vis_key_proj", &vis_key_proj},
        {"cap_val_proj", &cap_val_proj},
        {"rel_text", &rel_text},
        {"rel_vis", &rel_vis},
        {"rel_cap", &rel_cap},
        {"imp_dep", &imp_dep},
        {"imp_pos", &imp_pos},
        {"imp_ner", &imp_ner},
        {"imp_bias", &imp_bias},
        {"alpha_m", &alpha_m},
        {"beta", &beta},
        {"text_q", &text_q},
        {"text_k", &text_k},
        {"text_v", &text_v},
        {"text_o", &text_o},
        {"vis_q", &vis_q},
        {"vis_k", &vis_k},
        {"vis_v", &vis_v},
        {"vis_o", &vis_o},
        {"tag_w", &tag_w},
        {"tag_b", &tag_b},
        {"sent_w", &sent_w},
        {"sent_b", &sent_b},
        {"gate_u", &gate_u},
        {"gate_b", &gate_b},
        {"align_text_w", &align_text_w},
        {"align_text_b", &align_text_b},
        {"align_vis_w", &align_vis_w},
        {"align_vis_b", &align_vis_b},
    };
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::groups() const {
    auto mutable_groups = const_cast<ModelParams*>(this)->groups();
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.reserve(mutable_groups.size());
    for (auto& [name, t] : mutable_groups) out.emplace_back(name, t);
    return out;
}

std::uint64_t SeededRng::next_u64() {
    // splitmix64 step keeps low-entropy seeds usable
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SeededRng::uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

std::uint64_t SeededRng::uniform_int(std::uint64_t n) {
    if (n == 0) throw NumericError("uniform_int: n must be positive");
    // rejection sampling avoids modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double SeededRng::gaussian() {
    double u1 = uniform(0.0, 1.0);
    while (u1 <= 1e-300) u1 = uniform(0.0, 1.0);
    const double u2 = uniform(0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t stable_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

Tensor uniform_tensor(SeededRng& rng, std::size_t rows, std::size_t cols) {
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.1, 0.1);
    return t;
}

// fan-balanced range for projections so signal magnitude survives the stack
Tensor fan_tensor(SeededRng& rng, std::size_t rows, std::size_t cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

} // namespace

ModelParams init_params(const RunConfig& config, std::uint64_t seed) {
    config.validate();
    SeededRng rng(seed);
    const auto d = static_cast<std::size_t>(config.d);
    const auto d_t = static_cast<std::size_t>(config.d_t);
    const auto d_v = static_cast<std::size_t>(config.d_v);
    const auto d_p = static_cast<std::size_t>(config.d_p);
    const auto d_d = static_cast<std::size_t>(config.d_d);
    const auto d_n = static_cast<std::size_t>(config.d_n);
    const auto vw = static_cast<std::size_t>(config.vocab_words);

    ModelParams p;
    p.word_emb = uniform_tensor(rng, vw + 1, d_t);
    p.pos_emb = uniform_tensor(rng, static_cast<std::size_t>(config.vocab_pos), d_p);
    p.dep_emb = uniform_tensor(rng, static_cast<std::size_t>(config.vocab_dep), d_d);
    p.ner_emb = uniform_tensor(rng, static_cast<std::size_t>(config.vocab_ner), d_n);
    p.caption_emb = uniform_tensor(rng, vw, d);
    p.composite_proj = fan_tensor(rng, d_t + d_p + d_d, d);
    p.patch_proj = fan_tensor(rng, d_v, d_v);
    p.vis_key_proj = fan_tensor(rng, d_v, d);
    p.cap_val_proj = fan_tensor(rng, d, d_v);
    p.rel_text = fan_tensor(rng, d, d);
    p.rel_vis = fan_tensor(rng, d_v, d);
    p.rel_cap = fan_tensor(rng, d, d);
    p.imp_dep = uniform_tensor(rng, d_d, 1);
    p.imp_pos = uniform_tensor(rng, d_p, 1);
    p.imp_ner = uniform_tensor(rng, d_n, 1);
    p.imp_bias = uniform_tensor(rng, 1, 1);
    p.alpha_m = Tensor(1, 1, 0.5);
    p.beta = Tensor(1, 1, 0.0); // initial biased attention == standard attention
    p.text_q = fan_tensor(rng, d, d);
    p.text_k = fan_tensor(rng, d, d);
    p.text_v = fan_tensor(rng, d, d);
    p.text_o = fan_tensor(rng, d, d);
    p.vis_q = fan_tensor(rng, d, d);
    p.vis_k = fan_tensor(rng, d, d);
    p.vis_v = fan_tensor(rng, d, d);
    p.vis_o = fan_tensor(rng, d, d);
    p.tag_w = fan_tensor(rng, d, 3);
    p.tag_b = uniform_tensor(rng, 1, 3);
    p.sent_w = fan_tensor(rng, d, 3);
    p.sent_b = uniform_tensor(rng, 1, 3);
    p.gate_u = Tensor(2 * d, 1, 0.0); // zero gate: every initial alpha_j is 0.5
    p.gate_b = Tensor(1, 1, 0.0);
    p.align_text_w = fan_tensor(rng, d, d);
    p.align_text_b = uniform_tensor(rng, 1, d);
    p.align_vis_w = fan_tensor(rng, d_v, d);
    p.align_vis_b = uniform_tensor(rng, 1, d);
    return p;
}

std::vector<ValidationIssue> validate_instance(const MultimodalInstance& inst, const RunConfig& config) {
    std::vector<ValidationIssue> issues;
    const std::size_t L = inst.tokens.size();

    if (L == 0) issues.push_back({"tokens", "instance has no tokens"});
    if (inst.pos.size() != L) issues.push_back({"pos", "tag length mismatch"});
    if (inst.dep.size() != L) issues.push_back({"dep", "tag length mismatch"});
    if (inst.ner.size() != L) issues.push_back({"ner", "tag length mismatch"});

    auto check_ids = [&](const std::vector<int>& ids, int bound, const char* field) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] < 0 || ids[i] >= bound) {
                issues.push_back({field, "id out of range at position " + std::to_string(i)});
                return;
            }
        }
    };
    check_ids(inst.tokens, config.vocab_words, "tokens");
    check_ids(inst.pos, config.vocab_pos, "pos");
    check_ids(inst.dep, config.vocab_dep, "dep");
    check_ids(inst.ner, config.vocab_ner, "ner");
    check_ids(inst.caption, config.vocab_words, "caption");

    if (inst.patches.rows() < 1) issues.push_back({"patches", "at least one patch required"});
    if (inst.patches.cols() != static_cast<std::size_t>(config.d_v))
        issues.push_back({"patches", "patch width " + std::to_string(inst.patches.cols()) +
                                         " != d_v " + std::to_string(config.d_v)});
    if (!inst.patches.all_finite()) issues.push_back({"patches", "non-finite patch values"});

    std::vector<AspectSpan> spans = inst.aspects;
    std::sort(spans.begin(), spans.end(),
              [](const AspectSpan& a, const AspectSpan& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const AspectSpan& s = spans[i];
        if (s.start < 0 || s.start >= s.end || s.end > static_cast<int>(L)) {
            issues.push_back({"aspects", "invalid span [" + std::to_string(s.start) + "," +
                                             std::to_string(s.end) + ")"});
            continue;
        }
        if (i > 0 && spans[i - 1].end > s.start) {
            issues.push_back({"aspects", "overlapping spans"});
        }
    }
    return issues;
}

} // namespace adaptisent
