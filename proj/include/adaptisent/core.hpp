#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adaptisent/tensor.hpp"

namespace adaptisent {

// Label order is fixed so argmax tie-breaking is deterministic:
// positive < negative < neutral.
enum class SentimentLabel : int { positive = 0, negative = 1, neutral = 2 };

const char* to_string(SentimentLabel s);
SentimentLabel sentiment_from_string(const std::string& s);

struct AspectSpan {
    int start = 0; // token index, inclusive
    int end = 0;   // token index, exclusive
    SentimentLabel sentiment = SentimentLabel::neutral;

    bool operator==(const AspectSpan&) const = default;
};

// One sample: pre-tokenized text with POS/dependency/NER tag ids, synthetic
// visual patch features, a caption token sequence, and gold aspect spans.
struct MultimodalInstance {
    std::string id;
    std::vector<int> tokens;
    std::vector<int> pos;
    std::vector<int> dep;
    std::vector<int> ner;
    Tensor patches; // K x d_v
    std::vector<int> caption;
    std::vector<AspectSpan> aspects;

    std::size_t length() const { return tokens.size(); }
    bool operator==(const MultimodalInstance&) const = default;
};

struct RunConfig {
    double gamma = 0.3;  // linguistic/visual importance trade-off
    double lambda = 0.1; // modality alignment strength

    int d = 32; // shared hidden dim
    int d_t = 16;
    int d_v = 12;
    int d_p = 6;
    int d_d = 6;
    int d_n = 6;
    int heads = 2;

    double lr = 1e-2;
    int batch_size = 16;
    int epochs = 20;
    std::uint64_t seed = 1;
    double tau_coherence = 0.5;

    // model vocabulary sizes (instances must fit them)
    int vocab_words = 120;
    int vocab_pos = 6;
    int vocab_dep = 8;
    int vocab_ner = 3;

    // ablation switches
    bool no_captions = false;
    bool no_alignment = false;
    bool no_balancing = false;
    bool no_augmentation = false;
    bool no_masking = false;

    double weight_decay = 0.01;
    double augment_rate = 0.3; // perturbation probability per non-aspect token

    // Straight-through gradient for the masking threshold. Off by default:
    // with a hard mask alpha_m receives no gradient and stays a constant.
    bool mask_ste = false;
    double ste_temp = 0.1;

    int mask_word_id() const { return vocab_words; } // reserved row in the word table

    void validate() const; // throws ConfigError
};

// Every trainable tensor of the model. Projections are stored as
// right-multipliers: a row vector x maps through W as x * W, so a table of
// shape in x out. Positional encodings are deterministic (see encoder) and
// the cls/sep/p_cls rows are positional-only, so neither appears here.
struct ModelParams {
    Tensor word_emb;    // (vocab_words + 1) x d_t, last row = MASK
    Tensor pos_emb;     // vocab_pos x d_p
    Tensor dep_emb;     // vocab_dep x d_d
    Tensor ner_emb;     // vocab_ner x d_n
    Tensor caption_emb; // vocab_words x d

    Tensor composite_proj; // (d_t + d_p + d_d) x d
    Tensor patch_proj;     // d_v x d_v
    Tensor vis_key_proj;   // d_v x d, patch rows -> shared space for attention keys/values
    Tensor cap_val_proj;   // d x d_v, caption rows -> visual value space for aspect pooling

    Tensor rel_text; // P_t: d x d
    Tensor rel_vis;  // P_v: d_v x d
    Tensor rel_cap;  // P_c: d x d

    Tensor imp_dep;  // W_d: d_d x 1
    Tensor imp_pos;  // W_p: d_p x 1
    Tensor imp_ner;  // W_n: d_n x 1
    Tensor imp_bias; // b: 1 x 1

    Tensor alpha_m; // 1 x 1 masking threshold scale
    Tensor beta;    // 1 x 1 attention bias scale

    Tensor text_q, text_k, text_v, text_o; // d x d
    Tensor vis_q, vis_k, vis_v, vis_o;     // d x d

    Tensor tag_w;  // d x 3
    Tensor tag_b;  // 1 x 3
    Tensor sent_w; // d x 3
    Tensor sent_b; // 1 x 3

    Tensor gate_u; // 2d x 1
    Tensor gate_b; // 1 x 1

    Tensor align_text_w; // W_T: d x d
    Tensor align_text_b; // b_T: 1 x d
    Tensor align_vis_w;  // W_I: d_v x d
    Tensor align_vis_b;  // b_I: 1 x d

    // Stable iteration order; also the checkpoint and optimizer order.
    std::vector<std::pair<std::string, Tensor*>> groups();
    std::vector<std::pair<std::string, const Tensor*>> groups() const;

    bool operator==(const ModelParams&) const = default;
};

// Deterministic RNG with explicit distributions. mt19937_64 output is fully
// specified by the standard; the std distributions are not, so we map the
// raw stream ourselves.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed == 0 ? 0x9e3779b97f4a7c15ULL : seed) {}

    std::uint64_t next_u64();
    double uniform(double lo, double hi);      // [lo, hi)
    std::uint64_t uniform_int(std::uint64_t n); // [0, n)
    double gaussian();                          // Box-Muller, fresh pair each call

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// FNV-1a, used to derive per-instance seeds from (base seed, instance id).
std::uint64_t stable_hash(const std::string& s);

// Embedding-style tensors drawn from seeded uniform(-0.1, 0.1); beta = 0 so
// initial biased attention equals standard attention; alpha_m = 0.5; the
// balancing gate is zeroed so every initial alpha_j is exactly 0.5.
ModelParams init_params(const RunConfig& config, std::uint64_t seed);

struct ValidationIssue {
    std::string field;
    std::string message;
};

// Structured violation report; empty means the instance is well-formed.
std::vector<ValidationIssue> validate_instance(const MultimodalInstance& inst, const RunConfig& config);

} // namespace adaptisent
