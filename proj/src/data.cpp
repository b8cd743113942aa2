#include "adaptisent/data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace adaptisent {

namespace {

// Span-initial and span-continuation aspect words come from disjoint
// sub-pools (think given names vs surnames) so B/I is decidable per token;
// the trailing slice of each sub-pool, sized by aspect_train_frac, never
// appears in training.
constexpr int kAspectHeadBegin = 0, kAspectHeadEnd = 24;
constexpr int kAspectTailBegin = 24, kAspectTailEnd = 40;
constexpr int kDecoyBegin = 40, kDecoyEnd = 60;
constexpr int kCueBegin = 60; // ten per sentiment, label order
constexpr int kFillerBegin = 90;

constexpr int kPosNounHead = 1; // span-initial nouns and decoys
constexpr int kPosCue = 2;
constexpr int kPosNounTail = 3; // span-continuation nouns

constexpr int kNerEntity = 1;

int cue_word(SentimentLabel s, std::uint64_t pick, int cues_per_label) {
    return kCueBegin + static_cast<int>(s) * 10 +
           static_cast<int>(pick % static_cast<std::uint64_t>(cues_per_label));
}

// deterministic word -> POS so same-POS substitution pools stay closed
int pos_of_word(int word, int vocab_pos) {
    if (word < kAspectTailBegin) return kPosNounHead;
    if (word < kAspectTailEnd) return kPosNounTail;
    if (word < kDecoyEnd) return kPosNounHead;
    if (word < kFillerBegin) return kPosCue;
    const int filler_classes = vocab_pos - 4; // {0} plus {4 .. vocab_pos-1}
    const int c = word % filler_classes;
    return c == 0 ? 0 : 3 + c;
}

} // namespace

void SyntheticSpec::validate() const {
    if (n_instances < 1) throw ConfigError("spec: n_instances must be >= 1");
    if (vocab_words < 100) throw ConfigError("spec: vocab too small for same-POS pools (need >= 100)");
    if (vocab_pos < 5) throw ConfigError("spec: vocab_pos must be >= 5");
    if (vocab_dep < 1 || vocab_ner < 2) throw ConfigError("spec: vocab_dep >= 1 and vocab_ner >= 2 required");
    if (len_min < 4 || len_max < len_min) throw ConfigError("spec: need 4 <= len_min <= len_max");
    if (k_min < 1 || k_max < k_min) throw ConfigError("spec: need 1 <= k_min <= k_max");
    if (d_v < 3) throw ConfigError("spec: d_v must be >= 3 for the sentiment directions");
    if (rho < 0.0 || rho > 1.0) throw ConfigError("spec: rho must be in [0,1]");
    if (max_aspects < 1) throw ConfigError("spec: max_aspects must be >= 1");
    if (cues_per_label < 1 || cues_per_label > 10)
        throw ConfigError("spec: cues_per_label must be in [1,10]");
    if (aspect_train_frac <= 0.0 || aspect_train_frac > 1.0)
        throw ConfigError("spec: aspect_train_frac must be in (0,1]");
    if (distractor_prob < 0.0 || distractor_prob > 1.0)
        throw ConfigError("spec: distractor_prob must be in [0,1]");
    if (train_frac <= 0.0 || dev_frac < 0.0 || train_frac + dev_frac >= 1.0)
        throw ConfigError("spec: split fractions must satisfy 0 < train, 0 <= dev, train + dev < 1");
}

RunConfig SyntheticSpec::matching_config() const {
    RunConfig cfg;
    cfg.vocab_words = vocab_words;
    cfg.vocab_pos = vocab_pos;
    cfg.vocab_dep = vocab_dep;
    cfg.vocab_ner = vocab_ner;
    cfg.d_v = d_v;
    return cfg;
}

namespace {

// Visual-channel aspects within an instance share one sentiment (the image is
// shared), which clusters the label draws; cycling the shared label keeps the
// corpus-level class balance tight instead of leaving it to clustered chance.
struct VisualLabelDealer {
    long counter = 0;
    int offset = 0;
    SentimentLabel next() {
        return static_cast<SentimentLabel>((offset + counter++) % 3);
    }
};

MultimodalInstance make_instance(SeededRng& rng, const SyntheticSpec& spec, bool train_split,
                                 VisualLabelDealer& dealer) {
    const int L = spec.len_min + static_cast<int>(rng.uniform_int(
                                     static_cast<std::uint64_t>(spec.len_max - spec.len_min + 1)));

    MultimodalInstance inst;
    inst.tokens.resize(static_cast<std::size_t>(L));
    inst.pos.resize(static_cast<std::size_t>(L));
    inst.dep.resize(static_cast<std::size_t>(L));
    inst.ner.resize(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) {
        const int w = kFillerBegin + static_cast<int>(rng.uniform_int(
                                         static_cast<std::uint64_t>(spec.vocab_words - kFillerBegin)));
        inst.tokens[static_cast<std::size_t>(i)] = w;
        inst.pos[static_cast<std::size_t>(i)] = pos_of_word(w, spec.vocab_pos);
        inst.dep[static_cast<std::size_t>(i)] =
            static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.vocab_dep)));
        inst.ner[static_cast<std::size_t>(i)] = 0;
    }

    // sprinkle a decoy noun into roughly a third of instances
    if (rng.uniform(0.0, 1.0) < 0.35) {
        const int pos = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(L)));
        const int w = kDecoyBegin + static_cast<int>(rng.uniform_int(kDecoyEnd - kDecoyBegin));
        inst.tokens[static_cast<std::size_t>(pos)] = w;
        inst.pos[static_cast<std::size_t>(pos)] = kPosNounHead;
        inst.ner[static_cast<std::size_t>(pos)] = rng.uniform(0.0, 1.0) < 0.25 ? kNerEntity : 0;
    }

    const int want = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.max_aspects)));
    std::vector<bool> occupied(static_cast<std::size_t>(L), false);
    bool have_visual = false;
    auto visual_sentiment = SentimentLabel::neutral;

    auto train_slice = [&](int begin, int end) {
        const int n = end - begin;
        return begin + std::max(1, static_cast<int>(spec.aspect_train_frac * n));
    };
    const int head_end = train_split ? train_slice(kAspectHeadBegin, kAspectHeadEnd) : kAspectHeadEnd;
    const int tail_end = train_split ? train_slice(kAspectTailBegin, kAspectTailEnd) : kAspectTailEnd;
    for (int a = 0; a < want; ++a) {
        const int span_len = L >= 6 && rng.uniform(0.0, 1.0) < 0.3 ? 2 : 1;
        int start = -1;
        for (int attempt = 0; attempt < 30; ++attempt) {
            const int cand = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(L - span_len + 1)));
            bool free = true;
            for (int i = std::max(0, cand - 1); i < std::min(L, cand + span_len + 1); ++i)
                if (occupied[static_cast<std::size_t>(i)]) free = false;
            if (free) {
                start = cand;
                break;
            }
        }
        if (start < 0) break;
        const int end = start + span_len;
        for (int i = std::max(0, start - 1); i < std::min(L, end + 1); ++i)
            occupied[static_cast<std::size_t>(i)] = true;

        for (int i = start; i < end; ++i) {
            const int w =
                i == start
                    ? kAspectHeadBegin + static_cast<int>(rng.uniform_int(
                                             static_cast<std::uint64_t>(head_end - kAspectHeadBegin)))
                    : kAspectTailBegin + static_cast<int>(rng.uniform_int(
                                             static_cast<std::uint64_t>(tail_end - kAspectTailBegin)));
            inst.tokens[static_cast<std::size_t>(i)] = w;
            inst.pos[static_cast<std::size_t>(i)] = pos_of_word(w, spec.vocab_pos);
            inst.ner[static_cast<std::size_t>(i)] = kNerEntity;
        }

        SentimentLabel sentiment;
        const bool visual = rng.uniform(0.0, 1.0) < spec.rho;
        if (visual) {
            if (!have_visual) {
                visual_sentiment = dealer.next();
                have_visual = true;
            }
            sentiment = visual_sentiment;
            if (rng.uniform(0.0, 1.0) < spec.distractor_prob) {
                // misleading cue with a random label, one side
                const auto wrong = static_cast<SentimentLabel>(rng.uniform_int(3));
                const int side = rng.uniform(0.0, 1.0) < 0.5 ? start - 1 : end;
                if (side >= 0 && side < L) {
                    inst.tokens[static_cast<std::size_t>(side)] = cue_word(wrong, rng.next_u64(), spec.cues_per_label);
                    inst.pos[static_cast<std::size_t>(side)] = kPosCue;
                }
            }
        } else {
            sentiment = static_cast<SentimentLabel>(rng.uniform_int(3));
            for (const int side : {start - 1, end}) {
                if (side >= 0 && side < L) {
                    inst.tokens[static_cast<std::size_t>(side)] = cue_word(sentiment, rng.next_u64(), spec.cues_per_label);
                    inst.pos[static_cast<std::size_t>(side)] = kPosCue;
                }
            }
        }
        inst.aspects.push_back({start, end, sentiment});
    }
    std::sort(inst.aspects.begin(), inst.aspects.end(),
              [](const AspectSpan& x, const AspectSpan& y) { return x.start < y.start; });

    const int K = spec.k_min + static_cast<int>(rng.uniform_int(
                                   static_cast<std::uint64_t>(spec.k_max - spec.k_min + 1)));
    inst.patches = Tensor(static_cast<std::size_t>(K), static_cast<std::size_t>(spec.d_v));
    for (std::size_t i = 0; i < inst.patches.size(); ++i) inst.patches[i] = rng.gaussian();
    if (have_visual) {
        // unit shift along one of three orthogonal axes, one per sentiment
        const auto axis = static_cast<std::size_t>(visual_sentiment);
        for (std::size_t k = 0; k < inst.patches.rows(); ++k) inst.patches(k, axis) += 1.0;
    }

    // caption: the gold aspect words plus two fillers, sentiment-neutral
    for (const AspectSpan& a : inst.aspects)
        for (int i = a.start; i < a.end; ++i)
            inst.caption.push_back(inst.tokens[static_cast<std::size_t>(i)]);
    for (int c = 0; c < 2; ++c)
        inst.caption.push_back(kFillerBegin + static_cast<int>(rng.uniform_int(
                                                  static_cast<std::uint64_t>(spec.vocab_words - kFillerBegin))));
    return inst;
}

} // namespace

Datasets generate(const SyntheticSpec& spec) {
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n_instances);
    const auto n_train = static_cast<std::size_t>(spec.train_frac * static_cast<double>(n));
    const auto n_dev = static_cast<std::size_t>(spec.dev_frac * static_cast<double>(n));
    const std::size_t n_test = n - n_train - n_dev;

    const RunConfig check = spec.matching_config();
    SeededRng rng(spec.seed);
    VisualLabelDealer dealer;
    dealer.offset = static_cast<int>(rng.uniform_int(3));
    Datasets ds;
    auto fill = [&](std::vector<MultimodalInstance>& out, std::size_t count, const char* prefix,
                    bool train_split) {
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            MultimodalInstance inst = make_instance(rng, spec, train_split, dealer);
            char id[32];
            std::snprintf(id, sizeof id, "%s-%05zu", prefix, i);
            inst.id = id;
            const auto issues = validate_instance(inst, check);
            if (!issues.empty())
                throw NumericError("generate: produced invalid instance " + inst.id + ": " +
                                   issues.front().field + " " + issues.front().message);
            out.push_back(std::move(inst));
        }
    };
    fill(ds.train, n_train, "train", true);
    fill(ds.dev, n_dev, "dev", false);
    fill(ds.test, n_test, "test", false);
    return ds;
}

namespace {

nlohmann::ordered_json instance_to_json(const MultimodalInstance& inst) {
    nlohmann::ordered_json j;
    j["id"] = inst.id;
    j["tokens"] = inst.tokens;
    j["pos"] = inst.pos;
    j["dep"] = inst.dep;
    j["ner"] = inst.ner;
    nlohmann::ordered_json patches = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < inst.patches.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < inst.patches.cols(); ++c) row.push_back(inst.patches(r, c));
        patches.push_back(std::move(row));
    }
    j["patches"] = std::move(patches);
    j["caption_tokens"] = inst.caption;
    nlohmann::ordered_json aspects = nlohmann::ordered_json::array();
    for (const AspectSpan& a : inst.aspects) {
        nlohmann::ordered_json aj;
        aj["start"] = a.start;
        aj["end"] = a.end;
        aj["sentiment"] = to_string(a.sentiment);
        aspects.push_back(std::move(aj));
    }
    j["aspects"] = std::move(aspects);
    return j;
}

MultimodalInstance instance_from_json(const nlohmann::json& j, std::size_t line_no) {
    auto fail = [line_no](const std::string& what) -> IoError {
        return IoError("jsonl line " + std::to_string(line_no) + ": " + what);
    };
    for (const char* field : {"id", "tokens", "pos", "dep", "ner", "patches", "caption_tokens", "aspects"})
        if (!j.contains(field)) throw fail(std::string("missing field ") + field);

    MultimodalInstance inst;
    try {
        inst.id = j.at("id").get<std::string>();
        inst.tokens = j.at("tokens").get<std::vector<int>>();
        inst.pos = j.at("pos").get<std::vector<int>>();
        inst.dep = j.at("dep").get<std::vector<int>>();
        inst.ner = j.at("ner").get<std::vector<int>>();
        const auto& patches = j.at("patches");
        if (!patches.is_array() || patches.empty()) throw fail("patches must be a non-empty array");
        const std::size_t cols = patches[0].size();
        inst.patches = Tensor(patches.size(), cols);
        for (std::size_t r = 0; r < patches.size(); ++r) {
            if (patches[r].size() != cols) throw fail("ragged patch rows");
            for (std::size_t c = 0; c < cols; ++c)
                inst.patches(r, c) = patches[r][c].get<double>();
        }
        inst.caption = j.at("caption_tokens").get<std::vector<int>>();
        for (const auto& aj : j.at("aspects")) {
            AspectSpan a;
            a.start = aj.at("start").get<int>();
            a.end = aj.at("end").get<int>();
            a.sentiment = sentiment_from_string(aj.at("sentiment").get<std::string>());
            inst.aspects.push_back(a);
        }
    } catch (const nlohmann::json::exception& e) {
        throw fail(e.what());
    }
    return inst;
}

} // namespace

std::string dataset_to_jsonl(const std::vector<MultimodalInstance>& dataset) {
    std::ostringstream out;
    for (const MultimodalInstance& inst : dataset) out << instance_to_json(inst).dump() << '\n';
    return out.str();
}

std::vector<MultimodalInstance> dataset_from_jsonl(const std::string& text,
                                                   const RunConfig* validate_against) {
    std::vector<MultimodalInstance> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw IoError("jsonl line " + std::to_string(line_no) + ": malformed JSON");
        MultimodalInstance inst = instance_from_json(j, line_no);
        if (validate_against) {
            const auto issues = validate_instance(inst, *validate_against);
            if (!issues.empty())
                throw IoError("jsonl line " + std::to_string(line_no) + ": invalid instance: " +
                              issues.front().field + " " + issues.front().message);
        }
        out.push_back(std::move(inst));
    }
    return out;
}

void save_jsonl(const std::vector<MultimodalInstance>& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << dataset_to_jsonl(dataset);
    if (!out) throw IoError("failed writing: " + path);
}

std::vector<MultimodalInstance> load_jsonl(const std::string& path, const RunConfig* validate_against) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return dataset_from_jsonl(buf.str(), validate_against);
}

DatasetStats stats(const std::vector<MultimodalInstance>& dataset) {
    DatasetStats s;
    s.samples = dataset.size();
    double token_count = 0.0;
    for (const MultimodalInstance& inst : dataset) {
        token_count += static_cast<double>(inst.length());
        for (const AspectSpan& a : inst.aspects) {
            switch (a.sentiment) {
            case SentimentLabel::positive: ++s.positive; break;
            case SentimentLabel::negative: ++s.negative; break;
            case SentimentLabel::neutral: ++s.neutral; break;
            }
            ++s.total_aspects;
        }
    }
    if (s.samples > 0) {
        s.mean_aspects = static_cast<double>(s.total_aspects) / static_cast<double>(s.samples);
        s.mean_length = token_count / static_cast<double>(s.samples);
    }
    return s;
}

std::string stats_table(const DatasetStats& s, const std::string& name) {
    char buf[160];
    std::string out;
    out += "split      pos    neg    neu    total  aspects  length\n";
    std::snprintf(buf, sizeof buf, "%-9s %6ld %6ld %6ld %8ld %8.3f %7.2f\n", name.c_str(),
                  s.positive, s.negative, s.neutral, s.total_aspects, s.mean_aspects, s.mean_length);
    out += buf;
    return out;
}

std::string stats_json(const DatasetStats& s) {
    nlohmann::ordered_json j;
    j["samples"] = s.samples;
    j["positive"] = s.positive;
    j["negative"] = s.negative;
    j["neutral"] = s.neutral;
    j["total_aspects"] = s.total_aspects;
    j["mean_aspects"] = s.mean_aspects;
    j["mean_length"] = s.mean_length;
    return j.dump();
}

} // namespace adaptisent
