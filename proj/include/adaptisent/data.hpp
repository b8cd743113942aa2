#pragma once

#include "adaptisent/core.hpp"

namespace adaptisent {

// Synthetic corpus with a planted, modality-controllable sentiment signal.
//
// Word-id layout (requires vocab_words >= 100):
//   [0, 24)   span-initial aspect nouns; [24, 40) span-continuation nouns
//             (disjoint so B/I is decidable per token); the last ids of each
//             sub-pool appear only in dev/test, never in training
//   [40, 60)  decoy nouns: tagged like aspects part of the time, never gold
//   [60, 90)  sentiment cue words, ten per label
//   [90, ..)  filler
//
// Per aspect, with probability rho the sentiment is planted in the patches
// (every patch shifted by a per-sentiment orthogonal unit direction; all
// visual aspects of one instance share that sentiment) and the adjacent text
// stays neutral apart from an optional misleading random cue. Otherwise the
// sentiment is planted as cue words adjacent to the span and the patches are
// pure noise.
struct SyntheticSpec {
    int n_instances = 1000;
    int vocab_words = 120;
    int vocab_pos = 6;
    int vocab_dep = 8;
    int vocab_ner = 3;
    int len_min = 7;
    int len_max = 11;
    int k_min = 6;
    int k_max = 8;
    int d_v = 12;
    double rho = 0.5; // probability a given aspect's signal is visual
    int max_aspects = 3;
    int cues_per_label = 5;        // distinct cue words per sentiment, <= 10
    double aspect_train_frac = 0.9; // share of each aspect sub-pool seen in training
    double distractor_prob = 0.15; // misleading cue beside visual-channel aspects
    std::uint64_t seed = 1;
    double train_frac = 0.7;
    double dev_frac = 0.15;

    void validate() const; // throws ConfigError

    // A RunConfig whose vocab/patch dims accept instances from this spec.
    RunConfig matching_config() const;
};

struct Datasets {
    std::vector<MultimodalInstance> train, dev, test;
};

Datasets generate(const SyntheticSpec& spec);

void save_jsonl(const std::vector<MultimodalInstance>& dataset, const std::string& path);

// Parses one instance per line; errors carry the offending line number. When
// a config is supplied every instance is also run through validate_instance
// and the first violation report is raised as an error.
std::vector<MultimodalInstance> load_jsonl(const std::string& path,
                                           const RunConfig* validate_against = nullptr);

std::string dataset_to_jsonl(const std::vector<MultimodalInstance>& dataset);
std::vector<MultimodalInstance> dataset_from_jsonl(const std::string& text,
                                                   const RunConfig* validate_against = nullptr);

struct DatasetStats {
    long positive = 0;
    long negative = 0;
    long neutral = 0;
    long total_aspects = 0;
    std::size_t samples = 0;
    double mean_aspects = 0.0;
    double mean_length = 0.0;
};

DatasetStats stats(const std::vector<MultimodalInstance>& dataset);
std::string stats_table(const DatasetStats& s, const std::string& name);
std::string stats_json(const DatasetStats& s);

} // namespace adaptisent
