#pragma once

#include "adaptisent/train.hpp"

namespace adaptisent {

struct EvalMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

// Micro precision/recall/F1 under the exact matching rule: a prediction
// counts only if span boundaries and sentiment both match a gold aspect;
// each gold aspect matches at most once. Empty-denominator conventions:
// precision and recall fall back to 0, and f1 = 0 when P + R = 0.
EvalMetrics evaluate(const ModelParams& params, const RunConfig& config,
                     const std::vector<MultimodalInstance>& dataset);

EvalMetrics metrics_from_counts(long tp, long fp, long fn);

struct MatchCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

// The per-instance matching rule on its own: exact (start, end, sentiment)
// agreement, every gold aspect consumable once.
MatchCounts match_counts(const std::vector<AspectSpan>& predicted,
                         const std::vector<AspectSpan>& gold);

// Mean modality coefficient alpha_v over a dataset (one forward each).
double mean_alpha_v(const ModelParams& params, const RunConfig& config,
                    const std::vector<MultimodalInstance>& dataset);

// Sentiment accuracy classifying gold spans directly; zero_patches swaps the
// patch features for zeros to probe where the sentiment signal lives.
double gold_span_sentiment_accuracy(const ModelParams& params, const RunConfig& config,
                                    const std::vector<MultimodalInstance>& dataset,
                                    bool zero_patches = false);

struct SeedStat {
    double mean = 0.0;
    double stddev = 0.0; // population convention over seeds
    std::vector<double> values;
};

SeedStat seed_stat(const std::vector<double>& values);

struct AblationRow {
    std::string variant;
    SeedStat precision, recall, f1;
};

// All six ablation variants in table order.
const std::vector<std::string>& ablation_variants();

// Each requested variant trained per seed and scored on the test split.
// Defaults to the full six-row table: full plus the five switches.
std::vector<AblationRow> ablate(const RunConfig& base, const std::vector<MultimodalInstance>& train_set,
                                const std::vector<MultimodalInstance>& dev_set,
                                const std::vector<MultimodalInstance>& test_set,
                                const std::vector<std::uint64_t>& seeds,
                                const std::vector<std::string>& variants = ablation_variants());

std::string ablation_csv(const std::vector<AblationRow>& rows);

struct SweepRow {
    double value = 0.0;
    SeedStat f1;
};

// Retrains per grid value of gamma or lambda over the given seeds.
std::vector<SweepRow> sweep(const RunConfig& base, const std::string& param,
                            std::vector<double> grid, const std::vector<MultimodalInstance>& train_set,
                            const std::vector<MultimodalInstance>& dev_set,
                            const std::vector<MultimodalInstance>& test_set,
                            const std::vector<std::uint64_t>& seeds);

std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows);

} // namespace adaptisent
