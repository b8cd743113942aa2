#include "adaptisent/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace adaptisent {

EvalMetrics metrics_from_counts(long tp, long fp, long fn) {
    EvalMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

MatchCounts match_counts(const std::vector<AspectSpan>& predicted,
                         const std::vector<AspectSpan>& gold_spans) {
    MatchCounts c;
    std::multiset<std::tuple<int, int, int>> gold;
    for (const AspectSpan& a : gold_spans)
        gold.insert({a.start, a.end, static_cast<int>(a.sentiment)});
    for (const AspectSpan& p : predicted) {
        auto it = gold.find({p.start, p.end, static_cast<int>(p.sentiment)});
        if (it != gold.end()) {
            ++c.tp;
            gold.erase(it); // each gold aspect matches at most once
        } else {
            ++c.fp;
        }
    }
    c.fn = static_cast<long>(gold.size());
    return c;
}

EvalMetrics evaluate(const ModelParams& params, const RunConfig& config,
                     const std::vector<MultimodalInstance>& dataset) {
    if (dataset.empty()) throw ConfigError("evaluate: empty dataset");
    long tp = 0, fp = 0, fn = 0;
    for (const MultimodalInstance& inst : dataset) {
        const MatchCounts c = match_counts(predict_instance(params, config, inst), inst.aspects);
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
    }
    return metrics_from_counts(tp, fp, fn);
}

double mean_alpha_v(const ModelParams& params, const RunConfig& config,
                    const std::vector<MultimodalInstance>& dataset) {
    if (dataset.empty()) throw ConfigError("mean_alpha_v: empty dataset");
    double total = 0.0;
    for (const MultimodalInstance& inst : dataset) {
        Tape tape;
        ParamVars pv = stage_params(tape, params);
        InstanceForward fwd = forward_instance(tape, pv, config, inst);
        total += fwd.attention.alpha_v;
    }
    return total / static_cast<double>(dataset.size());
}

double gold_span_sentiment_accuracy(const ModelParams& params, const RunConfig& config,
                                    const std::vector<MultimodalInstance>& dataset,
                                    bool zero_patches) {
    long correct = 0, total = 0;
    for (const MultimodalInstance& original : dataset) {
        MultimodalInstance inst = original;
        if (zero_patches) inst.patches = Tensor(inst.patches.rows(), inst.patches.cols());
        Tape tape;
        ParamVars pv = stage_params(tape, params);
        InstanceForward fwd = forward_instance(tape, pv, config, inst);
        for (const AspectSpan& gold : inst.aspects) {
            AspectForward af = add_aspect(tape, pv, config, fwd, gold);
            const Tensor& logits = tape.val(af.sent_logits);
            std::size_t best = 0;
            for (std::size_t j = 1; j < 3; ++j)
                if (logits(0, j) > logits(0, best)) best = j;
            if (static_cast<SentimentLabel>(best) == gold.sentiment) ++correct;
            ++total;
        }
    }
    if (total == 0) throw ConfigError("gold_span_sentiment_accuracy: no aspects");
    return static_cast<double>(correct) / static_cast<double>(total);
}

SeedStat seed_stat(const std::vector<double>& values) {
    SeedStat st;
    st.values = values;
    if (values.empty()) return st;
    for (double v : values) st.mean += v;
    st.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - st.mean) * (v - st.mean);
    st.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return st;
}

const std::vector<std::string>& ablation_variants() {
    static const std::vector<std::string> names = {
        "full", "no_captions", "no_alignment", "no_balancing", "no_augmentation", "no_masking"};
    return names;
}

namespace {

RunConfig with_variant(RunConfig cfg, const std::string& variant) {
    if (variant == "no_captions") cfg.no_captions = true;
    else if (variant == "no_alignment") cfg.no_alignment = true;
    else if (variant == "no_balancing") cfg.no_balancing = true;
    else if (variant == "no_augmentation") cfg.no_augmentation = true;
    else if (variant == "no_masking") cfg.no_masking = true;
    else if (variant != "full") throw ConfigError("unknown ablation variant: " + variant);
    return cfg;
}

std::string format_number(double v) {
    std::ostringstream oss;
    oss.precision(6);
    oss << std::fixed << v;
    return oss.str();
}

} // namespace

std::vector<AblationRow> ablate(const RunConfig& base, const std::vector<MultimodalInstance>& train_set,
                                const std::vector<MultimodalInstance>& dev_set,
                                const std::vector<MultimodalInstance>& test_set,
                                const std::vector<std::uint64_t>& seeds,
                                const std::vector<std::string>& variants) {
    if (seeds.empty()) throw ConfigError("ablate: at least one seed required");
    std::vector<AblationRow> rows;
    for (const std::string& variant : variants) {
        RunConfig cfg = with_variant(base, variant);
        std::vector<double> ps, rs, f1s;
        for (std::uint64_t seed : seeds) {
            cfg.seed = seed;
            TrainResult tr = train(cfg, train_set, dev_set);
            EvalMetrics m = evaluate(tr.best_params, cfg, test_set);
            ps.push_back(m.precision);
            rs.push_back(m.recall);
            f1s.push_back(m.f1);
        }
        rows.push_back({variant, seed_stat(ps), seed_stat(rs), seed_stat(f1s)});
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream oss;
    oss << "variant,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std\n";
    for (const AblationRow& r : rows) {
        oss << r.variant << ',' << format_number(r.precision.mean) << ','
            << format_number(r.precision.stddev) << ',' << format_number(r.recall.mean) << ','
            << format_number(r.recall.stddev) << ',' << format_number(r.f1.mean) << ','
            << format_number(r.f1.stddev) << '\n';
    }
    return oss.str();
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::string& param,
                            std::vector<double> grid, const std::vector<MultimodalInstance>& train_set,
                            const std::vector<MultimodalInstance>& dev_set,
                            const std::vector<MultimodalInstance>& test_set,
                            const std::vector<std::uint64_t>& seeds) {
    if (param != "gamma" && param != "lambda")
        throw ConfigError("sweep: param must be gamma or lambda");
    if (grid.empty()) throw ConfigError("sweep: empty grid");
    if (seeds.empty()) throw ConfigError("sweep: at least one seed required");
    std::sort(grid.begin(), grid.end());

    std::vector<SweepRow> rows;
    for (double value : grid) {
        RunConfig cfg = base;
        if (param == "gamma") cfg.gamma = value;
        else cfg.lambda = value;
        cfg.validate();
        std::vector<double> f1s;
        for (std::uint64_t seed : seeds) {
            cfg.seed = seed;
            TrainResult tr = train(cfg, train_set, dev_set);
            f1s.push_back(evaluate(tr.best_params, cfg, test_set).f1);
        }
        rows.push_back({value, seed_stat(f1s)});
    }
    return rows;
}

std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows) {
    std::ostringstream oss;
    oss << param << ",f1_mean,f1_std\n";
    for (const SweepRow& r : rows)
        oss << r.value << ',' << format_number(r.f1.mean) << ',' << format_number(r.f1.stddev) << '\n';
    return oss.str();
}

} // namespace adaptisent
