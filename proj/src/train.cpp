#include "adaptisent/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "adaptisent/augment.hpp"
#include "adaptisent/eval.hpp"
#include "adaptisent/finite_diff.hpp"

namespace adaptisent {

std::vector<double> token_weights(const std::vector<double>& s) {
    if (s.empty()) throw ShapeError("token_weights: empty scores");
    double sum = 0.0;
    for (double v : s) sum += v;
    if (sum <= 0.0) throw NumericError("token_weights: scores must be positive");
    std::vector<double> w(s.size());
    const double l = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = l * s[i] / sum;
    return w;
}

LossGraph total_loss(Tape& tape, const ParamVars& pv, const RunConfig& config,
                     const std::vector<MultimodalInstance>& batch,
                     std::vector<InstanceFreeze>* freeze) {
    if (batch.empty()) throw ShapeError("total_loss: empty batch");
    const bool use_freeze = freeze && !freeze->empty();
    if (use_freeze && freeze->size() != batch.size())
        throw ShapeError("total_loss: freeze size mismatch");

    std::vector<VarId> extraction_terms, sentiment_terms, distances;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const MultimodalInstance& inst = batch[b];
        const InstanceFreeze* f = use_freeze ? &(*freeze)[b] : nullptr;
        InstanceForward fwd = forward_instance(tape, pv, config, inst, f);

        std::vector<double> w = f ? f->token_weights : token_weights(fwd.importance.s);
        if (freeze && !use_freeze) freeze->push_back({fwd.masked_tokens, w});

        std::vector<int> targets;
        targets.reserve(inst.length());
        for (BioTag t : gold_bio(inst.length(), inst.aspects)) targets.push_back(static_cast<int>(t));
        extraction_terms.push_back(tape.weighted_ce_rows(fwd.tag_logits, std::move(targets), w));

        for (const AspectSpan& span : inst.aspects) {
            AspectForward af = add_aspect(tape, pv, config, fwd, span);
            sentiment_terms.push_back(tape.weighted_ce_rows(
                af.sent_logits, {static_cast<int>(span.sentiment)}, {1.0}));
            distances.push_back(af.pair.distance);
        }
    }

    auto sum_terms = [&tape](const std::vector<VarId>& terms) {
        if (terms.empty()) return tape.leaf(Tensor(1, 1, 0.0));
        VarId acc = terms[0];
        for (std::size_t i = 1; i < terms.size(); ++i) acc = tape.add(acc, terms[i]);
        return acc;
    };

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    VarId extraction = tape.scale(sum_terms(extraction_terms), inv_b);
    VarId sentiment = tape.scale(sum_terms(sentiment_terms), inv_b);
    VarId alignment = tape.scale(
        alignment_regularizer(tape, distances, config.lambda, config.no_alignment), inv_b);

    LossGraph lg;
    lg.total = tape.add(tape.add(extraction, sentiment), alignment);
    lg.values.extraction_ce = tape.val(extraction)[0];
    lg.values.sentiment_ce = tape.val(sentiment)[0];
    lg.values.alignment = tape.val(alignment)[0];
    lg.values.total = tape.val(lg.total)[0];
    return lg;
}

double loss_value(const ModelParams& params, const RunConfig& config,
                  const std::vector<MultimodalInstance>& batch,
                  std::vector<InstanceFreeze>* freeze) {
    Tape tape;
    ParamVars pv = stage_params(tape, params);
    return total_loss(tape, pv, config, batch, freeze).values.total;
}

AdamW::AdamW(double lr, double weight_decay, std::size_t warmup_steps, double beta1, double beta2,
             double eps)
    : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps),
      warmup_steps_(warmup_steps) {}

double AdamW::current_lr() const {
    if (warmup_steps_ == 0 || t_ >= warmup_steps_) return lr_;
    return lr_ * static_cast<double>(t_) / static_cast<double>(warmup_steps_);
}

void AdamW::step(ModelParams& params, const std::vector<Tensor>& grads) {
    auto groups = params.groups();
    if (grads.size() != groups.size()) throw ShapeError("AdamW::step: gradient count mismatch");
    if (m_.empty()) {
        m_.reserve(groups.size());
        v_.reserve(groups.size());
        for (auto& [name, t] : groups) {
            m_.emplace_back(t->rows(), t->cols());
            v_.emplace_back(t->rows(), t->cols());
        }
    }
    ++t_;
    const double lr_t = current_lr();
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        Tensor& p = *groups[g].second;
        const Tensor& grad = grads[g];
        if (!grad.same_shape(p)) throw ShapeError("AdamW::step: gradient shape mismatch");
        Tensor& m = m_[g];
        Tensor& v = v_[g];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= lr_t * (m_hat / (std::sqrt(v_hat) + eps_) + weight_decay_ * p[i]);
        }
    }
}

namespace {

std::string log_record(int epoch, std::size_t step, const LossBreakdown& loss,
                       std::optional<double> dev_f1) {
    nlohmann::ordered_json j;
    j["epoch"] = epoch;
    j["step"] = step;
    j["total"] = loss.total;
    j["extraction_ce"] = loss.extraction_ce;
    j["sentiment_ce"] = loss.sentiment_ce;
    j["alignment"] = loss.alignment;
    if (dev_f1) j["dev_f1"] = *dev_f1;
    return j.dump();
}

} // namespace

TrainResult train(const RunConfig& config, const std::vector<MultimodalInstance>& train_set,
                  const std::vector<MultimodalInstance>& dev_set, std::ostream* log_stream) {
    config.validate();
    if (train_set.empty()) throw ConfigError("train: empty training set");

    TrainResult result;
    ModelParams params = init_params(config, config.seed);

    // augmentation pool, filtered by coherence under the initial parameters
    std::vector<MultimodalInstance> pool = train_set;
    if (!config.no_augmentation) {
        PosPools pos_pools = PosPools::from_dataset(train_set, config.vocab_pos);
        std::vector<AugmentedCandidate> candidates;
        candidates.reserve(train_set.size());
        for (const MultimodalInstance& inst : train_set) {
            AugmentedCandidate c;
            c.instance = perturb_text(inst, pos_pools, config.seed ^ stable_hash(inst.id),
                                      config.augment_rate);
            c.instance.id += "-aug";
            c.coherence = candidate_coherence(params, config, c.instance);
            candidates.push_back(std::move(c));
        }
        std::vector<MultimodalInstance> kept =
            filter_augmented(candidates, config.tau_coherence, config.no_augmentation);
        result.augmented_added = kept.size();
        pool.insert(pool.end(), kept.begin(), kept.end());
    }

    const std::size_t steps_per_epoch =
        (pool.size() + static_cast<std::size_t>(config.batch_size) - 1) /
        static_cast<std::size_t>(config.batch_size);
    const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(config.epochs);
    const std::size_t warmup = std::max<std::size_t>(1, total_steps / 10);
    AdamW opt(config.lr, config.weight_decay, warmup);

    result.best_params = params;
    result.best_dev_f1 = -1.0;
    result.best_epoch = -1;

    auto emit = [&](const std::string& line) {
        result.log_lines.push_back(line);
        if (log_stream) (*log_stream) << line << '\n';
    };

    SeededRng shuffle_rng(config.seed ^ 0x5e11aULL);
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    Tape tape;
    std::size_t global_step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        LossBreakdown last_loss;
        for (std::size_t s = 0; s < steps_per_epoch; ++s) {
            std::vector<MultimodalInstance> batch;
            const std::size_t lo = s * static_cast<std::size_t>(config.batch_size);
            const std::size_t hi = std::min(pool.size(), lo + static_cast<std::size_t>(config.batch_size));
            batch.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i) batch.push_back(pool[order[i]]);

            tape.clear();
            ParamVars pv = stage_params(tape, params);
            LossGraph lg;
            try {
                lg = total_loss(tape, pv, config, batch);
            } catch (const NumericError& e) {
                throw NumericError("train: diverged at step " + std::to_string(global_step) + ": " +
                                   e.what());
            }
            if (!std::isfinite(lg.values.total))
                throw NumericError("train: non-finite loss at step " + std::to_string(global_step));
            tape.backward(lg.total);

            std::vector<Tensor> grads;
            auto pv_groups = pv.groups();
            grads.reserve(pv_groups.size());
            for (auto& [name, id] : pv_groups) grads.push_back(tape.grad(id));
            opt.step(params, grads);

            last_loss = lg.values;
            ++global_step;
            if (s + 1 < steps_per_epoch) emit(log_record(epoch, global_step, lg.values, std::nullopt));
        }
        const double dev_f1 = dev_set.empty() ? 0.0 : evaluate(params, config, dev_set).f1;
        emit(log_record(epoch, global_step, last_loss, dev_f1));
        if (dev_f1 > result.best_dev_f1) {
            result.best_dev_f1 = dev_f1;
            result.best_epoch = epoch;
            result.best_params = params;
        }
    }
    if (config.epochs == 0) {
        result.best_params = params;
        result.best_dev_f1 = dev_set.empty() ? 0.0 : evaluate(params, config, dev_set).f1;
        result.best_epoch = -1;
    }
    return result;
}

RunConfig grad_check_config() {
    RunConfig cfg;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.d_t = 6;
    cfg.d_v = 5;
    cfg.d_p = 3;
    cfg.d_d = 3;
    cfg.d_n = 3;
    cfg.vocab_words = 12;
    cfg.vocab_pos = 4;
    cfg.vocab_dep = 4;
    cfg.vocab_ner = 3;
    return cfg;
}

MultimodalInstance probe_instance(const RunConfig& config, int length, int patches,
                                  std::uint64_t seed) {
    if (length < 1 || patches < 1) throw ConfigError("probe_instance: length and patches must be >= 1");
    MultimodalInstance inst;
    inst.id = "probe-" + std::to_string(length) + "-" + std::to_string(patches) + "-" +
              std::to_string(seed);
    SeededRng rng(seed);
    for (int i = 0; i < length; ++i) {
        inst.tokens.push_back(static_cast<int>(rng.uniform_int(config.vocab_words)));
        inst.pos.push_back(static_cast<int>(rng.uniform_int(config.vocab_pos)));
        inst.dep.push_back(static_cast<int>(rng.uniform_int(config.vocab_dep)));
        inst.ner.push_back(static_cast<int>(rng.uniform_int(config.vocab_ner)));
    }
    inst.patches = Tensor(static_cast<std::size_t>(patches), static_cast<std::size_t>(config.d_v));
    for (std::size_t i = 0; i < inst.patches.size(); ++i) inst.patches[i] = rng.gaussian() * 0.5;
    const int cap_len = 1 + static_cast<int>(rng.uniform_int(2));
    for (int i = 0; i < cap_len; ++i)
        inst.caption.push_back(static_cast<int>(rng.uniform_int(config.vocab_words)));

    const int span_len = length >= 3 && rng.uniform(0.0, 1.0) < 0.5 ? 2 : 1;
    const int start =
        static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(length - span_len + 1)));
    inst.aspects.push_back({start, start + span_len, static_cast<SentimentLabel>(rng.uniform_int(3))});
    return inst;
}

GradCheckReport grad_check(const ModelParams& params, const RunConfig& config,
                           const std::vector<MultimodalInstance>& batch, double eps) {
    // analytic side, freezing masked ids and token weights at this point
    std::vector<InstanceFreeze> freeze;
    Tape tape;
    ParamVars pv = stage_params(tape, params);
    LossGraph lg = total_loss(tape, pv, config, batch, &freeze);
    tape.backward(lg.total);

    ModelParams probe = params; // FD perturbs a private copy
    auto probe_groups = probe.groups();
    auto pv_groups = pv.groups();

    GradCheckReport report;
    for (std::size_t g = 0; g < probe_groups.size(); ++g) {
        const Tensor analytic = tape.grad(pv_groups[g].second);
        Tensor& target = *probe_groups[g].second;
        const Tensor fd = finite_diff_grad(
            [&]() { return loss_value(probe, config, batch, &freeze); }, target, eps);
        GradCheckGroup group{probe_groups[g].first, max_relative_error(analytic, fd)};
        report.worst = std::max(report.worst, group.max_rel_err);
        report.groups.push_back(std::move(group));
    }
    return report;
}

} // namespace adaptisent
