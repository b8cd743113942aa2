#pragma once

#include <iosfwd>
#include <optional>

#include "adaptisent/model.hpp"

namespace adaptisent {

// w_i = L * S_i / sum(S); mean weight is exactly 1. The weights are data in
// the loss: no gradient flows through them (see InstanceFreeze).
std::vector<double> token_weights(const std::vector<double>& s);

struct LossBreakdown {
    double extraction_ce = 0.0;
    double sentiment_ce = 0.0;
    double alignment = 0.0;
    double total = 0.0;
};

struct LossGraph {
    LossBreakdown values;
    VarId total;
};

// Joint objective over a batch, averaged per instance: token-weighted
// extraction cross-entropy over content tokens, per-aspect sentiment
// cross-entropy on gold spans (teacher forcing), and the lambda-weighted
// alignment distances. If freeze is non-null and empty it is populated with
// the masked ids and token weights actually used; if non-empty those are
// reused instead of being recomputed.
LossGraph total_loss(Tape& tape, const ParamVars& pv, const RunConfig& config,
                     const std::vector<MultimodalInstance>& batch,
                     std::vector<InstanceFreeze>* freeze = nullptr);

// Forward-only loss evaluation on a fresh tape; the finite-difference probe.
double loss_value(const ModelParams& params, const RunConfig& config,
                  const std::vector<MultimodalInstance>& batch,
                  std::vector<InstanceFreeze>* freeze = nullptr);

// Decoupled-weight-decay adaptive-moment optimizer with linear warmup.
class AdamW {
public:
    AdamW(double lr, double weight_decay, std::size_t warmup_steps,
          double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(ModelParams& params, const std::vector<Tensor>& grads);
    double current_lr() const;
    std::size_t steps_taken() const { return t_; }

private:
    double lr_, weight_decay_, beta1_, beta2_, eps_;
    std::size_t warmup_steps_;
    std::size_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

struct TrainResult {
    ModelParams best_params;
    double best_dev_f1 = 0.0;
    int best_epoch = -1;
    std::vector<std::string> log_lines; // one JSON record per line
    std::size_t augmented_added = 0;
};

// Mini-batch training with per-epoch dev evaluation; returns the best-dev
// checkpoint (ties broken toward the earlier epoch). Fully deterministic for
// a fixed config: single-threaded, seeded shuffles, seeded augmentation.
TrainResult train(const RunConfig& config, const std::vector<MultimodalInstance>& train_set,
                  const std::vector<MultimodalInstance>& dev_set, std::ostream* log_stream = nullptr);

struct GradCheckGroup {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckGroup> groups;
    double worst = 0.0;
    bool passed(double tol) const { return worst < tol; }
};

// Analytic gradients of the joint loss against central finite differences,
// per parameter group, with masked ids and token weights frozen at the
// evaluation point on both sides. The default step balances central-difference
// truncation (~eps^2) against double-precision roundoff (~|loss|*1e-16/eps)
// at the O(1) loss scale of small batches; 1e-5 would leave roundoff above
// the 1e-4 gate on near-zero gradient entries.
GradCheckReport grad_check(const ModelParams& params, const RunConfig& config,
                           const std::vector<MultimodalInstance>& batch, double eps = 1e-3);

// Small dims so finite differences over every parameter stay cheap.
RunConfig grad_check_config();

// Deterministic instance with the requested token and patch counts, valid
// under the given config; used to build gradient-check batches.
MultimodalInstance probe_instance(const RunConfig& config, int length, int patches,
                                  std::uint64_t seed);

} // namespace adaptisent
