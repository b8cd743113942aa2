#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "adaptisent/tensor.hpp"

namespace adaptisent {

struct VarId {
    std::uint32_t idx = UINT32_MAX;
    bool valid() const { return idx != UINT32_MAX; }
    bool operator==(const VarId&) const = default;
};

// Eager reverse-mode differentiation record. Every op computes its value
// immediately (so the graph builder can branch on intermediate values, e.g.
// the masking decision) and pushes a closure that scatters the node's
// gradient into its parents. backward() walks the nodes in reverse creation
// order, which is a valid topological order by construction.
//
// Gradients are allocated lazily: a node whose gradient buffer was never
// touched is skipped during the sweep, so value-only side branches cost
// nothing at backward time. Every op validates shapes and rejects non-finite
// outputs instead of letting NaNs travel.
class Tape {
public:
    VarId leaf(Tensor value);

    const Tensor& val(VarId id) const { return nodes_[id.idx].value; }

    // Gradient of the last backward() root w.r.t. this node; zeros if no
    // gradient reached it.
    Tensor grad(VarId id) const;
    bool grad_touched(VarId id) const { return !nodes_[id.idx].grad.empty(); }

    // Elementwise / scalar ops ---------------------------------------------
    VarId add(VarId a, VarId b);
    VarId sub(VarId a, VarId b);
    VarId mul(VarId a, VarId b);
    VarId div(VarId a, VarId b);
    VarId scale(VarId a, double c);
    VarId sigmoid(VarId a);
    VarId sqrt_guarded(VarId a); // sqrt(x + 1e-12); requires x >= 0

    // Linear algebra ---------------------------------------------------------
    VarId matmul(VarId a, VarId b);
    VarId transpose(VarId a);

    // Structure --------------------------------------------------------------
    VarId gather_rows(VarId table, std::vector<int> indices);
    VarId concat_rows(const std::vector<VarId>& parts);
    VarId concat_cols(const std::vector<VarId>& parts);
    VarId slice_rows(VarId a, std::size_t r0, std::size_t r1);
    VarId slice_cols(VarId a, std::size_t c0, std::size_t c1);

    // Reductions / broadcasts --------------------------------------------------
    VarId mean_rows(VarId a);                    // m x n -> 1 x n
    VarId mean_cols(VarId a);                    // m x n -> m x 1
    VarId sum_all(VarId a);                      // m x n -> 1 x 1
    VarId add_row_broadcast(VarId m, VarId row); // row added to every row of m
    VarId mul_scalar(VarId a, VarId s);          // s is 1 x 1
    VarId mul_col_broadcast(VarId m, VarId col); // col scales every row of m

    // Softmax over each row, max-subtracted.
    VarId softmax_rows(VarId a);

    // sum_i weights[i] * ( logsumexp(logits_i) - logits_i[targets[i]] ).
    // The log-sum-exp form never evaluates log of a zero probability.
    VarId weighted_ce_rows(VarId logits, std::vector<int> targets, std::vector<double> weights);

    // Hard threshold gate with a straight-through surrogate gradient:
    // forward is exactly 1[s > theta]; backward routes a sigmoid'((s-theta)/temp)
    // slope into s and theta. Used only when the masking STE switch is on; the
    // surrogate is intentionally not finite-difference-consistent.
    VarId ste_gate(VarId s_col, VarId theta, double temp);

    void backward(VarId scalar_root);

    void clear() { nodes_.clear(); }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad; // empty until a gradient is accumulated
        std::function<void(Tape&)> back;
    };
    std::vector<Node> nodes_;

    VarId push(Tensor value, std::function<void(Tape&)> back, const char* op);
    Tensor& grad_buf(VarId id);
    void check(VarId id) const;
};

} // namespace adaptisent
