#include "adaptisent/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace adaptisent {

void Tape::check(VarId id) const {
    if (!id.valid() || id.idx >= nodes_.size()) throw ShapeError("tape: invalid VarId");
}

VarId Tape::push(Tensor value, std::function<void(Tape&)> back, const char* op) {
    require_finite(value, op);
    nodes_.push_back(Node{std::move(value), Tensor{}, std::move(back)});
    return VarId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_buf(VarId id) {
    Node& n = nodes_[id.idx];
    if (n.grad.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
    return n.grad;
}

Tensor Tape::grad(VarId id) const {
    check(id);
    const Node& n = nodes_[id.idx];
    if (n.grad.empty()) return Tensor(n.value.rows(), n.value.cols());
    return n.grad;
}

VarId Tape::leaf(Tensor value) {
    return push(std::move(value), nullptr, "leaf");
}

VarId Tape::add(VarId a, VarId b) {
    check(a);
    check(b);
    Tensor out = adaptisent::add(val(a), val(b));
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, b, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(a);
                    Tensor& gb = t.grad_buf(b);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += g[i];
                        gb[i] += g[i];
                    }
                },
                "add");
}

VarId Tape::sub(VarId a, VarId b) {
    check(a);
    check(b);
    Tensor out = adaptisent::sub(val(a), val(b));
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, b, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(a);
                    Tensor& gb = t.grad_buf(b);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += g[i];
                        gb[i] -= g[i];
                    }
                },
                "sub");
}

VarId Tape::mul(VarId a, VarId b) {
    check(a);
    check(b);
    Tensor out = hadamard(val(a), val(b));
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, b, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& va = t.val(a);
                    const Tensor& vb = t.val(b);
                    Tensor& ga = t.grad_buf(a);
                    Tensor& gb = t.grad_buf(b);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += g[i] * vb[i];
                        gb[i] += g[i] * va[i];
                    }
                },
                "mul");
}

VarId Tape::div(VarId a, VarId b) {
    check(a);
    check(b);
    if (!val(a).same_shape(val(b))) throw ShapeError("div: shape mismatch");
    Tensor out = val(a);
    const Tensor& vb = val(b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= vb[i];
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, b, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& o = t.nodes_[self].value;
                    const Tensor& denom = t.val(b);
                    Tensor& ga = t.grad_buf(a);
                    Tensor& gb = t.grad_buf(b);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += g[i] / denom[i];
                        gb[i] -= g[i] * o[i] / denom[i];
                    }
                },
                "div");
}

VarId Tape::scale(VarId a, double c) {
    check(a);
    Tensor out = adaptisent::scale(val(a), c);
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, c, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
                },
                "scale");
}

VarId Tape::sigmoid(VarId a) {
    check(a);
    Tensor out = adaptisent::sigmoid(val(a));
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& s = t.nodes_[self].value;
                    Tensor& ga = t.grad_buf(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s[i] * (1.0 - s[i]);
                },
                "sigmoid");
}

VarId Tape::sqrt_guarded(VarId a) {
    check(a);
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] < -1e-9) throw NumericError("sqrt_guarded: negative input");
        out[i] = std::sqrt(std::max(out[i], 0.0) + 1e-12);
    }
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& o = t.nodes_[self].value;
                    Tensor& ga = t.grad_buf(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * 0.5 / o[i];
                },
                "sqrt_guarded");
}

VarId Tape::matmul(VarId a, VarId b) {
    check(a);
    check(b);
    Tensor out = adaptisent::matmul(val(a), val(b));
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, b, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& va = t.val(a);
                    const Tensor& vb = t.val(b);
                    // dA = g * B^T ; dB = A^T * g
                    Tensor& ga = t.grad_buf(a);
                    const std::size_t m = va.rows(), k = va.cols(), n = vb.cols();
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t p = 0; p < k; ++p) {
                            double acc = 0.0;
                            for (std::size_t j = 0; j < n; ++j) acc += g(i, j) * vb(p, j);
                            ga(i, p) += acc;
                        }
                    Tensor& gb = t.grad_buf(b);
                    for (std::size_t p = 0; p < k; ++p)
                        for (std::size_t j = 0; j < n; ++j) {
                            double acc = 0.0;
                            for (std::size_t i = 0; i < m; ++i) acc += va(i, p) * g(i, j);
                            gb(p, j) += acc;
                        }
                },
                "matmul");
}

VarId Tape::transpose(VarId a) {
    check(a);
    Tensor out = adaptisent::transpose(val(a));
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(a);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
                },
                "transpose");
}

VarId Tape::gather_rows(VarId table, std::vector<int> indices) {
    check(table);
    const Tensor& tab = val(table);
    Tensor out(indices.size(), tab.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const int r = indices[i];
        if (r < 0 || static_cast<std::size_t>(r) >= tab.rows())
            throw ShapeError("gather_rows: index " + std::to_string(r) + " out of range");
        for (std::size_t j = 0; j < tab.cols(); ++j) out(i, j) = tab(r, j);
    }
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [table, idx = std::move(indices), self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& gt = t.grad_buf(table);
                    for (std::size_t i = 0; i < idx.size(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j)
                            gt(static_cast<std::size_t>(idx[i]), j) += g(i, j);
                },
                "gather_rows");
}

VarId Tape::concat_rows(const std::vector<VarId>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no parts");
    std::size_t rows = 0;
    const std::size_t cols = val(parts[0]).cols();
    for (VarId p : parts) {
        check(p);
        if (val(p).cols() != cols) throw ShapeError("concat_rows: column mismatch");
        rows += val(p).rows();
    }
    Tensor out(rows, cols);
    std::size_t r = 0;
    for (VarId p : parts) {
        const Tensor& v = val(p);
        for (std::size_t i = 0; i < v.rows(); ++i, ++r)
            for (std::size_t j = 0; j < cols; ++j) out(r, j) = v(i, j);
    }
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [ps = parts, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    std::size_t r = 0;
                    for (VarId p : ps) {
                        Tensor& gp = t.grad_buf(p);
                        for (std::size_t i = 0; i < gp.rows(); ++i, ++r)
                            for (std::size_t j = 0; j < g.cols(); ++j) gp(i, j) += g(r, j);
                    }
                },
                "concat_rows");
}

VarId Tape::concat_cols(const std::vector<VarId>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no parts");
    std::size_t cols = 0;
    const std::size_t rows = val(parts[0]).rows();
    for (VarId p : parts) {
        check(p);
        if (val(p).rows() != rows) throw ShapeError("concat_cols: row mismatch");
        cols += val(p).cols();
    }
    Tensor out(rows, cols);
    std::size_t c = 0;
    for (VarId p : parts) {
        const Tensor& v = val(p);
        for (std::size_t j = 0; j < v.cols(); ++j, ++c)
            for (std::size_t i = 0; i < rows; ++i) out(i, c) = v(i, j);
    }
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [ps = parts, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    std::size_t c = 0;
                    for (VarId p : ps) {
                        Tensor& gp = t.grad_buf(p);
                        for (std::size_t j = 0; j < gp.cols(); ++j, ++c)
                            for (std::size_t i = 0; i < g.rows(); ++i) gp(i, j) += g(i, c);
                    }
                },
                "concat_cols");
}

VarId Tape::slice_rows(VarId a, std::size_t r0, std::size_t r1) {
    check(a);
    const Tensor& v = val(a);
    if (r0 > r1 || r1 > v.rows()) throw ShapeError("slice_rows: range out of bounds");
    Tensor out(r1 - r0, v.cols());
    for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = 0; j < v.cols(); ++j) out(i - r0, j) = v(i, j);
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, r0, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(a);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) ga(r0 + i, j) += g(i, j);
                },
                "slice_rows");
}

VarId Tape::slice_cols(VarId a, std::size_t c0, std::size_t c1) {
    check(a);
    const Tensor& v = val(a);
    if (c0 > c1 || c1 > v.cols()) throw ShapeError("slice_cols: range out of bounds");
    Tensor out(v.rows(), c1 - c0);
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = c0; j < c1; ++j) out(i, j - c0) = v(i, j);
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, c0, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(a);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) ga(i, c0 + j) += g(i, j);
                },
                "slice_cols");
}

VarId Tape::mean_rows(VarId a) {
    check(a);
    const Tensor& v = val(a);
    if (v.rows() == 0) throw ShapeError("mean_rows: empty input");
    Tensor out(1, v.cols());
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) += v(i, j);
    for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) /= static_cast<double>(v.rows());
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(a);
                    const double inv = 1.0 / static_cast<double>(ga.rows());
                    for (std::size_t i = 0; i < ga.rows(); ++i)
                        for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j) * inv;
                },
                "mean_rows");
}

VarId Tape::mean_cols(VarId a) {
    check(a);
    const Tensor& v = val(a);
    if (v.cols() == 0) throw ShapeError("mean_cols: empty input");
    Tensor out(v.rows(), 1);
    for (std::size_t i = 0; i < v.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < v.cols(); ++j) acc += v(i, j);
        out(i, 0) = acc / static_cast<double>(v.cols());
    }
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(a);
                    const double inv = 1.0 / static_cast<double>(ga.cols());
                    for (std::size_t i = 0; i < ga.rows(); ++i)
                        for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(i, 0) * inv;
                },
                "mean_cols");
}

VarId Tape::sum_all(VarId a) {
    check(a);
    const Tensor& v = val(a);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[i];
    Tensor out(1, 1);
    out[0] = acc;
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, self](Tape& t) {
                    const double g = t.nodes_[self].grad[0];
                    Tensor& ga = t.grad_buf(a);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
                },
                "sum_all");
}

VarId Tape::add_row_broadcast(VarId m, VarId row) {
    check(m);
    check(row);
    const Tensor& vm = val(m);
    const Tensor& vr = val(row);
    if (vr.rows() != 1 || vr.cols() != vm.cols())
        throw ShapeError("add_row_broadcast: row vector shape mismatch");
    Tensor out = vm;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += vr(0, j);
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [m, row, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& gm = t.grad_buf(m);
                    Tensor& gr = t.grad_buf(row);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) {
                            gm(i, j) += g(i, j);
                            gr(0, j) += g(i, j);
                        }
                },
                "add_row_broadcast");
}

VarId Tape::mul_scalar(VarId a, VarId s) {
    check(a);
    check(s);
    if (!val(s).is_scalar()) throw ShapeError("mul_scalar: scale factor must be 1x1");
    Tensor out = adaptisent::scale(val(a), val(s)[0]);
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, s, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& va = t.val(a);
                    const double sv = t.val(s)[0];
                    Tensor& ga = t.grad_buf(a);
                    Tensor& gs = t.grad_buf(s);
                    double acc = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += sv * g[i];
                        acc += g[i] * va[i];
                    }
                    gs[0] += acc;
                },
                "mul_scalar");
}

VarId Tape::mul_col_broadcast(VarId m, VarId col) {
    check(m);
    check(col);
    const Tensor& vm = val(m);
    const Tensor& vc = val(col);
    if (vc.cols() != 1 || vc.rows() != vm.rows())
        throw ShapeError("mul_col_broadcast: column vector shape mismatch");
    Tensor out = vm;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= vc(i, 0);
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [m, col, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& vm2 = t.val(m);
                    const Tensor& vc2 = t.val(col);
                    Tensor& gm = t.grad_buf(m);
                    Tensor& gc = t.grad_buf(col);
                    for (std::size_t i = 0; i < g.rows(); ++i) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < g.cols(); ++j) {
                            gm(i, j) += g(i, j) * vc2(i, 0);
                            acc += g(i, j) * vm2(i, j);
                        }
                        gc(i, 0) += acc;
                    }
                },
                "mul_col_broadcast");
}

VarId Tape::softmax_rows(VarId a) {
    check(a);
    Tensor out = adaptisent::softmax_rows(val(a));
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [a, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& s = t.nodes_[self].value;
                    Tensor& ga = t.grad_buf(a);
                    for (std::size_t i = 0; i < g.rows(); ++i) {
                        double dot = 0.0;
                        for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * s(i, j);
                        for (std::size_t j = 0; j < g.cols(); ++j)
                            ga(i, j) += s(i, j) * (g(i, j) - dot);
                    }
                },
                "softmax_rows");
}

VarId Tape::weighted_ce_rows(VarId logits, std::vector<int> targets, std::vector<double> weights) {
    check(logits);
    const Tensor& v = val(logits);
    if (targets.size() != v.rows() || weights.size() != v.rows())
        throw ShapeError("weighted_ce_rows: targets/weights length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        const int y = targets[i];
        if (y < 0 || static_cast<std::size_t>(y) >= v.cols())
            throw ShapeError("weighted_ce_rows: target out of range");
        if (weights[i] < 0.0) throw NumericError("weighted_ce_rows: negative weight");
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < v.cols(); ++j) mx = std::max(mx, v(i, j));
        double lse = 0.0;
        for (std::size_t j = 0; j < v.cols(); ++j) lse += std::exp(v(i, j) - mx);
        lse = mx + std::log(lse);
        total += weights[i] * (lse - v(i, static_cast<std::size_t>(y)));
    }
    Tensor out(1, 1);
    out[0] = total;
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [logits, ts = std::move(targets), ws = std::move(weights), self](Tape& t) {
                    const double g = t.nodes_[self].grad[0];
                    const Tensor& v = t.val(logits);
                    const Tensor probs = adaptisent::softmax_rows(v);
                    Tensor& gl = t.grad_buf(logits);
                    for (std::size_t i = 0; i < v.rows(); ++i) {
                        const double w = ws[i];
                        for (std::size_t j = 0; j < v.cols(); ++j) {
                            double p = probs(i, j);
                            if (static_cast<int>(j) == ts[i]) p -= 1.0;
                            gl(i, j) += g * w * p;
                        }
                    }
                },
                "weighted_ce_rows");
}

VarId Tape::ste_gate(VarId s_col, VarId theta, double temp) {
    check(s_col);
    check(theta);
    const Tensor& s = val(s_col);
    if (s.cols() != 1) throw ShapeError("ste_gate: expected a column vector");
    if (!val(theta).is_scalar()) throw ShapeError("ste_gate: theta must be 1x1");
    if (temp <= 0.0) throw NumericError("ste_gate: temperature must be positive");
    const double th = val(theta)[0];
    Tensor out(s.rows(), 1);
    for (std::size_t i = 0; i < s.rows(); ++i) out(i, 0) = s(i, 0) > th ? 1.0 : 0.0;
    const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
    return push(std::move(out),
                [s_col, theta, temp, self](Tape& t) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& s = t.val(s_col);
                    const double th = t.val(theta)[0];
                    Tensor& gs = t.grad_buf(s_col);
                    Tensor& gth = t.grad_buf(theta);
                    for (std::size_t i = 0; i < g.rows(); ++i) {
                        const double z = adaptisent::sigmoid((s(i, 0) - th) / temp);
                        const double slope = z * (1.0 - z) / temp;
                        gs(i, 0) += g(i, 0) * slope;
                        gth[0] -= g(i, 0) * slope;
                    }
                },
                "ste_gate");
}

void Tape::backward(VarId scalar_root) {
    check(scalar_root);
    if (!val(scalar_root).is_scalar()) throw ShapeError("backward: root must be a 1x1 scalar");
    grad_buf(scalar_root)[0] = 1.0;
    for (std::uint32_t i = scalar_root.idx + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.grad.empty() && n.back) n.back(*this);
    }
}

} // namespace adaptisent
