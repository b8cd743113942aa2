#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "adaptisent/errors.hpp"

namespace adaptisent {

// Dense row-major matrix of doubles. Vectors are 1-row or 1-column
// tensors; scalars are 1x1. Double precision throughout: the gradient
// checks that gate this project need the headroom.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Tensor row(std::vector<double> values);
    static Tensor column(std::vector<double> values);
    static Tensor identity(std::size_t n);
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Tensor& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
    bool all_finite() const;

    bool operator==(const Tensor& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Forward kernels. These are plain value-level functions; the tape ops in
// tape.hpp wrap them with gradient bookkeeping.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

// Row-wise softmax with max subtraction. Throws NumericError on NaN input.
Tensor softmax_rows(const Tensor& m);

// Elementwise stable logistic: no overflow for large |x|.
Tensor sigmoid(const Tensor& x);
double sigmoid(double x);

// -w * log p[y] for a probability row p. The differentiable path uses the
// log-sum-exp form on logits (Tape::weighted_ce_rows); this version exists
// for oracle-side checks on explicit distributions.
double weighted_cross_entropy(const Tensor& probs_row, std::size_t target, double weight);

void require_finite(const Tensor& t, const char* what);

} // namespace adaptisent
