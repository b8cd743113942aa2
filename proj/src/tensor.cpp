#include "adaptisent/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace adaptisent {

Tensor Tensor::row(std::vector<double> values) {
    Tensor t;
    t.rows_ = 1;
    t.cols_ = values.size();
    t.data_ = std::move(values);
    return t;
}

Tensor Tensor::column(std::vector<double> values) {
    Tensor t;
    t.rows_ = values.size();
    t.cols_ = 1;
    t.data_ = std::move(values);
    return t;
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Tensor t;
    t.rows_ = rows.size();
    t.cols_ = rows.size() ? rows.begin()->size() : 0;
    t.data_.reserve(t.rows_ * t.cols_);
    for (const auto& r : rows) {
        if (r.size() != t.cols_) throw ShapeError("from_rows: ragged rows");
        t.data_.insert(t.data_.end(), r.begin(), r.end());
    }
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void require_finite(const Tensor& t, const char* what) {
    if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite values");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dims disagree (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
    Tensor out(a.rows(), b.cols());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += aip * b(p, j);
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    Tensor out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("add: shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("sub: shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("hadamard: shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    return out;
}

Tensor softmax_rows(const Tensor& m) {
    if (m.empty()) throw ShapeError("softmax_rows: empty input");
    require_finite(m, "softmax_rows input");
    Tensor out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m.cols(); ++j) mx = std::max(mx, m(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = std::exp(m(i, j) - mx);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) /= sum;
    }
    return out;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(out[i]);
    return out;
}

double weighted_cross_entropy(const Tensor& probs_row, std::size_t target, double weight) {
    if (probs_row.rows() != 1) throw ShapeError("weighted_cross_entropy: expected a 1-row distribution");
    if (target >= probs_row.cols()) throw ShapeError("weighted_cross_entropy: target out of range");
    if (weight < 0.0) throw NumericError("weighted_cross_entropy: negative weight");
    double sum = 0.0;
    for (std::size_t j = 0; j < probs_row.cols(); ++j) sum += probs_row[j];
    if (std::abs(sum - 1.0) > 1e-9)
        throw NumericError("weighted_cross_entropy: probabilities sum to " + std::to_string(sum));
    if (weight == 0.0) return 0.0;
    const double p = std::max(probs_row[target], std::numeric_limits<double>::min());
    return -weight * std::log(p);
}

} // namespace adaptisent
