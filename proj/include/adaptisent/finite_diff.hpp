#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "adaptisent/tensor.hpp"

namespace adaptisent {

// Central-difference gradient estimate, one coordinate at a time:
// (f(x+eps) - f(x-eps)) / (2 eps). The verification oracle for every
// analytic gradient in this project; it only ever calls the forward pass.
inline Tensor finite_diff_grad(const std::function<double()>& f, Tensor& param, double eps = 1e-5) {
    if (eps <= 0.0) throw NumericError("finite_diff_grad: eps must be positive");
    Tensor grad(param.rows(), param.cols());
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double saved = param[i];
        param[i] = saved + eps;
        const double plus = f();
        param[i] = saved - eps;
        const double minus = f();
        param[i] = saved;
        if (!std::isfinite(plus) || !std::isfinite(minus))
            throw NumericError("finite_diff_grad: non-finite function value");
        grad[i] = (plus - minus) / (2.0 * eps);
    }
    return grad;
}

// max over entries of |a-b| / max(|a|, |b|, 1e-8)
inline double max_relative_error(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("max_relative_error: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(b[i]), 1e-8});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

} // namespace adaptisent
