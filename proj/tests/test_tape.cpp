#include <doctest.h>

#include <cmath>

#include "adaptisent/core.hpp"
#include "adaptisent/finite_diff.hpp"
#include "adaptisent/tape.hpp"

using namespace adaptisent;

namespace {

Tensor random_tensor(SeededRng& rng, std::size_t rows, std::size_t cols, double lo = -2.0,
                     double hi = 2.0) {
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Checks d(sum of elements of op(inputs)) / d(input) against central
// differences for every input tensor.
void check_op_gradient(const std::function<VarId(Tape&, std::vector<VarId>&)>& build,
                       std::vector<Tensor> inputs, double tol = 1e-6) {
    Tape tape;
    std::vector<VarId> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.leaf(t));
    VarId out = build(tape, vars);
    VarId root = tape.val(out).is_scalar() ? out : tape.sum_all(out);
    tape.backward(root);

    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Tensor analytic = tape.grad(vars[k]);
        const Tensor fd = finite_diff_grad(
            [&]() {
                Tape t2;
                std::vector<VarId> vs;
                for (const Tensor& t : inputs) vs.push_back(t2.leaf(t));
                VarId o = build(t2, vs);
                VarId r = t2.val(o).is_scalar() ? o : t2.sum_all(o);
                return t2.val(r)[0];
            },
            inputs[k], 1e-5);
        CHECK(max_relative_error(analytic, fd) < tol);
    }
}

} // namespace

TEST_CASE("finite_diff_grad basics") {
    Tensor x(1, 1, 3.0);
    const Tensor g = finite_diff_grad([&]() { return x[0] * x[0]; }, x);
    CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-6)); // d(x^2)/dx at 3

    Tensor y(2, 2, 1.5);
    const Tensor zero = finite_diff_grad([]() { return 42.0; }, y);
    for (std::size_t i = 0; i < zero.size(); ++i) CHECK(zero[i] == 0.0);

    CHECK_THROWS_AS(finite_diff_grad([]() { return 1.0; }, y, 0.0), NumericError);
    CHECK_THROWS_AS(finite_diff_grad([]() { return std::nan(""); }, y), NumericError);
}

TEST_CASE("tape op gradients match finite differences") {
    SeededRng rng(17);

    SUBCASE("add/sub/mul/div") {
        auto a = random_tensor(rng, 3, 2);
        auto b = random_tensor(rng, 3, 2, 0.5, 2.0);
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.add(v[0], v[1]); }, {a, b});
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.sub(v[0], v[1]); }, {a, b});
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.mul(v[0], v[1]); }, {a, b});
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.div(v[0], v[1]); }, {a, b});
    }
    SUBCASE("matmul/transpose") {
        auto a = random_tensor(rng, 3, 4);
        auto b = random_tensor(rng, 4, 2);
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.matmul(v[0], v[1]); }, {a, b});
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.transpose(v[0]); }, {a});
    }
    SUBCASE("sigmoid/softmax/sqrt") {
        auto a = random_tensor(rng, 2, 5);
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.sigmoid(v[0]); }, {a});
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) {
                // weight the softmax so its gradient is nontrivial
                Tensor w(2, 5);
                for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(i) * 0.37 - 1.0;
                return t.mul(t.softmax_rows(v[0]), t.leaf(w));
            },
            {a});
        auto pos = random_tensor(rng, 2, 3, 0.1, 4.0);
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.sqrt_guarded(v[0]); }, {pos});
    }
    SUBCASE("gather/concat/slice") {
        auto table = random_tensor(rng, 5, 3);
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) {
                return t.gather_rows(v[0], {0, 2, 2, 4}); // repeated row accumulates
            },
            {table});
        auto a = random_tensor(rng, 2, 3);
        auto b = random_tensor(rng, 4, 3);
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) {
                Tensor w(6, 3);
                for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.1 * static_cast<double>(i % 7) - 0.2;
                return t.mul(t.concat_rows({v[0], v[1]}), t.leaf(w));
            },
            {a, b});
        auto c = random_tensor(rng, 2, 4);
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) { return t.concat_cols({v[0], v[1]}); }, {a, c});
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) { return t.slice_rows(v[0], 1, 3); }, {b});
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) { return t.slice_cols(v[0], 1, 3); }, {c});
    }
    SUBCASE("reductions and broadcasts") {
        auto a = random_tensor(rng, 3, 4);
        auto row = random_tensor(rng, 1, 4);
        auto col = random_tensor(rng, 3, 1);
        auto s = random_tensor(rng, 1, 1);
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.mean_rows(v[0]); }, {a});
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.mean_cols(v[0]); }, {a});
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.sum_all(v[0]); }, {a});
        check_op_gradient([](Tape& t, std::vector<VarId>& v) { return t.scale(v[0], -1.7); }, {a});
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) { return t.add_row_broadcast(v[0], v[1]); }, {a, row});
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) { return t.mul_scalar(v[0], v[1]); }, {a, s});
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) { return t.mul_col_broadcast(v[0], v[1]); }, {a, col});
    }
    SUBCASE("weighted cross entropy from logits") {
        auto logits = random_tensor(rng, 4, 3);
        check_op_gradient(
            [](Tape& t, std::vector<VarId>& v) {
                return t.weighted_ce_rows(v[0], {0, 2, 1, 1}, {1.0, 0.5, 2.0, 0.0});
            },
            {logits});
    }
}

TEST_CASE("tape rejects bad inputs") {
    Tape tape;
    VarId a = tape.leaf(Tensor(2, 2, 1.0));
    VarId b = tape.leaf(Tensor(3, 2, 1.0));
    CHECK_THROWS_AS(tape.add(a, b), ShapeError);
    CHECK_THROWS_AS(tape.matmul(a, b), ShapeError);
    CHECK_THROWS_AS(tape.backward(a), ShapeError); // not a scalar

    Tensor nanval(1, 1);
    nanval[0] = std::nan("");
    CHECK_THROWS_AS(tape.leaf(nanval), NumericError);

    // inf produced by an op surfaces instead of propagating
    VarId big = tape.leaf(Tensor(1, 1, 1e308));
    CHECK_THROWS_AS(tape.mul(big, big), NumericError);
}

TEST_CASE("gradients accumulate through shared subgraphs") {
    // y = x * x computed with the same node on both sides: dy/dx = 2x
    Tape tape;
    VarId x = tape.leaf(Tensor(1, 1, 3.0));
    VarId y = tape.mul(x, x);
    tape.backward(y);
    CHECK(tape.grad(x)[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("ste_gate forward is hard and backward is the sigmoid surrogate") {
    Tape tape;
    VarId s = tape.leaf(Tensor::column({0.1, 0.9}));
    VarId theta = tape.leaf(Tensor(1, 1, 0.5));
    VarId gate = tape.ste_gate(s, theta, 0.1);
    CHECK(tape.val(gate)(0, 0) == 0.0);
    CHECK(tape.val(gate)(1, 0) == 1.0);

    tape.backward(tape.sum_all(gate));
    // surrogate slope sigma'((s-theta)/T)/T must be nonzero and mirrored in theta
    const Tensor gs = tape.grad(s);
    const Tensor gt = tape.grad(theta);
    CHECK(gs(0, 0) > 0.0);
    CHECK(gs(1, 0) > 0.0);
    CHECK(gt[0] == doctest::Approx(-(gs(0, 0) + gs(1, 0))).epsilon(1e-12));
}
