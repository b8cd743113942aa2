#include <doctest.h>

#include <cmath>

#include "adaptisent/encoder.hpp"
#include "adaptisent/finite_diff.hpp"

using namespace adaptisent;

TEST_CASE("encode_text shapes and positional structure") {
    RunConfig cfg;
    ModelParams params = init_params(cfg, 5);
    Tape tape;
    ParamVars pv = stage_params(tape, params);

    SUBCASE("L=1 gives three rows") {
        EncodedText enc = encode_text(tape, pv, cfg, {3}, {1}, {0}, {0});
        CHECK(tape.val(enc.t0).rows() == 3);
        CHECK(tape.val(enc.t0).cols() == static_cast<std::size_t>(cfg.d));
        CHECK(tape.val(enc.ling_dep).rows() == 1);
        CHECK(tape.val(enc.ling_dep).cols() == static_cast<std::size_t>(cfg.d_d));
    }

    SUBCASE("identical composite ids differ exactly by the positional rows") {
        EncodedText enc = encode_text(tape, pv, cfg, {4, 4}, {2, 2}, {1, 1}, {0, 0});
        const Tensor& t0 = tape.val(enc.t0);
        const Tensor pe = positional_encoding(4, static_cast<std::size_t>(cfg.d));
        for (std::size_t j = 0; j < t0.cols(); ++j) {
            const double diff = t0(1, j) - t0(2, j);
            CHECK(diff == doctest::Approx(pe(1, j) - pe(2, j)).epsilon(1e-12));
        }
    }

    SUBCASE("zeroed tables make every row a positional encoding") {
        ModelParams zeros = params;
        for (auto& [name, t] : zeros.groups()) *t = Tensor(t->rows(), t->cols());
        Tape tz;
        ParamVars pz = stage_params(tz, zeros);
        EncodedText enc = encode_text(tz, pz, cfg, {1, 2}, {0, 1}, {0, 0}, {0, 0});
        const Tensor& t0 = tz.val(enc.t0);
        const Tensor pe = positional_encoding(4, static_cast<std::size_t>(cfg.d));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < t0.cols(); ++j)
                CHECK(t0(i, j) == doctest::Approx(pe(i, j)).epsilon(1e-15));
    }

    SUBCASE("id out of range") {
        CHECK_THROWS_AS(encode_text(tape, pv, cfg, {cfg.vocab_words + 1}, {0}, {0}, {0}), ShapeError);
    }
}

TEST_CASE("encode_visual") {
    RunConfig cfg;
    ModelParams params = init_params(cfg, 6);

    SUBCASE("K=1 gives two rows") {
        Tape tape;
        ParamVars pv = stage_params(tape, params);
        VarId v = encode_visual(tape, pv, cfg, Tensor(1, static_cast<std::size_t>(cfg.d_v), 0.3));
        CHECK(tape.val(v).rows() == 2);
        CHECK(tape.val(v).cols() == static_cast<std::size_t>(cfg.d_v));
    }

    SUBCASE("identity projection recovers patch rows up to the positional encoding") {
        ModelParams p2 = params;
        p2.patch_proj = Tensor::identity(static_cast<std::size_t>(cfg.d_v));
        Tape tape;
        ParamVars pv = stage_params(tape, p2);
        Tensor patches(2, static_cast<std::size_t>(cfg.d_v));
        for (std::size_t i = 0; i < patches.size(); ++i) patches[i] = 0.01 * static_cast<double>(i);
        VarId v = encode_visual(tape, pv, cfg, patches);
        const Tensor pe = positional_encoding(3, static_cast<std::size_t>(cfg.d_v));
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t j = 0; j < patches.cols(); ++j)
                CHECK(tape.val(v)(k + 1, j) ==
                      doctest::Approx(patches(k, j) + pe(k + 1, j)).epsilon(1e-12));
    }

    SUBCASE("permuting patches with nonzero positional encodings changes V_I") {
        Tape tape;
        ParamVars pv = stage_params(tape, params);
        Tensor a(2, static_cast<std::size_t>(cfg.d_v));
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.05 * static_cast<double>(i % 5) - 0.1;
        Tensor b(2, static_cast<std::size_t>(cfg.d_v));
        for (std::size_t j = 0; j < a.cols(); ++j) {
            b(0, j) = a(1, j);
            b(1, j) = a(0, j);
        }
        VarId va = encode_visual(tape, pv, cfg, a);
        VarId vb = encode_visual(tape, pv, cfg, b);
        CHECK(tape.val(va) != tape.val(vb));
    }

    SUBCASE("shape mismatch") {
        Tape tape;
        ParamVars pv = stage_params(tape, params);
        CHECK_THROWS_AS(encode_visual(tape, pv, cfg, Tensor(2, 5)), ShapeError);
    }
}

TEST_CASE("encode_caption") {
    RunConfig cfg;
    ModelParams params = init_params(cfg, 7);
    Tape tape;
    ParamVars pv = stage_params(tape, params);

    VarId empty = encode_caption(tape, pv, cfg, {});
    CHECK(tape.val(empty).rows() == 0);
    CHECK(tape.val(empty).cols() == static_cast<std::size_t>(cfg.d));

    VarId one = encode_caption(tape, pv, cfg, {4});
    CHECK(tape.val(one).rows() == 1);

    // two seeds, different embeddings
    ModelParams other = init_params(cfg, 8);
    Tape t2;
    ParamVars pv2 = stage_params(t2, other);
    VarId one2 = encode_caption(t2, pv2, cfg, {4});
    CHECK(tape.val(one) != t2.val(one2));
}

TEST_CASE("gradients flow into every embedding table used") {
    RunConfig cfg;
    ModelParams params = init_params(cfg, 9);
    const std::vector<int> tokens{3, 7}, pos{1, 2}, dep{0, 3}, ner{1, 0};
    const std::vector<int> caption{5};
    const Tensor patches(2, static_cast<std::size_t>(cfg.d_v), 0.2);

    // scalar probe: sum of all encoder outputs
    auto loss = [&](const ModelParams& p) {
        Tape tape;
        ParamVars pv = stage_params(tape, p);
        EncodedText enc = encode_text(tape, pv, cfg, tokens, pos, dep, ner);
        VarId v = encode_visual(tape, pv, cfg, patches);
        VarId c = encode_caption(tape, pv, cfg, caption);
        VarId total = tape.add(tape.sum_all(enc.t0), tape.sum_all(v));
        total = tape.add(total, tape.sum_all(c));
        return std::pair{tape, total};
    };

    Tape tape;
    ParamVars pv = stage_params(tape, params);
    EncodedText enc = encode_text(tape, pv, cfg, tokens, pos, dep, ner);
    VarId v = encode_visual(tape, pv, cfg, patches);
    VarId c = encode_caption(tape, pv, cfg, caption);
    VarId total = tape.add(tape.add(tape.sum_all(enc.t0), tape.sum_all(v)), tape.sum_all(c));
    tape.backward(total);

    for (VarId table : {pv.word_emb, pv.pos_emb, pv.dep_emb, pv.caption_emb, pv.patch_proj}) {
        double norm = 0.0;
        const Tensor g = tape.grad(table);
        for (std::size_t i = 0; i < g.size(); ++i) norm += std::abs(g[i]);
        CHECK(norm > 0.0);
    }

    // finite-difference cross-check on one word-table entry
    ModelParams probe = params;
    const std::size_t entry = 3 * probe.word_emb.cols() + 1; // row of token id 3
    const double saved = probe.word_emb[entry];
    const double eps = 1e-6;
    probe.word_emb[entry] = saved + eps;
    auto [tape_plus, root_plus] = loss(probe);
    probe.word_emb[entry] = saved - eps;
    auto [tape_minus, root_minus] = loss(probe);
    probe.word_emb[entry] = saved;
    const double fd = (tape_plus.val(root_plus)[0] - tape_minus.val(root_minus)[0]) / (2 * eps);
    CHECK(tape.grad(pv.word_emb)[entry] == doctest::Approx(fd).epsilon(1e-5));
}
