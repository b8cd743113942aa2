#include <doctest.h>

#include <cmath>

#include "adaptisent/model.hpp"

using namespace adaptisent;

TEST_CASE("gold_bio encoding") {
    // "X loves Y" with aspect (0,1)
    const auto tags = gold_bio(3, {{0, 1, SentimentLabel::positive}});
    CHECK(tags == std::vector<BioTag>{BioTag::B, BioTag::O, BioTag::O});

    const auto two = gold_bio(5, {{0, 2, SentimentLabel::neutral}, {3, 5, SentimentLabel::negative}});
    CHECK(two == std::vector<BioTag>{BioTag::B, BioTag::I, BioTag::O, BioTag::B, BioTag::I});
}

TEST_CASE("decode_spans") {
    CHECK(decode_spans({BioTag::B, BioTag::I, BioTag::O}) ==
          std::vector<std::pair<int, int>>{{0, 2}});
    CHECK(decode_spans({BioTag::O, BioTag::O, BioTag::O}).empty());
    // orphan I repaired to B
    CHECK(decode_spans({BioTag::I, BioTag::I, BioTag::O}) ==
          std::vector<std::pair<int, int>>{{0, 2}});
    CHECK(decode_spans({BioTag::B, BioTag::B}) == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
    CHECK(decode_spans({BioTag::O, BioTag::B, BioTag::I}) ==
          std::vector<std::pair<int, int>>{{1, 3}});

    SUBCASE("outputs are sorted, non-overlapping, in range") {
        SeededRng rng(23);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t len = 1 + rng.uniform_int(10);
            std::vector<BioTag> tags(len);
            for (auto& t : tags) t = static_cast<BioTag>(rng.uniform_int(3));
            const auto spans = decode_spans(tags);
            int prev_end = 0;
            for (auto [s, e] : spans) {
                CHECK(s >= prev_end);
                CHECK(s < e);
                CHECK(e <= static_cast<int>(len));
                prev_end = e;
            }
        }
    }
}

TEST_CASE("decode(gold_bio) round-trips the spans") {
    SeededRng rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        const int len = 4 + static_cast<int>(rng.uniform_int(8));
        std::vector<AspectSpan> spans;
        int cursor = 0;
        while (cursor + 1 < len && spans.size() < 3) {
            const int start = cursor + static_cast<int>(rng.uniform_int(2));
            const int end = std::min(len, start + 1 + static_cast<int>(rng.uniform_int(2)));
            if (start >= end) break;
            spans.push_back({start, end, SentimentLabel::neutral});
            cursor = end + 1;
        }
        const auto decoded = decode_spans(gold_bio(static_cast<std::size_t>(len), spans));
        REQUIRE(decoded.size() == spans.size());
        for (std::size_t i = 0; i < spans.size(); ++i) {
            CHECK(decoded[i].first == spans[i].start);
            CHECK(decoded[i].second == spans[i].end);
        }
    }
}

namespace {

struct Rig {
    RunConfig cfg;
    ModelParams params;
    MultimodalInstance inst;
    Rig() {
        params = init_params(cfg, 11);
        inst.id = "rig";
        inst.tokens = {5, 61, 92, 95};
        inst.pos = {1, 2, 0, 3};
        inst.dep = {0, 1, 2, 3};
        inst.ner = {1, 0, 0, 0};
        inst.patches = Tensor(2, static_cast<std::size_t>(cfg.d_v));
        SeededRng rng(3);
        for (std::size_t i = 0; i < inst.patches.size(); ++i) inst.patches[i] = rng.gaussian();
        inst.caption = {5, 93};
        inst.aspects = {{0, 1, SentimentLabel::positive}};
    }
};

} // namespace

TEST_CASE("tagging is deterministic for fixed params") {
    Rig rig;
    Tape t1, t2;
    ParamVars p1 = stage_params(t1, rig.params);
    ParamVars p2 = stage_params(t2, rig.params);
    InstanceForward f1 = forward_instance(t1, p1, rig.cfg, rig.inst);
    InstanceForward f2 = forward_instance(t2, p2, rig.cfg, rig.inst);
    CHECK(t1.val(f1.tag_logits) == t2.val(f2.tag_logits));
    CHECK(t1.val(f1.tag_logits).rows() == rig.inst.length());
    CHECK(t1.val(f1.tag_logits).cols() == 3);
}

TEST_CASE("aspect_embeddings") {
    Rig rig;

    SUBCASE("single-token span equals the token state; singleton pooling picks the row") {
        RunConfig cfg = rig.cfg;
        cfg.no_captions = true; // visual pool: patch rows only
        MultimodalInstance inst = rig.inst;
        inst.patches = Tensor(1, static_cast<std::size_t>(cfg.d_v), 0.4); // K = 1
        Tape tape;
        ParamVars pv = stage_params(tape, rig.params);
        InstanceForward fwd = forward_instance(tape, pv, cfg, inst);
        AspectEmbeddings emb = aspect_embeddings(tape, pv, cfg, {0, 1, SentimentLabel::neutral},
                                                 fwd.text_states, fwd.v_i, fwd.c0);
        for (std::size_t j = 0; j < tape.val(emb.e_t).cols(); ++j)
            CHECK(tape.val(emb.e_t)(0, j) == doctest::Approx(tape.val(fwd.text_states)(0, j)));
        // softmax over a single row is 1, so the pooled value is that row
        const Tensor& vi = tape.val(fwd.v_i);
        for (std::size_t j = 0; j < tape.val(emb.e_i).cols(); ++j)
            CHECK(tape.val(emb.e_i)(0, j) == doctest::Approx(vi(1, j)).epsilon(1e-12));
    }

    SUBCASE("identical states across the span: mean equals any member") {
        Tape tape;
        ParamVars pv = stage_params(tape, rig.params);
        Tensor states(3, static_cast<std::size_t>(rig.cfg.d));
        for (std::size_t j = 0; j < states.cols(); ++j)
            for (std::size_t i = 0; i < 3; ++i) states(i, j) = 0.1 * static_cast<double>(j);
        VarId sv = tape.leaf(states);
        InstanceForward fwd = forward_instance(tape, pv, rig.cfg, rig.inst);
        AspectEmbeddings emb = aspect_embeddings(tape, pv, rig.cfg, {0, 3, SentimentLabel::neutral},
                                                 sv, fwd.v_i, fwd.c0);
        for (std::size_t j = 0; j < states.cols(); ++j)
            CHECK(tape.val(emb.e_t)(0, j) == doctest::Approx(states(0, j)).epsilon(1e-12));
    }

    SUBCASE("empty span rejected") {
        Tape tape;
        ParamVars pv = stage_params(tape, rig.params);
        InstanceForward fwd = forward_instance(tape, pv, rig.cfg, rig.inst);
        CHECK_THROWS_AS(aspect_embeddings(tape, pv, rig.cfg, {2, 2, SentimentLabel::neutral},
                                          fwd.text_states, fwd.v_i, fwd.c0),
                        ShapeError);
    }
}

TEST_CASE("balance_fuse") {
    Rig rig;
    Tape tape;
    ParamVars pv = stage_params(tape, rig.params);

    auto make_pair = [&](const Tensor& t, const Tensor& i) {
        AlignedPair pair;
        pair.e_t_prime = tape.leaf(t);
        pair.e_i_prime = tape.leaf(i);
        VarId diff = tape.sub(pair.e_t_prime, pair.e_i_prime);
        pair.distance = tape.sum_all(tape.mul(diff, diff));
        return pair;
    };

    SUBCASE("zero-init gate gives the midpoint") {
        SeededRng rng(5);
        Tensor t(1, static_cast<std::size_t>(rig.cfg.d)), i(1, static_cast<std::size_t>(rig.cfg.d));
        for (std::size_t j = 0; j < t.size(); ++j) {
            t[j] = rng.uniform(-1, 1);
            i[j] = rng.uniform(-1, 1);
        }
        BalanceFused f = balance_fuse(tape, pv, make_pair(t, i), false);
        CHECK(tape.val(f.alpha_j)[0] == doctest::Approx(0.5).epsilon(1e-15));
        for (std::size_t j = 0; j < t.size(); ++j)
            CHECK(tape.val(f.fused)(0, j) == doctest::Approx(0.5 * (t[j] + i[j])).epsilon(1e-12));
    }

    SUBCASE("identical inputs fuse to themselves for any gate") {
        ModelParams p = rig.params;
        SeededRng rng(15);
        for (std::size_t j = 0; j < p.gate_u.size(); ++j) p.gate_u[j] = rng.uniform(-1, 1);
        p.gate_b = Tensor(1, 1, 0.3);
        Tape t2;
        ParamVars pv2 = stage_params(t2, p);
        Tensor v(1, static_cast<std::size_t>(rig.cfg.d), 0.25);
        AlignedPair pair;
        pair.e_t_prime = t2.leaf(v);
        pair.e_i_prime = t2.leaf(v);
        pair.distance = t2.leaf(Tensor(1, 1, 0.0));
        BalanceFused f = balance_fuse(t2, pv2, pair, false);
        for (std::size_t j = 0; j < v.size(); ++j)
            CHECK(t2.val(f.fused)(0, j) == doctest::Approx(v[j]).epsilon(1e-12));
    }

    SUBCASE("large gate drives the fusion to the text endpoint") {
        ModelParams p = rig.params;
        p.gate_b = Tensor(1, 1, 50.0); // alpha_j -> 1
        Tape t2;
        ParamVars pv2 = stage_params(t2, p);
        Tensor t(1, static_cast<std::size_t>(rig.cfg.d), 0.8);
        Tensor i(1, static_cast<std::size_t>(rig.cfg.d), -0.4);
        AlignedPair pair;
        pair.e_t_prime = t2.leaf(t);
        pair.e_i_prime = t2.leaf(i);
        pair.distance = t2.leaf(Tensor(1, 1, 0.0));
        BalanceFused f = balance_fuse(t2, pv2, pair, false);
        CHECK(t2.val(f.alpha_j)[0] > 0.999999);
        for (std::size_t j = 0; j < t.size(); ++j)
            CHECK(t2.val(f.fused)(0, j) == doctest::Approx(t[j]).epsilon(1e-6));
    }

    SUBCASE("no_balancing pins alpha_j at 0.5 even with a hot gate") {
        ModelParams p = rig.params;
        p.gate_b = Tensor(1, 1, 50.0);
        Tape t2;
        ParamVars pv2 = stage_params(t2, p);
        AlignedPair pair;
        pair.e_t_prime = t2.leaf(Tensor(1, static_cast<std::size_t>(rig.cfg.d), 1.0));
        pair.e_i_prime = t2.leaf(Tensor(1, static_cast<std::size_t>(rig.cfg.d), 0.0));
        pair.distance = t2.leaf(Tensor(1, 1, 0.0));
        BalanceFused f = balance_fuse(t2, pv2, pair, true);
        CHECK(t2.val(f.alpha_j)[0] == 0.5);
    }

    SUBCASE("fused vector is a convex combination (norm bound)") {
        SeededRng rng(44);
        for (int trial = 0; trial < 20; ++trial) {
            ModelParams p = rig.params;
            for (std::size_t j = 0; j < p.gate_u.size(); ++j) p.gate_u[j] = rng.uniform(-2, 2);
            p.gate_b = Tensor(1, 1, rng.uniform(-2, 2));
            Tape t2;
            ParamVars pv2 = stage_params(t2, p);
            Tensor t(1, static_cast<std::size_t>(rig.cfg.d)), i(1, static_cast<std::size_t>(rig.cfg.d));
            for (std::size_t j = 0; j < t.size(); ++j) {
                t[j] = rng.uniform(-1, 1);
                i[j] = rng.uniform(-1, 1);
            }
            AlignedPair pair;
            pair.e_t_prime = t2.leaf(t);
            pair.e_i_prime = t2.leaf(i);
            pair.distance = t2.leaf(Tensor(1, 1, 0.0));
            BalanceFused f = balance_fuse(t2, pv2, pair, false);
            auto norm = [](const Tensor& x) {
                double n = 0.0;
                for (std::size_t k = 0; k < x.size(); ++k) n += x[k] * x[k];
                return std::sqrt(n);
            };
            CHECK(norm(t2.val(f.fused)) <= std::max(norm(t), norm(i)) + 1e-12);
        }
    }
}

TEST_CASE("sentiment head") {
    Rig rig;

    SUBCASE("zero head gives the uniform distribution") {
        ModelParams p = rig.params;
        p.sent_w = Tensor(p.sent_w.rows(), 3);
        p.sent_b = Tensor(1, 3);
        Tape tape;
        ParamVars pv = stage_params(tape, p);
        VarId fused = tape.leaf(Tensor(1, static_cast<std::size_t>(rig.cfg.d), 0.37));
        VarId probs = tape.softmax_rows(sentiment_logits(tape, pv, fused));
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(tape.val(probs)(0, j) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }

    SUBCASE("probabilities sum to one; argmax shift-invariant") {
        Tape tape;
        ParamVars pv = stage_params(tape, rig.params);
        SeededRng rng(91);
        Tensor fused(1, static_cast<std::size_t>(rig.cfg.d));
        for (std::size_t j = 0; j < fused.size(); ++j) fused[j] = rng.uniform(-2, 2);
        VarId logits = sentiment_logits(tape, pv, tape.leaf(fused));
        VarId probs = tape.softmax_rows(logits);
        double sum = 0.0;
        std::size_t argmax = 0;
        for (std::size_t j = 0; j < 3; ++j) {
            sum += tape.val(probs)(0, j);
            if (tape.val(probs)(0, j) > tape.val(probs)(0, argmax)) argmax = j;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);

        VarId shifted = tape.add_row_broadcast(logits, tape.leaf(Tensor(1, 3, 4.2)));
        std::size_t argmax2 = 0;
        for (std::size_t j = 1; j < 3; ++j)
            if (tape.val(shifted)(0, j) > tape.val(shifted)(0, argmax2)) argmax2 = j;
        CHECK(argmax == argmax2);
    }
}
