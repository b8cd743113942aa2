#include <doctest.h>

#include <cmath>

#include "adaptisent/augment.hpp"
#include "adaptisent/data.hpp"
#include "adaptisent/finite_diff.hpp"
#include "adaptisent/model.hpp"

using namespace adaptisent;

TEST_CASE("project_pair distances") {
    RunConfig cfg;
    cfg.d = 2;
    cfg.heads = 1;
    cfg.d_v = 3;
    ModelParams params = init_params(cfg, 1);

    SUBCASE("identity maps with equal inputs give zero distance") {
        RunConfig square = cfg;
        square.d_v = 2;
        ModelParams p = init_params(square, 1);
        p.align_text_w = Tensor::identity(2);
        p.align_vis_w = Tensor::identity(2);
        p.align_text_b = Tensor(1, 2);
        p.align_vis_b = Tensor(1, 2);
        Tape tape;
        ParamVars pv = stage_params(tape, p);
        VarId e = tape.leaf(Tensor::from_rows({{0.3, -0.7}}));
        AlignedPair pair = project_pair(tape, pv, e, e);
        CHECK(tape.val(pair.distance)[0] == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("orthogonal unit projections are distance 2") {
        ModelParams p = params;
        p.align_text_w = Tensor(2, 2);
        p.align_vis_w = Tensor(3, 2);
        p.align_text_b = Tensor::from_rows({{1.0, 0.0}}); // e_T' = (1,0)
        p.align_vis_b = Tensor::from_rows({{0.0, 1.0}});  // e_I' = (0,1)
        Tape tape;
        ParamVars pv = stage_params(tape, p);
        AlignedPair pair = project_pair(tape, pv, tape.leaf(Tensor(1, 2)), tape.leaf(Tensor(1, 3)));
        CHECK(tape.val(pair.distance)[0] == doctest::Approx(2.0).epsilon(1e-15));
    }

    SUBCASE("distance is symmetric in the projected vectors") {
        SeededRng rng(7);
        Tape tape;
        ParamVars pv = stage_params(tape, params);
        Tensor a(1, 2), b(1, 3);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(-1, 1);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.uniform(-1, 1);
        AlignedPair pair = project_pair(tape, pv, tape.leaf(a), tape.leaf(b));
        // recompute with the operands swapped at the distance level
        VarId diff = tape.sub(pair.e_i_prime, pair.e_t_prime);
        VarId swapped = tape.sum_all(tape.mul(diff, diff));
        CHECK(tape.val(pair.distance)[0] == doctest::Approx(tape.val(swapped)[0]).epsilon(1e-12));
        CHECK(tape.val(pair.distance)[0] >= 0.0);
    }
}

TEST_CASE("alignment_regularizer") {
    Tape tape;
    std::vector<VarId> dists{tape.leaf(Tensor(1, 1, 2.0)), tape.leaf(Tensor(1, 1, 3.0))};

    CHECK(tape.val(alignment_regularizer(tape, dists, 0.0, false))[0] == 0.0);
    // lambda 0.1 on distances [2,3] -> 0.5
    CHECK(tape.val(alignment_regularizer(tape, dists, 0.1, false))[0] ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(tape.val(alignment_regularizer(tape, {}, 0.1, false))[0] == 0.0);
    CHECK(tape.val(alignment_regularizer(tape, dists, 0.1, true))[0] == 0.0); // ablation
    CHECK_THROWS_AS(alignment_regularizer(tape, dists, -0.1, false), ConfigError);
}

TEST_CASE("alignment gradient reaches the projection parameters") {
    RunConfig cfg;
    cfg.d = 3;
    cfg.heads = 1;
    cfg.d_v = 2;
    ModelParams params = init_params(cfg, 9);
    const Tensor e_t_in = Tensor::from_rows({{0.4, -0.2, 0.9}});
    const Tensor e_i_in = Tensor::from_rows({{-0.5, 0.3}});

    auto loss = [&](const ModelParams& p) {
        Tape tape;
        ParamVars pv = stage_params(tape, p);
        AlignedPair pair = project_pair(tape, pv, tape.leaf(e_t_in), tape.leaf(e_i_in));
        return tape.val(alignment_regularizer(tape, {pair.distance}, 0.1, false))[0];
    };

    Tape tape;
    ParamVars pv = stage_params(tape, params);
    AlignedPair pair = project_pair(tape, pv, tape.leaf(e_t_in), tape.leaf(e_i_in));
    tape.backward(alignment_regularizer(tape, {pair.distance}, 0.1, false));

    ModelParams probe = params;
    for (auto [analytic_id, tensor] :
         {std::pair{pv.align_text_w, &probe.align_text_w}, {pv.align_text_b, &probe.align_text_b},
          {pv.align_vis_w, &probe.align_vis_w}, {pv.align_vis_b, &probe.align_vis_b}}) {
        const Tensor fd = finite_diff_grad([&]() { return loss(probe); }, *tensor);
        CHECK(max_relative_error(tape.grad(analytic_id), fd) < 1e-4);
    }
}

TEST_CASE("coherence") {
    const Tensor v = Tensor::row({0.3, -0.4, 0.5});
    CHECK(coherence(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(coherence(Tensor::row({1, 0}), Tensor::row({0, 1})) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(coherence(Tensor::row({1, 0}), Tensor::row({-1, 0})) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK_THROWS_AS(coherence(Tensor::row({0, 0}), Tensor::row({1, 0})), NumericError);

    SUBCASE("scale invariance: coherence(v, cv) = 1 for c > 0") {
        SeededRng rng(19);
        for (int trial = 0; trial < 30; ++trial) {
            Tensor a(1, 4);
            for (std::size_t i = 0; i < 4; ++i) a[i] = rng.uniform(-2, 2);
            const double c = rng.uniform(0.01, 10.0);
            CHECK(coherence(a, scale(a, c)) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("perturb_text") {
    SyntheticSpec spec;
    spec.n_instances = 40;
    spec.seed = 5;
    Datasets ds = generate(spec);
    PosPools pools = PosPools::from_dataset(ds.train, spec.vocab_pos);
    const MultimodalInstance& inst = ds.train.front();

    SUBCASE("rate 0 is the identity") {
        CHECK(perturb_text(inst, pools, 123, 0.0) == inst);
    }
    SUBCASE("deterministic given seed") {
        CHECK(perturb_text(inst, pools, 9, 0.8) == perturb_text(inst, pools, 9, 0.8));
        CHECK(perturb_text(inst, pools, 9, 1.0) == perturb_text(inst, pools, 9, 1.0));
    }
    SUBCASE("aspect tokens, tags, patches, captions never change") {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            const MultimodalInstance out = perturb_text(inst, pools, seed, 1.0);
            CHECK(out.pos == inst.pos);
            CHECK(out.dep == inst.dep);
            CHECK(out.ner == inst.ner);
            CHECK(out.patches == inst.patches);
            CHECK(out.caption == inst.caption);
            CHECK(out.aspects == inst.aspects);
            for (const AspectSpan& a : inst.aspects)
                for (int i = a.start; i < a.end; ++i)
                    CHECK(out.tokens[static_cast<std::size_t>(i)] ==
                          inst.tokens[static_cast<std::size_t>(i)]);
        }
    }
    SUBCASE("replacements stay within the same POS pool") {
        const MultimodalInstance out = perturb_text(inst, pools, 17, 1.0);
        for (std::size_t i = 0; i < out.tokens.size(); ++i) {
            const auto& pool = pools.pools[static_cast<std::size_t>(out.pos[i])];
            bool found = false;
            for (int w : pool)
                if (w == out.tokens[i]) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("filter_augmented") {
    auto mk = [](double c) {
        AugmentedCandidate cand;
        cand.instance.id = "c";
        cand.coherence = c;
        return cand;
    };
    std::vector<AugmentedCandidate> cands{mk(-0.9), mk(0.2), mk(0.5), mk(0.8), mk(1.0)};

    SUBCASE("tau = -1 keeps all") {
        auto kept = filter_augmented(cands, -1.0, false);
        CHECK(kept.size() == 5);
        for (const auto& c : cands) CHECK(c.kept);
    }
    SUBCASE("tau = 1 keeps only coherence 1") {
        auto kept = filter_augmented(cands, 1.0, false);
        CHECK(kept.size() == 1);
    }
    SUBCASE("tau = 0.5 keeps exactly those at or above") {
        auto kept = filter_augmented(cands, 0.5, false);
        CHECK(kept.size() == 3);
        CHECK_FALSE(cands[0].kept);
        CHECK_FALSE(cands[1].kept);
        CHECK(cands[2].kept);
        CHECK(cands[3].kept);
        CHECK(cands[4].kept);
    }
    SUBCASE("no_augmentation keeps none") {
        auto kept = filter_augmented(cands, -1.0, true);
        CHECK(kept.empty());
        for (const auto& c : cands) CHECK_FALSE(c.kept);
    }
    SUBCASE("tau out of range rejected") {
        CHECK_THROWS_AS(filter_augmented(cands, 1.5, false), ConfigError);
    }
}
