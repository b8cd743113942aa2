#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "adaptisent/checkpoint.hpp"
#include "adaptisent/config_io.hpp"
#include "adaptisent/data.hpp"

using namespace adaptisent;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("generator determinism and validity") {
    SyntheticSpec spec;
    spec.n_instances = 200;
    spec.seed = 31;

    Datasets a = generate(spec);
    Datasets b = generate(spec);
    CHECK(a.train == b.train);
    CHECK(a.dev == b.dev);
    CHECK(a.test == b.test);
    CHECK(dataset_to_jsonl(a.train) == dataset_to_jsonl(b.train)); // byte-identical

    CHECK(a.train.size() == 140);
    CHECK(a.dev.size() == 30);
    CHECK(a.test.size() == 30);

    const RunConfig cfg = spec.matching_config();
    for (const auto* split : {&a.train, &a.dev, &a.test})
        for (const MultimodalInstance& inst : *split) CHECK(validate_instance(inst, cfg).empty());

    SUBCASE("split ids are disjoint") {
        std::set<std::string> ids;
        for (const auto* split : {&a.train, &a.dev, &a.test})
            for (const MultimodalInstance& inst : *split) CHECK(ids.insert(inst.id).second);
    }
    SUBCASE("different seeds differ") {
        SyntheticSpec other = spec;
        other.seed = 32;
        CHECK(generate(other).train != a.train);
    }
}

TEST_CASE("generator class balance within 10% of uniform over 1000+ aspects") {
    SyntheticSpec spec;
    spec.n_instances = 700;
    spec.seed = 5;
    Datasets ds = generate(spec);
    DatasetStats all = stats(ds.train);
    const DatasetStats dev = stats(ds.dev), test = stats(ds.test);
    all.positive += dev.positive + test.positive;
    all.negative += dev.negative + test.negative;
    all.neutral += dev.neutral + test.neutral;
    all.total_aspects += dev.total_aspects + test.total_aspects;
    REQUIRE(all.total_aspects >= 1000);
    for (long count : {all.positive, all.negative, all.neutral}) {
        const double freq = static_cast<double>(count) / static_cast<double>(all.total_aspects);
        CHECK(freq > 1.0 / 3 - 0.1 / 3);
        CHECK(freq < 1.0 / 3 + 0.1 / 3);
    }
}

TEST_CASE("rho controls where the signal lives") {
    SyntheticSpec spec;
    spec.n_instances = 120;
    spec.seed = 8;

    SUBCASE("rho = 0: no patch shift, cues present") {
        spec.rho = 0.0;
        Datasets ds = generate(spec);
        for (const MultimodalInstance& inst : ds.train) {
            // patch means stay near zero without a planted direction
            for (std::size_t c = 0; c < 3; ++c) {
                double mean = 0.0;
                for (std::size_t k = 0; k < inst.patches.rows(); ++k) mean += inst.patches(k, c);
                mean /= static_cast<double>(inst.patches.rows());
                CHECK(std::abs(mean) < 4.0); // pure noise, no unit shift plus margin
            }
            bool any_cue = false;
            for (int t : inst.tokens)
                if (t >= 60 && t < 90) any_cue = true;
            CHECK(any_cue);
        }
    }
    SUBCASE("rho = 1: all aspects share the instance sentiment") {
        spec.rho = 1.0;
        Datasets ds = generate(spec);
        for (const MultimodalInstance& inst : ds.train)
            for (const AspectSpan& a : inst.aspects)
                CHECK(a.sentiment == inst.aspects.front().sentiment);
    }
}

TEST_CASE("jsonl round trip") {
    SyntheticSpec spec;
    spec.n_instances = 50;
    spec.seed = 12;
    Datasets ds = generate(spec);

    const std::string text = dataset_to_jsonl(ds.train);
    const auto loaded = dataset_from_jsonl(text);
    CHECK(loaded == ds.train);

    SUBCASE("file round trip") {
        const auto path = temp_file("adaptisent_test_roundtrip.jsonl");
        save_jsonl(ds.train, path.string());
        CHECK(load_jsonl(path.string()) == ds.train);
        std::filesystem::remove(path);
    }
    SUBCASE("empty input gives an empty dataset") {
        CHECK(dataset_from_jsonl("").empty());
        CHECK(dataset_from_jsonl("\n\n").empty());
    }
    SUBCASE("truncated line names the line number") {
        std::string broken = text;
        broken.resize(broken.find('\n') + 25); // cut into line 2
        try {
            dataset_from_jsonl(broken);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("missing field is a schema violation") {
        CHECK_THROWS_AS(dataset_from_jsonl(R"({"id":"x","tokens":[1]})" "\n"), IoError);
    }
    SUBCASE("semantic validation against a config") {
        RunConfig cfg = spec.matching_config();
        CHECK_NOTHROW(dataset_from_jsonl(text, &cfg));
        cfg.vocab_words = 5; // everything now out of range
        CHECK_THROWS_AS(dataset_from_jsonl(text, &cfg), IoError);
    }
}

TEST_CASE("stats") {
    SUBCASE("empty dataset gives zeros") {
        const DatasetStats s = stats({});
        CHECK(s.samples == 0);
        CHECK(s.total_aspects == 0);
        CHECK(s.mean_aspects == 0.0);
        CHECK(s.mean_length == 0.0);
    }
    SUBCASE("two instances with 1 and 3 aspects average to 2") {
        MultimodalInstance a;
        a.id = "a";
        a.tokens = {100, 101};
        a.pos = a.dep = a.ner = {0, 0};
        a.patches = Tensor(1, 12);
        a.aspects = {{0, 1, SentimentLabel::positive}};
        MultimodalInstance b = a;
        b.id = "b";
        b.tokens = {100, 101, 102, 103};
        b.pos = b.dep = b.ner = {0, 0, 0, 0};
        b.aspects = {{0, 1, SentimentLabel::negative},
                     {1, 2, SentimentLabel::neutral},
                     {3, 4, SentimentLabel::neutral}};
        const DatasetStats s = stats({a, b});
        CHECK(s.samples == 2);
        CHECK(s.positive == 1);
        CHECK(s.negative == 1);
        CHECK(s.neutral == 2);
        CHECK(s.total_aspects == 4);
        CHECK(s.mean_aspects == doctest::Approx(2.0));
        CHECK(s.mean_length == doctest::Approx(3.0));
        CHECK(stats_json(s).find("\"mean_aspects\":2.0") != std::string::npos);
    }
}

TEST_CASE("checkpoint round trip is bit-exact") {
    RunConfig cfg;
    cfg.seed = 19;
    const ModelParams params = init_params(cfg, 19);
    const Checkpoint original{cfg, params};

    const std::string text = checkpoint_to_string(original);
    CHECK(text.rfind(kCheckpointVersion, 0) == 0);
    const Checkpoint loaded = checkpoint_from_string(text);
    CHECK(loaded.params == params);
    CHECK(checkpoint_to_string(loaded) == text);
    CHECK(loaded.config.seed == cfg.seed);
    CHECK(loaded.config.d == cfg.d);

    SUBCASE("file round trip") {
        const auto path = temp_file("adaptisent_test_ckpt.txt");
        save_checkpoint(original, path.string());
        const Checkpoint from_file = load_checkpoint(path.string());
        CHECK(from_file.params == params);
        std::filesystem::remove(path);
    }
    SUBCASE("bad version rejected") {
        CHECK_THROWS_AS(checkpoint_from_string("nope\n"), IoError);
    }
    SUBCASE("truncated tensor rejected") {
        const std::string cut = text.substr(0, text.size() / 2);
        CHECK_THROWS_AS(checkpoint_from_string(cut), IoError);
    }
}

TEST_CASE("run config text format") {
    RunConfig cfg;
    cfg.gamma = 0.25;
    cfg.epochs = 7;
    cfg.no_masking = true;
    cfg.seed = 99;
    const RunConfig parsed = parse_run_config(run_config_to_string(cfg));
    CHECK(parsed.gamma == cfg.gamma);
    CHECK(parsed.epochs == 7);
    CHECK(parsed.no_masking);
    CHECK(parsed.seed == 99);

    CHECK_THROWS_AS(parse_run_config("nonsense_key = 1\n"), IoError);
    CHECK_THROWS_AS(parse_run_config("gamma 0.3\n"), IoError);
    CHECK_THROWS_AS(parse_run_config("gamma = abc\n"), IoError);
    CHECK(parse_run_config("# comment only\n\n").gamma == RunConfig{}.gamma);
}
