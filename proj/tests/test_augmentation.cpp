#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "core/augmentation.hpp"
#include "core/errors.hpp"
#include "testutil.hpp"

using namespace hsd;
using testutil::TempDir;

namespace {

// Component y frozen so that cosine((1,0), (0.9,y)) computes to the double
// 0.9 bit-exactly (guarded below before use); likewise for 0.9 + 1e-9.
constexpr double kUnitY09 = 0.43588989435406722;
constexpr double kUnitY09Plus = 0.43588989228932573;

AugmentationConfig basic_cfg(std::set<std::string> langs = {"hi", "ne"}) {
    AugmentationConfig cfg;
    cfg.languages_to_augment = std::move(langs);
    return cfg;
}

hsd::Corpus ten_sample_corpus() {
    // 4 hate (two hi, two ne), 6 non-hate. Multi-token texts.
    return testutil::make_corpus(Split::train,
                                 {{0, "घृणा वाक्य एक क ख ग घ ङ च छ", 1, "hi"},
                                  {1, "सामान्य वाक्य एक", 0, "hi"},
                                  {2, "घृणा वाक्य दुई हो है था छ र", 1, "ne"},
                                  {3, "सामान्य वाक्य दुई", 0, "ne"},
                                  {4, "सामान्य वाक्य तीन", 0, "hi"},
                                  {5, "घृणा छोटो", 1, "hi"},
                                  {6, "सामान्य वाक्य चार", 0, "ne"},
                                  {7, "घृणा वाक्य चार धेरै लामो वाक्य हो साथी हरू", 1, "ne"},
                                  {8, "सामान्य वाक्य पाँच", 0, "hi"},
                                  {9, "सामान्य वाक्य छ", 0, "ne"}});
}

}  // namespace

TEST_CASE("backtranslate with the identity backend returns the input") {
    IdentityTranslator t;
    CHECK(backtranslate(t, "क ख ग", "hi") == "क ख ग");
}

TEST_CASE("backtranslate applies the fixture mapping of a table-driven backend") {
    testutil::TableTranslator t({{{"hi->en", "क ख"}, "K KH"}, {{"en->hi", "K KH"}, "क ग"}});
    CHECK(backtranslate(t, "क ख", "hi") == "क ग");
}

TEST_CASE("backtranslate rejects source equal to pivot and empty outputs") {
    IdentityTranslator t("en");
    CHECK_THROWS_AS(backtranslate(t, "text", "en"), ValidationError);

    testutil::TableTranslator empty_second_hop({{{"en->hi", "क ख"}, ""}});
    CHECK_THROWS_AS(backtranslate(empty_second_hop, "क ख", "hi"), AugmentationFailure);
}

TEST_CASE("backtranslation golden file stays stable for the configured backend") {
    auto golden_path =
        std::filesystem::path(HSD_TEST_DIR) / "golden" / "backtranslation_mock.json";
    std::ifstream in(golden_path);
    REQUIRE_MESSAGE(in.good(), "golden file missing: " << golden_path.string());
    nlohmann::json golden;
    in >> golden;
    MockTranslator t(golden.at("seed").get<std::uint64_t>(),
                     golden.at("pivot").get<std::string>());
    std::string out = backtranslate(t, golden.at("text").get<std::string>(),
                                    golden.at("source_lang").get<std::string>());
    CHECK(out == golden.at("backtranslation").get<std::string>());
}

TEST_CASE("gate accepts identical text and applies the strict threshold") {
    TokenHashProvider provider(16, 0, Pooling::mean);
    AugmentationConfig cfg = basic_cfg();

    auto same = gate(provider, "एक दुई तीन", "एक दुई तीन", cfg, 3);
    CHECK(same.similarity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.accepted);
    CHECK(same.source_id == 3);

    // Forced similarities through integer-exact preset vectors: 15/25 = 0.6.
    testutil::PresetProvider preset(2, {{"मूल", {3, 4}}, {"फरक", {5, 0}}, {"उल्टो", {-3, -4}}});
    auto rejected = gate(preset, "मूल", "फरक", cfg);
    CHECK(rejected.similarity == 0.6);
    CHECK_FALSE(rejected.accepted);
    auto opposite = gate(preset, "मूल", "उल्टो", cfg);
    CHECK(opposite.similarity == -1.0);
    CHECK_FALSE(opposite.accepted);
}

TEST_CASE("gate rejects similarity exactly at the threshold, accepts just above") {
    AugmentationConfig cfg = basic_cfg();  // threshold 0.9

    testutil::PresetProvider at(2, {{"मूल", {1.0, 0.0}}, {"ठीक", {0.9, kUnitY09}}});
    // Guard: the frozen component must reproduce the exact double 0.9.
    REQUIRE(cosine_similarity({1.0, 0.0}, {0.9, kUnitY09}) == 0.9);
    auto rec = gate(at, "मूल", "ठीक", cfg);
    CHECK(rec.similarity == 0.9);
    CHECK_FALSE(rec.accepted);

    testutil::PresetProvider above(2, {{"मूल", {1.0, 0.0}}, {"माथि", {0.9 + 1e-9, kUnitY09Plus}}});
    REQUIRE(cosine_similarity({1.0, 0.0}, {0.9 + 1e-9, kUnitY09Plus}) == 0.9 + 1e-9);
    auto rec2 = gate(above, "मूल", "माथि", cfg);
    CHECK(rec2.similarity == 0.9 + 1e-9);
    CHECK(rec2.accepted);

    CHECK_FALSE(gate_decision(0.9, 0.9));
    CHECK(gate_decision(0.9 + 1e-9, 0.9));
    CHECK(gate_decision(0.95, 0.9));
}

TEST_CASE("gate propagates validation requirements") {
    TokenHashProvider provider(8, 0, Pooling::mean);
    AugmentationConfig cfg = basic_cfg();
    CHECK_THROWS_AS(gate(provider, "", "क", cfg), ValidationError);
    CHECK_THROWS_AS(gate(provider, "क", "", cfg), ValidationError);
    AugmentationConfig bad = cfg;
    bad.threshold = 1.0;
    CHECK_THROWS_AS(gate(provider, "क", "ख", bad), ValidationError);
}

TEST_CASE("duplicate_minority doubles the positive class with fresh ids") {
    auto c = testutil::make_corpus(Split::train, {{0, "क", 1, "hi"},
                                                  {1, "ख", 1, "hi"},
                                                  {2, "ग", 1, "hi"},
                                                  {3, "घ", 0, "ne"},
                                                  {4, "ङ", 0, "ne"},
                                                  {5, "च", 0, "ne"},
                                                  {6, "छ", 0, "ne"},
                                                  {7, "ज", 0, "ne"}});
    Corpus out = duplicate_minority(c);
    CHECK(out.size() == 11);
    CHECK(out.filter(1, std::nullopt).size() == 6);
    CHECK(out.filter(0, std::nullopt).size() == 5);
    // Fresh ids continue above the previous maximum, ascending source order.
    CHECK(out.samples()[8].id == 8);
    CHECK(out.samples()[8].origin == Origin::duplicated);
    CHECK(out.samples()[8].text == "क");
    CHECK(out.samples()[10].text == "ग");

    Corpus no_hate = testutil::make_corpus(Split::train, {{0, "क", 0, "hi"}});
    CHECK(duplicate_minority(no_hate).size() == 1);

    Corpus unlabeled(Split::test, {make_sample(0, "क", std::nullopt, std::nullopt)});
    CHECK_THROWS_AS(duplicate_minority(unlabeled), ValidationError);
}

TEST_CASE("duplicate_minority doubles the full-scale minority fixture") {
    TempDir tmp("aug-table1");
    testutil::write_table_shaped_train(tmp.file("train.jsonl"));
    Corpus train = Corpus::ingest(tmp.file("train.jsonl"), Format::jsonl, Split::train);
    Corpus hindi_hate = train.filter(1, std::string("hi"));
    REQUIRE(hindi_hate.size() == 679);
    Corpus doubled = duplicate_minority(hindi_hate);
    CHECK(doubled.size() == 1358);
    CHECK(doubled.filter(1, std::nullopt).size() == 1358);
}

TEST_CASE("augment size identity with an all-accepting gate") {
    IdentityTranslator translator;
    TokenHashProvider provider(16, 0, Pooling::mean);
    AugmentationResult res = augment(ten_sample_corpus(), basic_cfg(), translator, provider);
    CHECK(res.input_size == 10);
    CHECK(res.accepted == 4);
    CHECK(res.duplicated == 4);
    CHECK(res.failed == 0);
    CHECK(res.corpus.size() == 18);
    CHECK(res.corpus.size() == res.input_size + res.accepted + res.duplicated);
    CHECK(res.records.size() == 4);
    for (const auto& r : res.records) {
        CHECK(r.accepted);
        CHECK(r.similarity == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("augment size identity with an all-rejecting gate") {
    testutil::SuffixTranslator translator;
    auto corpus = ten_sample_corpus();
    std::vector<std::string> originals;
    for (const Sample& s : corpus.samples()) originals.push_back(s.text);
    testutil::RejectingProvider provider(originals);

    AugmentationResult res = augment(corpus, basic_cfg(), translator, provider);
    CHECK(res.accepted == 0);
    CHECK(res.rejected == 4);
    CHECK(res.duplicated == 4);
    CHECK(res.corpus.size() == 14);
    CHECK(res.corpus.size() == res.input_size + res.accepted + res.duplicated);
}

TEST_CASE("augment mixed gate matches the per-sample oracle") {
    MockTranslator translator(11);
    TokenHashProvider provider(32, 11, Pooling::mean);
    auto corpus = ten_sample_corpus();
    AugmentationConfig cfg = basic_cfg();

    // Independent oracle: run backtranslate + gate per positive sample,
    // outside the pipeline.
    std::vector<AugmentationRecord> expected;
    for (const Sample& s : corpus.samples()) {
        if (s.label != 1) continue;
        MockTranslator oracle_translator(11);
        TokenHashProvider oracle_provider(32, 11, Pooling::mean);
        std::string aug = backtranslate(oracle_translator, s.text, *s.lang);
        expected.push_back(gate(oracle_provider, s.text, aug, cfg, s.id));
    }
    std::size_t k = 0;
    for (const auto& r : expected) {
        if (r.accepted) ++k;
    }

    AugmentationResult res = augment(corpus, cfg, translator, provider);
    CHECK(res.corpus.size() == 14 + k);
    REQUIRE(res.records.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(res.records[i].source_id == expected[i].source_id);
        CHECK(res.records[i].augmented_text == expected[i].augmented_text);
        CHECK(res.records[i].similarity == expected[i].similarity);
        CHECK(res.records[i].accepted == expected[i].accepted);
    }
}

TEST_CASE("augment restricts backtranslation to the configured languages") {
    IdentityTranslator translator;
    TokenHashProvider provider(16, 0, Pooling::mean);
    AugmentationResult res =
        augment(ten_sample_corpus(), basic_cfg({"hi"}), translator, provider);
    // Only the two Hindi positives are gated; duplication still covers all
    // four positives.
    CHECK(res.records.size() == 2);
    for (const auto& r : res.records) {
        const Sample* src = res.corpus.find(r.source_id);
        REQUIRE(src != nullptr);
        CHECK(src->lang == std::optional<std::string>("hi"));
    }
    CHECK(res.duplicated == 4);
    CHECK(res.corpus.size() == 10 + 2 + 4);

    // A sample without a language tag is never augmented.
    auto untagged = testutil::make_corpus(
        Split::train, {{0, "घृणा वाक्य", 1, std::nullopt}, {1, "ठीक", 0, "hi"}});
    AugmentationResult res2 = augment(untagged, basic_cfg(), translator, provider);
    CHECK(res2.records.empty());
    CHECK(res2.duplicated == 1);
}

TEST_CASE("augment never touches negative samples") {
    std::mt19937_64 rng(3);
    IdentityTranslator translator;
    TokenHashProvider provider(16, 1, Pooling::mean);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<testutil::Row> rows;
        std::size_t n = 4 + rng() % 20;
        for (std::size_t i = 0; i < n; ++i) {
            int label = rng() % 3 == 0 ? 1 : 0;
            std::string lang = rng() % 2 ? "hi" : "ne";
            rows.push_back({i, testutil::synth_text(lang, label, i + 100 * iter), label, lang});
        }
        Corpus corpus = testutil::make_corpus(Split::train, rows);
        AugmentationResult res = augment(corpus, basic_cfg(), translator, provider);

        std::size_t in_neg = corpus.filter(0, std::nullopt).size();
        CHECK(res.corpus.filter(0, std::nullopt).size() == in_neg);
        for (const Sample& s : res.corpus.samples()) {
            if (s.origin != Origin::original) CHECK(s.label == 1);
        }
        CHECK(res.corpus.size() == res.input_size + res.accepted + res.duplicated);
    }
}

TEST_CASE("duplicate scope controls whether accepted backtranslations are copied") {
    IdentityTranslator translator;
    TokenHashProvider provider(16, 0, Pooling::mean);
    AugmentationConfig cfg = basic_cfg();
    cfg.duplicate_scope = DuplicateScope::all_positives;
    AugmentationResult res = augment(ten_sample_corpus(), cfg, translator, provider);
    // 4 original positives + 4 accepted backtranslations all duplicated.
    CHECK(res.duplicated == 8);
    CHECK(res.corpus.size() == 10 + 4 + 8);
}

TEST_CASE("augment drops failing candidates and aborts past 50 percent") {
    auto corpus = ten_sample_corpus();
    TokenHashProvider provider(16, 0, Pooling::mean);

    // 2 of 4 candidates fail: tolerated, dropped, counted.
    testutil::FailingTranslator two_fail(
        {corpus.samples()[0].text, corpus.samples()[2].text});
    AugmentationResult res = augment(corpus, basic_cfg(), two_fail, provider);
    CHECK(res.failed == 2);
    CHECK(res.records.size() == 2);
    CHECK(res.corpus.size() == res.input_size + res.accepted + res.duplicated);

    // 3 of 4 fail: > 50%, the run aborts.
    testutil::FailingTranslator three_fail(
        {corpus.samples()[0].text, corpus.samples()[2].text, corpus.samples()[5].text});
    CHECK_THROWS_AS(augment(corpus, basic_cfg(), three_fail, provider), TransportError);
}

TEST_CASE("augment id allocation continues from the original maximum") {
    auto corpus = testutil::make_corpus(Split::train, {{0, "सामान्य वाक्य", 0, "hi"},
                                                       {5, "घृणा वाक्य एक", 1, "hi"},
                                                       {9, "घृणा वाक्य दुई", 1, "ne"}});
    IdentityTranslator translator;
    TokenHashProvider provider(16, 0, Pooling::mean);
    AugmentationResult res = augment(corpus, basic_cfg(), translator, provider);
    REQUIRE(res.corpus.size() == 7);
    // Backtranslated first (source order), then duplicates (source order).
    const auto& s = res.corpus.samples();
    CHECK(s[3].id == 10);
    CHECK(s[3].origin == Origin::backtranslated);
    CHECK(s[4].id == 11);
    CHECK(s[4].origin == Origin::backtranslated);
    CHECK(s[5].id == 12);
    CHECK(s[5].origin == Origin::duplicated);
    CHECK(s[5].text == "घृणा वाक्य एक");
    CHECK(s[6].id == 13);
    CHECK(s[6].text == "घृणा वाक्य दुई");
}

TEST_CASE("augment is deterministic under the parallel path") {
    TempDir tmp("aug-parallel");
    std::vector<testutil::Row> rows;
    for (std::size_t i = 0; i < 60; ++i) {
        std::string lang = i % 2 ? "hi" : "ne";
        int label = i % 3 == 0 ? 1 : 0;
        rows.push_back({i, testutil::synth_text(lang, label, i), label, lang});
    }
    Corpus corpus = testutil::make_corpus(Split::train, rows);

    auto run = [&]() {
        MockTranslator translator(5);
        TokenHashProvider provider(32, 5, Pooling::mean);
        return augment(corpus, basic_cfg(), translator, provider);
    };
    AugmentationResult a = run();
    AugmentationResult b = run();
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].source_id == b.records[i].source_id);
        CHECK(a.records[i].similarity == b.records[i].similarity);
        CHECK(a.records[i].accepted == b.records[i].accepted);
    }
    CHECK(a.corpus.samples() == b.corpus.samples());

    // And the exported audit trail round-trips.
    write_audit_trail(a.records, tmp.file("audit.jsonl"));
    auto reread = read_audit_trail(tmp.file("audit.jsonl"));
    REQUIRE(reread.size() == a.records.size());
    for (std::size_t i = 0; i < reread.size(); ++i) {
        CHECK(reread[i].source_id == a.records[i].source_id);
        CHECK(reread[i].augmented_text == a.records[i].augmented_text);
        CHECK(reread[i].similarity == a.records[i].similarity);
        CHECK(reread[i].accepted == a.records[i].accepted);
    }
}

TEST_CASE("accepted count is non-increasing in the threshold") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> sim_dist(-1.0, 1.0);
    std::vector<AugmentationRecord> records;
    for (int i = 0; i < 200; ++i) {
        AugmentationRecord r;
        r.source_id = static_cast<std::uint64_t>(i);
        r.similarity = sim_dist(rng);
        r.accepted = gate_decision(r.similarity, 0.9);
        records.push_back(r);
    }
    std::uniform_real_distribution<double> t_dist(0.0, 1.0);
    std::vector<double> thresholds;
    for (int i = 0; i < 50; ++i) thresholds.push_back(t_dist(rng));
    std::sort(thresholds.begin(), thresholds.end());
    std::size_t prev = records.size() + 1;
    for (double t : thresholds) {
        std::size_t count = accepted_count(records, t);
        CHECK(count <= prev);
        prev = count;
    }
}

TEST_CASE("augmentation config parses and validates") {
    auto cfg = AugmentationConfig::from_json(nlohmann::json::parse(
        R"({"threshold": 0.8, "languages_to_augment": ["hi"], "duplicate_minority": false})"));
    CHECK(cfg.threshold == 0.8);
    CHECK(cfg.pivot == "en");
    CHECK(cfg.languages_to_augment == std::set<std::string>{"hi"});
    CHECK_FALSE(cfg.duplicate_minority);
    CHECK(cfg.duplicate_scope == DuplicateScope::original_only);

    CHECK_THROWS_AS(
        AugmentationConfig::from_json(nlohmann::json::parse(R"({"threshold": 1.0})")),
        ValidationError);
    CHECK_THROWS_AS(
        AugmentationConfig::from_json(nlohmann::json::parse(R"({"threshold": 0.0})")),
        ValidationError);

    auto unchanged = AugmentationConfig::from_json(nlohmann::json::object());
    CHECK(unchanged.threshold == 0.9);
    CHECK(unchanged.duplicate_minority);
}

TEST_CASE("translator factory builds the named backend") {
    auto identity = make_translator(nlohmann::json{{"name", "identity"}});
    CHECK(identity->name() == "identity");
    auto mock = make_translator(nlohmann::json{{"name", "mock"}, {"seed", 3}});
    CHECK(mock->name() == "mock");
    CHECK(mock->translate("एक दुई तीन", "hi", "en") == mock->translate("एक दुई तीन", "hi", "en"));
    CHECK_THROWS_AS(make_translator(nlohmann::json{{"name", "nope"}}), ValidationError);
}
