#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "testutil.hpp"

using namespace hsd;
using nlohmann::json;

namespace {

using testutil::oracle_metrics;
using testutil::OracleRow;

struct Fixture {
    Corpus gold;
    PredictionSet preds;
    std::vector<std::pair<int, int>> pairs;
};

Fixture fixture_from(const std::vector<int>& gold, const std::vector<int>& pred) {
    std::vector<testutil::Row> rows;
    PredictionSet set("model");
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        rows.push_back({i, "पाठ " + std::to_string(i), gold[i], "hi"});
        set.insert(i, pred[i]);
        pairs.push_back({gold[i], pred[i]});
    }
    return {testutil::make_corpus(Split::evaluation, rows), std::move(set), std::move(pairs)};
}

}  // namespace

TEST_CASE("confusion on hand-enumerated cases") {
    SUBCASE("perfect predictions") {
        auto fx = fixture_from({1, 1, 1, 1, 0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
        ConfusionMatrix cm = confusion(fx.preds, fx.gold);
        CHECK(cm == ConfusionMatrix{4, 0, 6, 0});
        MetricsRow row = compute_metrics(cm, Averaging::positive_class);
        CHECK(row.recall == 1.0);
        CHECK(row.precision == 1.0);
        CHECK(row.f1 == 1.0);
        CHECK(row.accuracy == 1.0);
        CHECK(row.degenerate_flags.empty());
    }
    SUBCASE("half right") {
        auto fx = fixture_from({1, 1, 0, 0}, {1, 0, 1, 0});
        ConfusionMatrix cm = confusion(fx.preds, fx.gold);
        CHECK(cm.tp == 1);
        CHECK(cm.fn == 1);
        CHECK(cm.fp == 1);
        CHECK(cm.tn == 1);
        MetricsRow row = compute_metrics(cm, Averaging::positive_class);
        CHECK(row.precision == 0.5);
        CHECK(row.recall == 0.5);
        CHECK(row.f1 == 0.5);
        CHECK(row.accuracy == 0.5);
    }
    SUBCASE("degenerate all-negative predictor") {
        auto fx = fixture_from({1, 1, 1, 1, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
        ConfusionMatrix cm = confusion(fx.preds, fx.gold);
        CHECK(cm == ConfusionMatrix{0, 0, 6, 4});
        MetricsRow row = compute_metrics(cm, Averaging::positive_class);
        CHECK(row.precision == 0.0);
        CHECK(row.recall == 0.0);
        CHECK(row.f1 == 0.0);
        CHECK(row.accuracy == 0.6);
        REQUIRE(row.degenerate_flags.size() == 2);
        CHECK(row.degenerate_flags[0] == "precision_undefined");
        CHECK(row.degenerate_flags[1] == "f1_undefined");
    }
}

TEST_CASE("confusion validates ids and labels") {
    auto fx = fixture_from({1, 0}, {1, 0});
    PredictionSet extra("model");
    extra.insert(0, 1);
    extra.insert(1, 0);
    extra.insert(5, 1);
    CHECK_THROWS_WITH_AS(confusion(extra, fx.gold), doctest::Contains("5"), ValidationError);

    Corpus unlabeled(Split::test, {make_sample(0, "क", std::nullopt, std::nullopt),
                                   make_sample(1, "ख", std::nullopt, std::nullopt)});
    CHECK_THROWS_AS(confusion(fx.preds, unlabeled), ValidationError);

    CHECK_THROWS_AS(compute_metrics(ConfusionMatrix{}, Averaging::macro), ValidationError);
}

TEST_CASE("compute_metrics agrees with the brute-force oracle on random cases") {
    std::mt19937_64 rng(2024);
    const char* modes[] = {"positive_class", "macro", "micro", "weighted"};
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t n = 1 + rng() % 50;
        std::vector<int> gold(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            gold[i] = rng() % 2;
            pred[i] = rng() % 2;
        }
        auto fx = fixture_from(gold, pred);
        ConfusionMatrix cm = confusion(fx.preds, fx.gold);
        CHECK(cm.total() == n);

        double accuracy_ref = -1.0;
        for (const char* mode : modes) {
            CAPTURE(iter);
            CAPTURE(mode);
            MetricsRow row = compute_metrics(cm, averaging_from_string(mode));
            OracleRow expected = oracle_metrics(fx.pairs, mode);
            CHECK(std::abs(row.recall - expected.recall) <= 1e-12);
            CHECK(std::abs(row.precision - expected.precision) <= 1e-12);
            CHECK(std::abs(row.f1 - expected.f1) <= 1e-12);
            CHECK(std::abs(row.accuracy - expected.accuracy) <= 1e-12);
            for (double v : {row.recall, row.precision, row.f1, row.accuracy}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            // Accuracy is averaging-invariant.
            if (accuracy_ref < 0) accuracy_ref = row.accuracy;
            CHECK(row.accuracy == accuracy_ref);
        }
        // Micro-averaged P/R/F1 collapse to accuracy for single-label binary.
        MetricsRow micro = compute_metrics(cm, Averaging::micro);
        CHECK(micro.precision == micro.accuracy);
        CHECK(micro.recall == micro.accuracy);
        CHECK(micro.f1 == micro.accuracy);
    }
}

namespace {

ReportRows published_rows() {
    auto row = [](double r, double p, double f1, double acc) {
        MetricsRow m;
        m.averaging = Averaging::positive_class;
        m.recall = r;
        m.precision = p;
        m.f1 = f1;
        m.accuracy = acc;
        return m;
    };
    ReportRows rows;
    rows["M1"] = row(0.6335, 0.7572, 0.6681, 0.8950);
    rows["M2"] = row(0.6296, 0.5874, 0.5984, 0.7927);
    rows["M3"] = row(0.6877, 0.6934, 0.6904, 0.8744);
    rows["M4"] = row(0.5934, 0.5915, 0.5924, 0.8305);
    rows["M5"] = row(0.6455, 0.5618, 0.5207, 0.6271);
    rows["M6"] = row(0.6504, 0.6596, 0.6548, 0.8619);
    rows["M7"] = row(0.7381, 0.6696, 0.6933, 0.8472);
    rows["M8"] = row(0.5320, 0.5400, 0.5346, 0.8270);
    rows["ensemble(M7,M3,M1)"] = row(0.7762, 0.6639, 0.6914, 0.8258);
    return rows;
}

}  // namespace

TEST_CASE("report rows render in registry order with best/worst flags") {
    ReportRows rows = published_rows();
    auto order = report_row_order(rows);
    REQUIRE(order.size() == 9);
    CHECK(order.front() == "M1");
    CHECK(order[7] == "M8");
    CHECK(order.back() == "ensemble(M7,M3,M1)");

    std::string text = render_report_text(rows);
    // Rows appear top to bottom in registry order, ensemble last.
    std::size_t prev = 0;
    for (const auto& id : order) {
        std::size_t pos = text.find(id + " ");
        if (pos == std::string::npos) pos = text.find(id);
        REQUIRE(pos != std::string::npos);
        CHECK(pos >= prev);
        prev = pos;
    }
    // Best/worst flags per column, four-decimal formatting.
    CHECK(text.find("0.7762*") != std::string::npos);  // ensemble recall best
    CHECK(text.find("0.5320!") != std::string::npos);  // M8 recall worst
    CHECK(text.find("0.7572*") != std::string::npos);  // M1 precision best
    CHECK(text.find("0.5400!") != std::string::npos);  // M8 precision worst
    CHECK(text.find("0.6933*") != std::string::npos);  // M7 F1 best
    CHECK(text.find("0.5207!") != std::string::npos);  // M5 F1 worst
    CHECK(text.find("0.8950*") != std::string::npos);  // M1 accuracy best
    CHECK(text.find("0.6271!") != std::string::npos);  // M5 accuracy worst
    CHECK(text.find("Recall") != std::string::npos);
    CHECK(text.find("Precision") != std::string::npos);
    CHECK(text.find("F1 Score") != std::string::npos);
    CHECK(text.find("Accuracy") != std::string::npos);
}

TEST_CASE("single-row report flags its own row") {
    ReportRows rows;
    MetricsRow only;
    only.recall = only.precision = only.f1 = only.accuracy = 0.5;
    rows["M3"] = only;
    std::string text = render_report_text(rows);
    CHECK(text.find("0.5000*") != std::string::npos);
}

TEST_CASE("report JSON carries the documented keys") {
    ReportRows rows = published_rows();
    json j = render_report_json(rows);
    REQUIRE(j.contains("M7"));
    const json& row = j["M7"];
    CHECK(row.at("recall") == 0.7381);
    CHECK(row.at("precision") == 0.6696);
    CHECK(row.at("f1") == 0.6933);
    CHECK(row.at("accuracy") == 0.8472);
    CHECK(row.at("averaging") == "positive_class");
    CHECK(row.at("degenerate_flags").is_array());

    MetricsRow reread = MetricsRow::from_json(row);
    CHECK(reread.recall == 0.7381);
    CHECK(reread.averaging == Averaging::positive_class);

    // Sparse fixture rows (no averaging key) default to positive_class.
    MetricsRow sparse = MetricsRow::from_json(
        json{{"recall", 0.1}, {"precision", 0.2}, {"f1", 0.3}, {"accuracy", 0.4}});
    CHECK(sparse.averaging == Averaging::positive_class);
}

TEST_CASE("report SVG contains one chart per metric and one bar per row") {
    ReportRows rows = published_rows();
    std::string svg = render_report_svg(rows);
    CHECK(svg.rfind("<svg", 0) == 0);
    for (const char* title : {"Recall", "Precision", "F1 Score", "Accuracy"}) {
        CHECK(svg.find(title) != std::string::npos);
    }
    std::size_t bars = 0;
    for (std::size_t pos = svg.find("<rect"); pos != std::string::npos;
         pos = svg.find("<rect", pos + 1)) {
        ++bars;
    }
    CHECK(bars == 4 * rows.size() + 1);  // + background
}
