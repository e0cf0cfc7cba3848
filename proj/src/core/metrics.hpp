#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/classifiers.hpp"
#include "core/corpus.hpp"

namespace hsd {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

// Positive class is label 1 (hate). Gold must be labeled and cover exactly
// the predicted ids.
ConfusionMatrix confusion(const PredictionSet& preds, const Corpus& gold);

enum class Averaging { positive_class, macro, micro, weighted };
std::string to_string(Averaging a);
Averaging averaging_from_string(const std::string& s);

// Zero-denominator convention: undefined precision/recall/F1 are reported as
// 0.0 and named in degenerate_flags.
struct MetricsRow {
    Averaging averaging = Averaging::positive_class;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::vector<std::string> degenerate_flags;

    nlohmann::json to_json() const;
    static MetricsRow from_json(const nlohmann::json& j);
};

MetricsRow compute_metrics(const ConfusionMatrix& cm, Averaging averaging);

// Report rows keyed by model id, rendered in registry order (M1..M8, then
// ensemble rows, then anything else alphabetically).
using ReportRows = std::map<std::string, MetricsRow>;

std::vector<std::string> report_row_order(const ReportRows& rows);
std::string render_report_text(const ReportRows& rows);
nlohmann::json render_report_json(const ReportRows& rows);
// One grouped bar chart per metric, as a single SVG document.
std::string render_report_svg(const ReportRows& rows);

}  // namespace hsd
