#include "core/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "core/errors.hpp"

namespace hsd {

using nlohmann::json;

ConfusionMatrix confusion(const PredictionSet& preds, const Corpus& gold) {
    if (!gold.labeled()) {
        throw ValidationError("confusion: gold corpus must be fully labeled");
    }
    std::vector<std::uint64_t> gold_ids;
    gold_ids.reserve(gold.size());
    for (const Sample& s : gold.samples()) gold_ids.push_back(s.id);
    auto pred_ids = preds.ids();
    if (pred_ids != gold_ids) {
        std::vector<std::uint64_t> only_pred, only_gold;
        std::set_difference(pred_ids.begin(), pred_ids.end(), gold_ids.begin(), gold_ids.end(),
                            std::back_inserter(only_pred));
        std::set_difference(gold_ids.begin(), gold_ids.end(), pred_ids.begin(), pred_ids.end(),
                            std::back_inserter(only_gold));
        std::string msg = "confusion: prediction ids do not match gold ids";
        auto list = [](const std::vector<std::uint64_t>& v) {
            std::string s;
            std::size_t shown = std::min<std::size_t>(v.size(), 10);
            for (std::size_t i = 0; i < shown; ++i) {
                if (i) s += ",";
                s += std::to_string(v[i]);
            }
            if (v.size() > shown) s += ",... (+" + std::to_string(v.size() - shown) + " more)";
            return s;
        };
        if (!only_pred.empty()) msg += "; only predicted: " + list(only_pred);
        if (!only_gold.empty()) msg += "; only gold: " + list(only_gold);
        throw ValidationError(msg);
    }

    ConfusionMatrix cm;
    for (const Sample& s : gold.samples()) {
        int pred = preds.predictions().at(s.id);
        int truth = *s.label;
        if (truth == 1) {
            pred == 1 ? ++cm.tp : ++cm.fn;
        } else {
            pred == 1 ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

std::string to_string(Averaging a) {
    switch (a) {
        case Averaging::positive_class: return "positive_class";
        case Averaging::macro: return "macro";
        case Averaging::micro: return "micro";
        case Averaging::weighted: return "weighted";
    }
    return "?";
}

Averaging averaging_from_string(const std::string& s) {
    if (s == "positive_class") return Averaging::positive_class;
    if (s == "macro") return Averaging::macro;
    if (s == "micro") return Averaging::micro;
    if (s == "weighted") return Averaging::weighted;
    throw ValidationError("unknown averaging '" + s +
                          "' (expected positive_class, macro, micro or weighted)");
}

json MetricsRow::to_json() const {
    json j;
    j["recall"] = recall;
    j["precision"] = precision;
    j["f1"] = f1;
    j["accuracy"] = accuracy;
    j["averaging"] = to_string(averaging);
    j["degenerate_flags"] = degenerate_flags;
    return j;
}

MetricsRow MetricsRow::from_json(const json& j) {
    MetricsRow row;
    row.recall = j.at("recall").get<double>();
    row.precision = j.at("precision").get<double>();
    row.f1 = j.at("f1").get<double>();
    row.accuracy = j.at("accuracy").get<double>();
    row.averaging = averaging_from_string(j.value("averaging", "positive_class"));
    if (j.contains("degenerate_flags")) {
        row.degenerate_flags = j.at("degenerate_flags").get<std::vector<std::string>>();
    }
    return row;
}

namespace {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
};

ClassMetrics class_metrics(double tp, double fp, double fn) {
    ClassMetrics m;
    if (tp + fp == 0.0) {
        m.precision_degenerate = true;
    } else {
        m.precision = tp / (tp + fp);
    }
    if (tp + fn == 0.0) {
        m.recall_degenerate = true;
    } else {
        m.recall = tp / (tp + fn);
    }
    if (m.precision + m.recall == 0.0) {
        m.f1_degenerate = true;
    } else {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    return m;
}

}  // namespace

MetricsRow compute_metrics(const ConfusionMatrix& cm, Averaging averaging) {
    if (cm.total() == 0) {
        throw ValidationError("compute_metrics: empty confusion matrix");
    }
    const auto tp = static_cast<double>(cm.tp);
    const auto fp = static_cast<double>(cm.fp);
    const auto tn = static_cast<double>(cm.tn);
    const auto fn = static_cast<double>(cm.fn);
    const double total = tp + fp + tn + fn;

    MetricsRow row;
    row.averaging = averaging;
    row.accuracy = (tp + tn) / total;

    // Class 1 (hate) is the positive class; for class 0 the roles invert.
    ClassMetrics pos = class_metrics(tp, fp, fn);
    ClassMetrics neg = class_metrics(tn, fn, fp);

    auto flag = [&row](const std::string& name, bool degenerate) {
        if (degenerate) row.degenerate_flags.push_back(name);
    };

    switch (averaging) {
        case Averaging::positive_class:
            row.precision = pos.precision;
            row.recall = pos.recall;
            row.f1 = pos.f1;
            flag("precision_undefined", pos.precision_degenerate);
            flag("recall_undefined", pos.recall_degenerate);
            flag("f1_undefined", pos.f1_degenerate);
            break;
        case Averaging::macro:
            row.precision = (pos.precision + neg.precision) / 2.0;
            row.recall = (pos.recall + neg.recall) / 2.0;
            row.f1 = (pos.f1 + neg.f1) / 2.0;
            flag("class1_precision_undefined", pos.precision_degenerate);
            flag("class1_recall_undefined", pos.recall_degenerate);
            flag("class1_f1_undefined", pos.f1_degenerate);
            flag("class0_precision_undefined", neg.precision_degenerate);
            flag("class0_recall_undefined", neg.recall_degenerate);
            flag("class0_f1_undefined", neg.f1_degenerate);
            break;
        case Averaging::micro:
            // Single-label binary: micro precision, recall and F1 all equal
            // accuracy.
            row.precision = row.accuracy;
            row.recall = row.accuracy;
            row.f1 = row.accuracy;
            break;
        case Averaging::weighted: {
            const double support1 = tp + fn;
            const double support0 = tn + fp;
            row.precision = (support1 * pos.precision + support0 * neg.precision) / total;
            row.recall = (support1 * pos.recall + support0 * neg.recall) / total;
            row.f1 = (support1 * pos.f1 + support0 * neg.f1) / total;
            flag("class1_precision_undefined", pos.precision_degenerate && support1 > 0);
            flag("class1_recall_undefined", pos.recall_degenerate && support1 > 0);
            flag("class1_f1_undefined", pos.f1_degenerate && support1 > 0);
            flag("class0_precision_undefined", neg.precision_degenerate && support0 > 0);
            flag("class0_recall_undefined", neg.recall_degenerate && support0 > 0);
            flag("class0_f1_undefined", neg.f1_degenerate && support0 > 0);
            break;
        }
    }
    return row;
}

// ---------------------------------------------------------------------------
// Report rendering

std::vector<std::string> report_row_order(const ReportRows& rows) {
    std::vector<std::string> registry_rows, ensemble_rows, other_rows;
    for (const auto& [id, _] : rows) {
        if (id.size() >= 2 && id[0] == 'M' &&
            id.find_first_not_of("0123456789", 1) == std::string::npos) {
            registry_rows.push_back(id);
        } else if (id.rfind("ensemble", 0) == 0) {
            ensemble_rows.push_back(id);
        } else {
            other_rows.push_back(id);
        }
    }
    std::sort(registry_rows.begin(), registry_rows.end(), [](const auto& a, const auto& b) {
        return std::stoul(a.substr(1)) < std::stoul(b.substr(1));
    });
    std::sort(ensemble_rows.begin(), ensemble_rows.end());
    std::sort(other_rows.begin(), other_rows.end());
    std::vector<std::string> order = std::move(registry_rows);
    order.insert(order.end(), ensemble_rows.begin(), ensemble_rows.end());
    order.insert(order.end(), other_rows.begin(), other_rows.end());
    return order;
}

namespace {

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct ColumnFlags {
    double best;
    double worst;
};

ColumnFlags column_flags(const ReportRows& rows, double MetricsRow::* member) {
    ColumnFlags f{-1.0, 2.0};
    for (const auto& [_, row] : rows) {
        f.best = std::max(f.best, row.*member);
        f.worst = std::min(f.worst, row.*member);
    }
    return f;
}

const std::vector<std::pair<std::string, double MetricsRow::*>>& metric_columns() {
    static const std::vector<std::pair<std::string, double MetricsRow::*>> cols = {
        {"Recall", &MetricsRow::recall},
        {"Precision", &MetricsRow::precision},
        {"F1 Score", &MetricsRow::f1},
        {"Accuracy", &MetricsRow::accuracy},
    };
    return cols;
}

}  // namespace

std::string render_report_text(const ReportRows& rows) {
    if (rows.empty()) return "(no rows)\n";
    auto order = report_row_order(rows);
    std::size_t id_width = 5;
    for (const auto& id : order) id_width = std::max(id_width, id.size());

    std::map<std::string, ColumnFlags> flags;
    for (const auto& [name, member] : metric_columns()) {
        flags[name] = column_flags(rows, member);
    }

    std::ostringstream out;
    out << std::string(id_width, ' ').replace(0, 5, "Model");
    for (const auto& [name, _] : metric_columns()) {
        out << "  " << name << std::string(name.size() < 10 ? 10 - name.size() : 0, ' ');
    }
    out << "\n";
    for (const auto& id : order) {
        const MetricsRow& row = rows.at(id);
        out << id << std::string(id_width - id.size(), ' ');
        for (const auto& [name, member] : metric_columns()) {
            double v = row.*member;
            char mark = ' ';
            if (v == flags[name].best) mark = '*';
            else if (v == flags[name].worst) mark = '!';
            std::string cell = fmt4(v) + std::string(1, mark);
            out << "  " << cell << std::string(cell.size() < 10 ? 10 - cell.size() : 0, ' ');
        }
        out << "\n";
    }
    out << "(* best in column, ! worst in column)\n";
    std::vector<std::string> schemes;
    for (const auto& id : order) {
        std::string s = to_string(rows.at(id).averaging);
        if (std::find(schemes.begin(), schemes.end(), s) == schemes.end()) schemes.push_back(s);
    }
    out << "averaging: ";
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        if (i) out << ", ";
        out << schemes[i];
    }
    out << "\n";
    return out.str();
}

json render_report_json(const ReportRows& rows) {
    json j = json::object();
    for (const auto& [id, row] : rows) {
        j[id] = row.to_json();
    }
    return j;
}

std::string render_report_svg(const ReportRows& rows) {
    auto order = report_row_order(rows);
    const int bar_w = 34;
    const int gap = 10;
    const int chart_h = 150;
    const int chart_pad = 46;
    const int left = 50;
    const int width = left + static_cast<int>(order.size()) * (bar_w + gap) + 30;
    const int height = (chart_h + chart_pad) * 4 + 20;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    int chart_index = 0;
    for (const auto& [name, member] : metric_columns()) {
        int top = 20 + chart_index * (chart_h + chart_pad);
        svg << "<g>\n<text x=\"" << left << "\" y=\"" << top - 6
            << "\" font-size=\"12\" font-weight=\"bold\">" << name << "</text>\n";
        svg << "<line x1=\"" << left << "\" y1=\"" << top + chart_h << "\" x2=\""
            << width - 20 << "\" y2=\"" << top + chart_h << "\" stroke=\"#444\"/>\n";
        int x = left;
        for (const auto& id : order) {
            double v = rows.at(id).*member;
            int h = static_cast<int>(v * chart_h);
            svg << "<rect x=\"" << x << "\" y=\"" << top + chart_h - h << "\" width=\"" << bar_w
                << "\" height=\"" << h << "\" fill=\"#4878a8\"/>\n";
            svg << "<text x=\"" << x << "\" y=\"" << top + chart_h - h - 3 << "\">" << fmt4(v)
                << "</text>\n";
            std::string label = id.size() > 10 ? id.substr(0, 9) + "…" : id;
            svg << "<text x=\"" << x << "\" y=\"" << top + chart_h + 12 << "\">" << label
                << "</text>\n";
            x += bar_w + gap;
        }
        svg << "</g>\n";
        ++chart_index;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace hsd
