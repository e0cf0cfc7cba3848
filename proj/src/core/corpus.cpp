#include "core/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/errors.hpp"
#include "core/text.hpp"

namespace hsd {

using nlohmann::json;

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::evaluation: return "evaluation";
        case Split::test: return "test";
    }
    return "?";
}

std::string to_string(Origin o) {
    switch (o) {
        case Origin::original: return "original";
        case Origin::backtranslated: return "backtranslated";
        case Origin::duplicated: return "duplicated";
    }
    return "?";
}

std::string to_string(Format f) {
    return f == Format::csv ? "csv" : "jsonl";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "evaluation" || s == "eval") return Split::evaluation;
    if (s == "test") return Split::test;
    throw ValidationError("unknown split '" + s + "' (expected train, evaluation or test)");
}

Format format_from_string(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "jsonl") return Format::jsonl;
    throw ValidationError("unknown format '" + s + "' (expected csv or jsonl)");
}

Sample make_sample(std::uint64_t id, std::string_view text, std::optional<int> label,
                   std::optional<std::string> lang, Origin origin) {
    Sample s;
    s.id = id;
    s.text = text::normalize_nfc(text);
    if (s.text.empty()) {
        throw ValidationError("sample " + std::to_string(id) + ": text empty after normalization");
    }
    if (label && *label != 0 && *label != 1) {
        throw ValidationError("sample " + std::to_string(id) + ": label must be 0 or 1, got " +
                              std::to_string(*label));
    }
    if (lang && *lang != "hi" && *lang != "ne") {
        throw ValidationError("sample " + std::to_string(id) + ": lang must be 'hi' or 'ne', got '" +
                              *lang + "'");
    }
    s.label = label;
    s.lang = std::move(lang);
    s.origin = origin;
    return s;
}

Corpus::Corpus(Split split, std::vector<Sample> samples) : split_(split), samples_(std::move(samples)) {
    std::sort(samples_.begin(), samples_.end(),
              [](const Sample& a, const Sample& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        if (samples_[i].id == samples_[i - 1].id) {
            throw ValidationError("duplicate id " + std::to_string(samples_[i].id));
        }
    }
    if (split_ != Split::test) {
        for (const Sample& s : samples_) {
            if (!s.label) {
                throw ValidationError("split '" + to_string(split_) + "' requires labels; sample " +
                                      std::to_string(s.id) + " has none");
            }
        }
    }
}

bool Corpus::labeled() const {
    return std::all_of(samples_.begin(), samples_.end(),
                       [](const Sample& s) { return s.label.has_value(); });
}

std::optional<std::uint64_t> Corpus::max_id() const {
    if (samples_.empty()) return std::nullopt;
    return samples_.back().id;
}

const Sample* Corpus::find(std::uint64_t id) const {
    auto it = std::lower_bound(samples_.begin(), samples_.end(), id,
                               [](const Sample& s, std::uint64_t v) { return s.id < v; });
    if (it == samples_.end() || it->id != id) return nullptr;
    return &*it;
}

Corpus Corpus::filter(const std::function<bool(const Sample&)>& pred) const {
    std::vector<Sample> kept;
    for (const Sample& s : samples_) {
        if (pred(s)) kept.push_back(s);
    }
    return Corpus(split_, std::move(kept));
}

Corpus Corpus::filter(std::optional<int> label, std::optional<std::string> lang) const {
    return filter([&](const Sample& s) {
        if (label && s.label != label) return false;
        if (lang && s.lang != lang) return false;
        return true;
    });
}

Corpus Corpus::merge(const Corpus& other) const {
    std::vector<Sample> all = samples_;
    for (const Sample& s : other.samples_) {
        if (find(s.id) != nullptr) {
            throw ValidationError("merge: id " + std::to_string(s.id) +
                                  " present in both corpora");
        }
        all.push_back(s);
    }
    return Corpus(split_, std::move(all));
}

Corpus Corpus::merge_remapping_ids(const Corpus& other) const {
    std::vector<Sample> all = samples_;
    std::uint64_t next_id = max_id() ? *max_id() + 1 : 0;
    for (Sample s : other.samples_) {
        s.id = next_id++;
        all.push_back(std::move(s));
    }
    return Corpus(split_, std::move(all));
}

std::uint64_t CorpusStats::cell(const std::string& lang, int label) const {
    auto it = cells.find({lang, label});
    return it == cells.end() ? 0 : it->second;
}

CorpusStats stats(const Corpus& corpus) {
    CorpusStats st;
    for (const Sample& s : corpus.samples()) {
        if (s.lang && s.label) {
            ++st.cells[{*s.lang, *s.label}];
        } else {
            ++st.residual;
        }
        ++st.total;
    }
    return st;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180): quoted fields may contain commas, quotes and newlines.

namespace {

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t row = 0;  // 1-based, header is row 1
};

std::vector<CsvRecord> parse_csv(const std::string& data) {
    std::vector<CsvRecord> records;
    std::vector<std::string> fields;
    std::string field;
    std::size_t row = 1;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any = false;

    auto end_field = [&]() {
        fields.push_back(field);
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&]() {
        end_field();
        records.push_back({std::move(fields), row});
        fields = {};
        ++row;
    };

    for (std::size_t i = 0; i < data.size(); ++i) {
        char c = data[i];
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty() && !field_was_quoted) {
            in_quotes = true;
            field_was_quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            if (i + 1 < data.size() && data[i + 1] == '\n') ++i;
            end_record();
        } else if (c == '\n') {
            end_record();
        } else {
            field += c;
        }
    }
    if (in_quotes) {
        throw ValidationError("row " + std::to_string(row) + ": unterminated quoted field");
    }
    // Final record without trailing newline.
    if (!field.empty() || field_was_quoted || !fields.empty()) {
        end_record();
    }
    if (!any) {
        throw ValidationError("empty file");
    }
    return records;
}

bool needs_quoting(const std::string& f) {
    return f.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_escape(const std::string& f) {
    if (!needs_quoting(f)) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::uint64_t parse_id(const std::string& value, const std::string& where) {
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError(where + ": field 'index' must be a non-negative integer, got '" +
                              value + "'");
    }
    try {
        return std::stoull(value);
    } catch (const std::exception&)  {
        throw ValidationError(where + ": field 'index' out of range: '" + value + "'");
    }
}

Corpus ingest_csv(const std::filesystem::path& path, Split split, const std::string& data) {
    auto records = parse_csv(data);
    const auto& header = records.front().fields;
    auto col = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };
    auto idx_col = col("index");
    auto tweet_col = col("tweet");
    if (!idx_col || !tweet_col) {
        throw ValidationError(path.string() + ": header must contain 'index' and 'tweet' columns");
    }
    auto label_col = col("label");
    auto lang_col = col("lang");
    if (split != Split::test && !label_col) {
        throw ValidationError(path.string() + ": split '" + to_string(split) +
                              "' requires a 'label' column");
    }
    if (split != Split::test && !lang_col) {
        throw ValidationError(path.string() + ": split '" + to_string(split) +
                              "' requires a 'lang' column");
    }

    std::vector<Sample> samples;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        std::string where = "row " + std::to_string(rec.row);
        if (rec.fields.size() != header.size()) {
            throw ValidationError(where + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(rec.fields.size()));
        }
        auto get = [&](std::optional<std::size_t> c) -> std::string {
            if (!c || *c >= rec.fields.size()) return "";
            return rec.fields[*c];
        };
        std::uint64_t id = parse_id(get(idx_col), where);
        std::string tweet = get(tweet_col);
        std::optional<int> label;
        std::string label_raw = get(label_col);
        if (!label_raw.empty()) {
            if (label_raw == "0") label = 0;
            else if (label_raw == "1") label = 1;
            else throw ValidationError(where + ": field 'label' must be 0 or 1, got '" + label_raw + "'");
        } else if (split != Split::test) {
            throw ValidationError(where + ": field 'label' is required for split '" +
                                  to_string(split) + "'");
        }
        std::optional<std::string> lang;
        std::string lang_raw = get(lang_col);
        if (!lang_raw.empty()) {
            if (lang_raw != "hi" && lang_raw != "ne") {
                throw ValidationError(where + ": field 'lang' must be 'hi' or 'ne', got '" +
                                      lang_raw + "'");
            }
            lang = lang_raw;
        }
        try {
            samples.push_back(make_sample(id, tweet, label, lang));
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
    }
    return Corpus(split, std::move(samples));
}

Corpus ingest_jsonl(const std::filesystem::path& path, Split split, const std::string& data) {
    if (data.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw ValidationError(path.string() + ": empty file");
    }
    std::vector<Sample> samples;
    std::istringstream in(data);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string where = "line " + std::to_string(lineno);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(where + ": invalid JSON: " + e.what());
        }
        if (!obj.is_object()) {
            throw ValidationError(where + ": expected a JSON object");
        }
        bool id_ok = obj.contains("id") &&
                     (obj["id"].is_number_unsigned() ||
                      (obj["id"].is_number_integer() && obj["id"].get<long long>() >= 0));
        if (!id_ok) {
            throw ValidationError(where + ": key 'id' must be a non-negative integer");
        }
        if (!obj.contains("text") || !obj["text"].is_string()) {
            throw ValidationError(where + ": key 'text' must be a string");
        }
        std::optional<int> label;
        if (obj.contains("label")) {
            if (!obj["label"].is_number_integer()) {
                throw ValidationError(where + ": key 'label' must be an integer 0 or 1");
            }
            int v = obj["label"].get<int>();
            if (v != 0 && v != 1) {
                throw ValidationError(where + ": key 'label' must be 0 or 1, got " + std::to_string(v));
            }
            label = v;
        } else if (split != Split::test) {
            throw ValidationError(where + ": key 'label' is required for split '" + to_string(split) + "'");
        }
        std::optional<std::string> lang;
        if (obj.contains("lang")) {
            if (!obj["lang"].is_string()) {
                throw ValidationError(where + ": key 'lang' must be a string");
            }
            std::string v = obj["lang"].get<std::string>();
            if (v != "hi" && v != "ne") {
                throw ValidationError(where + ": key 'lang' must be 'hi' or 'ne', got '" + v + "'");
            }
            lang = v;
        }
        try {
            samples.push_back(make_sample(obj["id"].get<std::uint64_t>(),
                                          obj["text"].get<std::string>(), label, lang));
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
    }
    return Corpus(split, std::move(samples));
}

}  // namespace

Corpus Corpus::ingest(const std::filesystem::path& path, Format format, Split split) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string data = buf.str();
    if (data.empty()) {
        throw ValidationError(path.string() + ": empty file");
    }
    return format == Format::csv ? ingest_csv(path, split, data) : ingest_jsonl(path, split, data);
}

void Corpus::export_to(const std::filesystem::path& path, Format format) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write file: " + path.string());
    }
    if (format == Format::csv) {
        bool with_origin = std::any_of(samples_.begin(), samples_.end(),
                                       [](const Sample& s) { return s.origin != Origin::original; });
        out << "index,tweet,label,lang" << (with_origin ? ",origin" : "") << "\n";
        for (const Sample& s : samples_) {
            out << s.id << ',' << csv_escape(s.text) << ','
                << (s.label ? std::to_string(*s.label) : "") << ',' << (s.lang ? *s.lang : "");
            if (with_origin) out << ',' << to_string(s.origin);
            out << '\n';
        }
    } else {
        for (const Sample& s : samples_) {
            json obj;
            obj["id"] = s.id;
            obj["text"] = s.text;
            if (s.label) obj["label"] = *s.label;
            if (s.lang) obj["lang"] = *s.lang;
            if (s.origin != Origin::original) obj["origin"] = to_string(s.origin);
            out << obj.dump() << '\n';
        }
    }
    if (!out) {
        throw ValidationError("write failed: " + path.string());
    }
}

}  // namespace hsd
