#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hsd {

enum class Split { train, evaluation, test };
enum class Origin { original, backtranslated, duplicated };
enum class Format { csv, jsonl };

std::string to_string(Split s);
std::string to_string(Origin o);
std::string to_string(Format f);
Split split_from_string(const std::string& s);
Format format_from_string(const std::string& s);

// One text instance. `text` is always NFC-normalized UTF-8; `label` is
// 0 = non-hate, 1 = hate, absent for unlabeled test data; `lang` is
// "hi" or "ne" when known. Ids come from the source file and are never
// regenerated (submission files key on them).
struct Sample {
    std::uint64_t id = 0;
    std::string text;
    std::optional<int> label;
    std::optional<std::string> lang;
    Origin origin = Origin::original;

    bool operator==(const Sample&) const = default;
};

// Normalizes the text (NFC) and validates field domains. All sample
// construction goes through here so the corpus invariants hold everywhere.
Sample make_sample(std::uint64_t id, std::string_view text, std::optional<int> label,
                   std::optional<std::string> lang, Origin origin = Origin::original);

// Immutable ordered collection of samples. Iteration order is ascending id.
// train/evaluation splits must be fully labeled; test may be unlabeled.
class Corpus {
public:
    Corpus(Split split, std::vector<Sample> samples);

    static Corpus ingest(const std::filesystem::path& path, Format format, Split split);
    void export_to(const std::filesystem::path& path, Format format) const;

    Split split() const { return split_; }
    const std::vector<Sample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    bool labeled() const;
    std::optional<std::uint64_t> max_id() const;
    const Sample* find(std::uint64_t id) const;

    Corpus filter(const std::function<bool(const Sample&)>& pred) const;
    // Predicate on label and/or lang; an unset field matches everything.
    Corpus filter(std::optional<int> label, std::optional<std::string> lang) const;
    // Union of two corpora with disjoint id spaces; keeps this corpus's split.
    Corpus merge(const Corpus& other) const;
    // Union that gives the incoming samples fresh ids above this corpus's
    // maximum (their source ids may collide across splits).
    Corpus merge_remapping_ids(const Corpus& other) const;

private:
    Split split_;
    std::vector<Sample> samples_;
};

// Per-(lang, label) accounting. Samples missing lang or label land in the
// residual cell so the total always partitions the corpus.
struct CorpusStats {
    std::map<std::pair<std::string, int>, std::uint64_t> cells;
    std::uint64_t residual = 0;
    std::uint64_t total = 0;

    std::uint64_t cell(const std::string& lang, int label) const;
};

CorpusStats stats(const Corpus& corpus);

}  // namespace hsd
