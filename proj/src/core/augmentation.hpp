#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/corpus.hpp"
#include "core/embeddings.hpp"

namespace hsd {

// Translation backend used for backtranslation. translate() must be
// deterministic for a fixed instance and configuration.
class TranslatorBackend {
public:
    virtual ~TranslatorBackend() = default;
    virtual std::string name() const = 0;
    virtual std::string pivot() const = 0;
    virtual bool reentrant() const { return false; }
    virtual std::string translate(std::string_view text, const std::string& source_lang,
                                  const std::string& target_lang) = 0;
};

// Returns the input unchanged. Useful for exercising the all-accept path.
class IdentityTranslator : public TranslatorBackend {
public:
    explicit IdentityTranslator(std::string pivot = "en") : pivot_(std::move(pivot)) {}
    std::string name() const override { return "identity"; }
    std::string pivot() const override { return pivot_; }
    bool reentrant() const override { return true; }
    std::string translate(std::string_view text, const std::string&, const std::string&) override {
        return std::string(text);
    }

private:
    std::string pivot_;
};

// Deterministic paraphrase simulator: per call it either swaps two adjacent
// tokens, duplicates a token, or substitutes a filler word, all chosen by a
// hash of (text, direction, seed). Long texts mostly survive the similarity
// gate, short ones often fail it, mirroring real backtranslation drift.
class MockTranslator : public TranslatorBackend {
public:
    explicit MockTranslator(std::uint64_t seed = 0, std::string pivot = "en");
    std::string name() const override { return "mock"; }
    std::string pivot() const override { return pivot_; }
    bool reentrant() const override { return true; }
    std::string translate(std::string_view text, const std::string& source_lang,
                          const std::string& target_lang) override;

private:
    std::uint64_t salt_;
    std::string pivot_;
};

// {"name": "identity"|"mock"|"http", "pivot": "en", ...}; http additionally
// takes base_url and model.
std::unique_ptr<TranslatorBackend> make_translator(const nlohmann::json& cfg);

enum class DuplicateScope { original_only, all_positives };
std::string to_string(DuplicateScope s);
DuplicateScope duplicate_scope_from_string(const std::string& s);

struct AugmentationConfig {
    double threshold = 0.9;  // acceptance is strictly greater-than
    std::string pivot = "en";
    std::set<std::string> languages_to_augment;
    bool duplicate_minority = true;
    DuplicateScope duplicate_scope = DuplicateScope::original_only;
    std::string provider;    // embedding provider identifier (for the audit log)
    std::string translator;  // translator identifier (for the audit log)

    void validate() const;
    static AugmentationConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct AugmentationRecord {
    std::uint64_t source_id = 0;
    std::string augmented_text;
    double similarity = 0.0;
    bool accepted = false;
};

struct AugmentationResult {
    Corpus corpus;
    std::vector<AugmentationRecord> records;
    std::uint64_t input_size = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t duplicated = 0;
    std::uint64_t failed = 0;  // dropped candidates (backend failure / empty output)
};

// Pivot round trip: source -> pivot -> source. Empty output at either hop is
// an AugmentationFailure (the caller drops the record and continues).
std::string backtranslate(TranslatorBackend& translator, std::string_view text,
                          const std::string& source_lang);

// The single comparison point for the similarity gate: strictly greater-than,
// so a similarity exactly equal to the threshold is rejected.
inline bool gate_decision(double similarity, double threshold) {
    return similarity > threshold;
}

AugmentationRecord gate(EmbeddingProvider& provider, std::string_view original,
                        std::string_view augmented, const AugmentationConfig& cfg,
                        std::uint64_t source_id = 0);

// Every label-1 sample appears twice; copies get fresh ids above the current
// maximum and origin=duplicated. Scope restricts which positives are copied.
Corpus duplicate_minority(const Corpus& corpus,
                          DuplicateScope scope = DuplicateScope::all_positives);

// Full §-style pipeline: backtranslate label-1 samples whose lang is in
// cfg.languages_to_augment, keep those passing the gate, then duplicate the
// minority class. Size identity: |out| = |in| + accepted + duplicated.
AugmentationResult augment(const Corpus& corpus, const AugmentationConfig& cfg,
                           TranslatorBackend& translator, EmbeddingProvider& provider);

std::string audit_to_jsonl(const std::vector<AugmentationRecord>& records);
void write_audit_trail(const std::vector<AugmentationRecord>& records,
                       const std::filesystem::path& path);
std::vector<AugmentationRecord> read_audit_trail(const std::filesystem::path& path);

// How many records pass a (possibly different) threshold. Non-increasing in
// the threshold for a fixed record set.
std::size_t accepted_count(const std::vector<AugmentationRecord>& records, double threshold);

}  // namespace hsd
