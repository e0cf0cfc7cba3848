#include "core/augmentation.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "core/errors.hpp"
#include "core/log.hpp"
#include "core/text.hpp"

namespace hsd {

using nlohmann::json;

// ---------------------------------------------------------------------------
// MockTranslator

MockTranslator::MockTranslator(std::uint64_t seed, std::string pivot)
    : salt_(text::mix(seed ^ 0x6d6f636b74726eull)), pivot_(std::move(pivot)) {}

std::string MockTranslator::translate(std::string_view input, const std::string& source_lang,
                                      const std::string& target_lang) {
    static const char* kFillers[] = {"वाला", "भयो", "छ", "है", "था", "गर्ने", "करना", "हुन्छ"};
    constexpr std::size_t kFillerCount = sizeof(kFillers) / sizeof(kFillers[0]);

    std::uint64_t h = text::mix(text::fnv1a(input) ^ text::mix(text::fnv1a(source_lang)) ^
                                text::fnv1a(target_lang) ^ salt_);
    auto views = text::tokenize(input);
    std::vector<std::string> tokens(views.begin(), views.end());
    if (tokens.size() < 2) {
        if (h % 2 == 0) return std::string(input);
        return std::string(input) + " " + kFillers[(h >> 8) % kFillerCount];
    }
    std::uint64_t pick = (h >> 8);
    switch (h % 3) {
        case 0: {  // adjacent swap: same token multiset
            std::size_t p = pick % (tokens.size() - 1);
            std::swap(tokens[p], tokens[p + 1]);
            break;
        }
        case 1: {  // duplicate one token
            std::size_t p = pick % tokens.size();
            tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(p), tokens[p]);
            break;
        }
        default: {  // substitute a filler word
            std::size_t p = pick % tokens.size();
            tokens[p] = kFillers[(pick >> 16) % kFillerCount];
            break;
        }
    }
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::unique_ptr<TranslatorBackend> make_http_translator(const json& cfg);  // backends_http.cpp

std::unique_ptr<TranslatorBackend> make_translator(const json& cfg) {
    if (!cfg.is_object() || !cfg.contains("name")) {
        throw ValidationError("translator config must be an object with a 'name'");
    }
    std::string name = cfg.at("name").get<std::string>();
    std::string pivot = cfg.value("pivot", "en");
    if (name == "identity") return std::make_unique<IdentityTranslator>(pivot);
    if (name == "mock") return std::make_unique<MockTranslator>(cfg.value("seed", std::uint64_t{0}), pivot);
    if (name == "http") return make_http_translator(cfg);
    throw ValidationError("unknown translator '" + name + "'");
}

// ---------------------------------------------------------------------------
// Config

std::string to_string(DuplicateScope s) {
    return s == DuplicateScope::original_only ? "original_only" : "all_positives";
}

DuplicateScope duplicate_scope_from_string(const std::string& s) {
    if (s == "original_only") return DuplicateScope::original_only;
    if (s == "all_positives") return DuplicateScope::all_positives;
    throw ValidationError("unknown duplicate_scope '" + s + "'");
}

void AugmentationConfig::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ValidationError("augmentation threshold must be in (0, 1), got " +
                              std::to_string(threshold));
    }
    if (pivot.empty()) {
        throw ValidationError("augmentation pivot language must be non-empty");
    }
}

AugmentationConfig AugmentationConfig::from_json(const json& j) {
    AugmentationConfig cfg;
    cfg.threshold = j.value("threshold", 0.9);
    cfg.pivot = j.value("pivot", "en");
    if (j.contains("languages_to_augment")) {
        for (const auto& l : j.at("languages_to_augment")) {
            cfg.languages_to_augment.insert(l.get<std::string>());
        }
    }
    cfg.duplicate_minority = j.value("duplicate_minority", true);
    cfg.duplicate_scope = duplicate_scope_from_string(j.value("duplicate_scope", "original_only"));
    cfg.provider = j.value("provider", "");
    cfg.translator = j.value("translator", "");
    cfg.validate();
    return cfg;
}

json AugmentationConfig::to_json() const {
    json j;
    j["threshold"] = threshold;
    j["pivot"] = pivot;
    j["languages_to_augment"] = languages_to_augment;
    j["duplicate_minority"] = duplicate_minority;
    j["duplicate_scope"] = to_string(duplicate_scope);
    j["provider"] = provider;
    j["translator"] = translator;
    return j;
}

// ---------------------------------------------------------------------------
// Operations

std::string backtranslate(TranslatorBackend& translator, std::string_view input,
                          const std::string& source_lang) {
    const std::string pivot = translator.pivot();
    if (source_lang == pivot) {
        throw ValidationError("backtranslate: source language '" + source_lang +
                              "' equals the pivot language");
    }
    std::string intermediate = translator.translate(input, source_lang, pivot);
    if (intermediate.empty()) {
        throw AugmentationFailure("empty translation " + source_lang + "->" + pivot);
    }
    std::string out = translator.translate(intermediate, pivot, source_lang);
    if (out.empty()) {
        throw AugmentationFailure("empty translation " + pivot + "->" + source_lang);
    }
    return out;
}

AugmentationRecord gate(EmbeddingProvider& provider, std::string_view original,
                        std::string_view augmented, const AugmentationConfig& cfg,
                        std::uint64_t source_id) {
    if (original.empty() || augmented.empty()) {
        throw ValidationError("gate: texts must be non-empty");
    }
    cfg.validate();
    EmbeddingVector a = provider.embed(original);
    EmbeddingVector b = provider.embed(augmented);
    AugmentationRecord rec;
    rec.source_id = source_id;
    rec.augmented_text = std::string(augmented);
    rec.similarity = cosine_similarity(a, b);
    rec.accepted = gate_decision(rec.similarity, cfg.threshold);
    return rec;
}

Corpus duplicate_minority(const Corpus& corpus, DuplicateScope scope) {
    if (!corpus.labeled()) {
        throw ValidationError("duplicate_minority: corpus must be fully labeled");
    }
    std::vector<Sample> out = corpus.samples();
    std::uint64_t next_id = corpus.max_id() ? *corpus.max_id() + 1 : 0;
    for (const Sample& s : corpus.samples()) {
        if (s.label != 1) continue;
        if (scope == DuplicateScope::original_only && s.origin != Origin::original) continue;
        Sample dup = s;
        dup.id = next_id++;
        dup.origin = Origin::duplicated;
        out.push_back(std::move(dup));
    }
    return Corpus(corpus.split(), std::move(out));
}

namespace {

struct CandidateOutcome {
    bool failed = false;
    std::string failure;
    AugmentationRecord record;
};

}  // namespace

AugmentationResult augment(const Corpus& corpus, const AugmentationConfig& cfg,
                           TranslatorBackend& translator, EmbeddingProvider& provider) {
    cfg.validate();
    if (!corpus.labeled()) {
        throw ValidationError("augment: corpus must be fully labeled");
    }

    std::vector<const Sample*> candidates;
    for (const Sample& s : corpus.samples()) {
        if (s.label == 1 && s.lang && cfg.languages_to_augment.count(*s.lang)) {
            candidates.push_back(&s);
        }
    }

    std::vector<CandidateOutcome> outcomes(candidates.size());
    auto process = [&](std::size_t i) {
        const Sample& s = *candidates[i];
        try {
            std::string augmented = backtranslate(translator, s.text, *s.lang);
            outcomes[i].record = gate(provider, s.text, augmented, cfg, s.id);
        } catch (const AugmentationFailure& e) {
            outcomes[i].failed = true;
            outcomes[i].failure = e.what();
        } catch (const TransportError& e) {
            outcomes[i].failed = true;
            outcomes[i].failure = e.what();
        }
    };

    // Candidates are independent; run them in parallel when both backends are
    // reentrant and commit results in ascending source-id order below.
    bool parallel = translator.reentrant() && provider.reentrant() && candidates.size() > 1;
    if (parallel) {
        unsigned n_threads = std::min<unsigned>(std::thread::hardware_concurrency(),
                                                static_cast<unsigned>(candidates.size()));
        if (n_threads < 2) {
            parallel = false;
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            pool.reserve(n_threads);
            for (unsigned t = 0; t < n_threads; ++t) {
                pool.emplace_back([&]() {
                    for (std::size_t i = next.fetch_add(1); i < candidates.size();
                         i = next.fetch_add(1)) {
                        process(i);
                    }
                });
            }
            for (auto& th : pool) th.join();
        }
    }
    if (!parallel) {
        for (std::size_t i = 0; i < candidates.size(); ++i) process(i);
    }

    AugmentationResult result{Corpus(corpus.split(), {}), {}, corpus.size(), 0, 0, 0, 0};
    std::vector<Sample> out = corpus.samples();
    std::uint64_t next_id = corpus.max_id() ? *corpus.max_id() + 1 : 0;

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Sample& src = *candidates[i];
        CandidateOutcome& oc = outcomes[i];
        if (oc.failed) {
            ++result.failed;
            log::event(json{{"event", "augmentation_candidate_failed"},
                            {"source_id", src.id},
                            {"reason", oc.failure}}
                           .dump());
            continue;
        }
        result.records.push_back(oc.record);
        if (oc.record.accepted) {
            ++result.accepted;
            out.push_back(make_sample(next_id++, oc.record.augmented_text, 1, src.lang,
                                      Origin::backtranslated));
        } else {
            ++result.rejected;
        }
    }

    if (!candidates.empty() && result.failed * 2 > candidates.size()) {
        throw TransportError("augmentation aborted: " + std::to_string(result.failed) + " of " +
                             std::to_string(candidates.size()) + " candidates failed (>50%)");
    }

    if (cfg.duplicate_minority) {
        std::vector<Sample> eligible;
        for (const Sample& s : out) {
            if (s.label != 1) continue;
            if (cfg.duplicate_scope == DuplicateScope::original_only &&
                s.origin != Origin::original) {
                continue;
            }
            eligible.push_back(s);
        }
        for (Sample dup : eligible) {
            dup.id = next_id++;
            dup.origin = Origin::duplicated;
            out.push_back(std::move(dup));
            ++result.duplicated;
        }
    }

    result.corpus = Corpus(corpus.split(), std::move(out));
    log::event(json{{"event", "augment"},
                    {"input", result.input_size},
                    {"candidates", candidates.size()},
                    {"accepted", result.accepted},
                    {"rejected", result.rejected},
                    {"failed", result.failed},
                    {"duplicated", result.duplicated},
                    {"output", result.corpus.size()}}
                   .dump());
    return result;
}

std::string audit_to_jsonl(const std::vector<AugmentationRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) {
        json obj;
        obj["source_id"] = r.source_id;
        obj["augmented_text"] = r.augmented_text;
        obj["similarity"] = r.similarity;
        obj["accepted"] = r.accepted;
        out << obj.dump() << '\n';
    }
    return out.str();
}

void write_audit_trail(const std::vector<AugmentationRecord>& records,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write audit trail: " + path.string());
    out << audit_to_jsonl(records);
    if (!out) throw ValidationError("write failed: " + path.string());
}

std::vector<AugmentationRecord> read_audit_trail(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open audit trail: " + path.string());
    std::vector<AugmentationRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("audit trail line " + std::to_string(lineno) + ": " + e.what());
        }
        AugmentationRecord r;
        r.source_id = obj.at("source_id").get<std::uint64_t>();
        r.augmented_text = obj.at("augmented_text").get<std::string>();
        r.similarity = obj.at("similarity").get<double>();
        r.accepted = obj.at("accepted").get<bool>();
        records.push_back(std::move(r));
    }
    return records;
}

std::size_t accepted_count(const std::vector<AugmentationRecord>& records, double threshold) {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(),
                      [&](const AugmentationRecord& r) { return gate_decision(r.similarity, threshold); }));
}

}  // namespace hsd
