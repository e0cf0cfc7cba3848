// Reference adapters that delegate translation, embedding and training to an
// external model server (e.g. a Python sidecar wrapping HF checkpoints).
// Protocol (JSON over HTTP):
//   POST /v1/translate {"model", "text", "source", "target"} -> {"text"}
//   POST /v1/embed     {"model", "text", "pooling"}           -> {"vector": [..]}
//   GET  /v1/capabilities                                     -> {"heads": [..]}
//   POST /v1/train     {"spec", "config", "samples": [..]}    -> {"model"}
//   POST /v1/predict   {"model", "texts": [..]}               -> {"scores": [..]}
// Connection or protocol failures surface as TransportError.

#include <httplib.h>

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "core/augmentation.hpp"
#include "core/classifiers.hpp"
#include "core/embeddings.hpp"
#include "core/errors.hpp"

namespace hsd {

using nlohmann::json;

namespace {

struct HttpConfig {
    std::string base_url;
    std::string model;
    int timeout_s = 30;
};

HttpConfig http_config_from(const json& cfg) {
    HttpConfig c;
    if (!cfg.contains("base_url")) {
        throw ValidationError("http backend config requires 'base_url'");
    }
    c.base_url = cfg.at("base_url").get<std::string>();
    c.model = cfg.value("model", "");
    c.timeout_s = cfg.value("timeout_s", 30);
    return c;
}

json post_json(const HttpConfig& cfg, const std::string& path, const json& body) {
    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout_s, 0);
    client.set_read_timeout(cfg.timeout_s, 0);
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
        throw TransportError("http backend unreachable at " + cfg.base_url + path + " (" +
                             httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw TransportError("http backend " + cfg.base_url + path + " returned status " +
                             std::to_string(res->status) + ": " + res->body);
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw TransportError("http backend " + path + ": invalid JSON response: " + e.what());
    }
}

json get_json(const HttpConfig& cfg, const std::string& path) {
    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout_s, 0);
    client.set_read_timeout(cfg.timeout_s, 0);
    auto res = client.Get(path);
    if (!res) {
        throw TransportError("http backend unreachable at " + cfg.base_url + path + " (" +
                             httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw TransportError("http backend " + cfg.base_url + path + " returned status " +
                             std::to_string(res->status) + ": " + res->body);
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw TransportError("http backend " + path + ": invalid JSON response: " + e.what());
    }
}

// ---------------------------------------------------------------------------

class HttpTranslator : public TranslatorBackend {
public:
    HttpTranslator(HttpConfig cfg, std::string pivot)
        : cfg_(std::move(cfg)), pivot_(std::move(pivot)) {}

    std::string name() const override { return "http:" + cfg_.model; }
    std::string pivot() const override { return pivot_; }
    // One client per request; calls are independent.
    bool reentrant() const override { return true; }

    std::string translate(std::string_view input, const std::string& source_lang,
                          const std::string& target_lang) override {
        json body{{"model", cfg_.model},
                  {"text", std::string(input)},
                  {"source", source_lang},
                  {"target", target_lang}};
        json res = post_json(cfg_, "/v1/translate", body);
        if (!res.contains("text") || !res["text"].is_string()) {
            throw TransportError("http translator: response lacks 'text'");
        }
        return res["text"].get<std::string>();
    }

private:
    HttpConfig cfg_;
    std::string pivot_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(HttpConfig cfg, std::size_t dim, Pooling pooling)
        : cfg_(std::move(cfg)), dim_(dim), pooling_(pooling) {}

    std::string name() const override { return "http:" + cfg_.model; }
    std::size_t dim() const override { return dim_; }
    Pooling pooling() const override { return pooling_; }
    bool reentrant() const override { return true; }

    EmbeddingVector embed(std::string_view input) override {
        if (input.empty()) throw ValidationError("embed: text must be non-empty");
        json body{{"model", cfg_.model},
                  {"text", std::string(input)},
                  {"pooling", to_string(pooling_)}};
        json res = post_json(cfg_, "/v1/embed", body);
        if (!res.contains("vector") || !res["vector"].is_array()) {
            throw TransportError("http embedder: response lacks 'vector'");
        }
        auto v = res["vector"].get<EmbeddingVector>();
        if (v.size() != dim_) {
            throw TransportError("http embedder: expected dim " + std::to_string(dim_) +
                                 ", got " + std::to_string(v.size()));
        }
        return v;
    }

private:
    HttpConfig cfg_;
    std::size_t dim_;
    Pooling pooling_;
};

class HttpModelState : public ModelState {
public:
    HttpModelState(HttpConfig cfg, std::string handle)
        : cfg_(std::move(cfg)), handle_(std::move(handle)) {}

    double score(std::string_view txt) const override {
        return score_batch({std::string(txt)}).front();
    }

    std::vector<double> score_batch(const std::vector<std::string>& texts) const override {
        json body{{"model", handle_}, {"texts", texts}};
        json res = post_json(cfg_, "/v1/predict", body);
        if (!res.contains("scores") || !res["scores"].is_array()) {
            throw TransportError("http trainer: predict response lacks 'scores'");
        }
        auto scores = res["scores"].get<std::vector<double>>();
        if (scores.size() != texts.size()) {
            throw TransportError("http trainer: score count mismatch");
        }
        return scores;
    }

    json serialize() const override {
        return json{{"type", "http"}, {"model", handle_}, {"base_url", cfg_.base_url}};
    }

private:
    HttpConfig cfg_;
    std::string handle_;
};

class HttpTrainingBackend : public TrainingBackend {
public:
    HttpTrainingBackend(HttpConfig cfg, json checkpoints)
        : cfg_(std::move(cfg)), checkpoints_(std::move(checkpoints)) {}

    std::string name() const override { return "http"; }

    bool supports(Head head) const override {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!heads_) {
            json res = get_json(cfg_, "/v1/capabilities");
            if (!res.contains("heads") || !res["heads"].is_array()) {
                throw TransportError("http trainer: capabilities response lacks 'heads'");
            }
            heads_ = res["heads"].get<std::vector<std::string>>();
        }
        const std::string want = to_string(head);
        for (const auto& h : *heads_) {
            if (h == want) return true;
        }
        return false;
    }

    std::shared_ptr<const ModelState> fit(const ModelSpec& spec, const Corpus& corpus,
                                          const ResolvedTrainingConfig& cfg) override {
        json samples = json::array();
        for (const Sample& s : corpus.samples()) {
            samples.push_back({{"id", s.id}, {"text", s.text}, {"label", *s.label}});
        }
        json spec_json = spec.to_json();
        // Resolve the encoder slot to a concrete checkpoint when configured.
        if (checkpoints_.contains(spec.encoder)) {
            spec_json["checkpoint"] = checkpoints_.at(spec.encoder);
        }
        json body{{"spec", spec_json}, {"config", cfg.to_json()}, {"samples", samples}};
        json res = post_json(cfg_, "/v1/train", body);
        if (!res.contains("model") || !res["model"].is_string()) {
            throw TransportError("http trainer: train response lacks 'model'");
        }
        return std::make_shared<HttpModelState>(cfg_, res["model"].get<std::string>());
    }

    std::shared_ptr<const ModelState> restore(const json& state) override {
        if (state.value("type", "") != "http") {
            throw ValidationError("http backend cannot restore state of type '" +
                                  state.value("type", "?") + "'");
        }
        return std::make_shared<HttpModelState>(cfg_, state.at("model").get<std::string>());
    }

private:
    HttpConfig cfg_;
    json checkpoints_;
    mutable std::mutex mutex_;
    mutable std::optional<std::vector<std::string>> heads_;
};

}  // namespace

std::unique_ptr<TranslatorBackend> make_http_translator(const json& cfg) {
    return std::make_unique<HttpTranslator>(http_config_from(cfg), cfg.value("pivot", "en"));
}

std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(const json& cfg) {
    if (!cfg.contains("dim")) {
        throw ValidationError("http embedder config requires 'dim'");
    }
    return std::make_unique<HttpEmbeddingProvider>(
        http_config_from(cfg), cfg.at("dim").get<std::size_t>(),
        pooling_from_string(cfg.value("pooling", "mean")));
}

std::unique_ptr<TrainingBackend> make_http_training_backend(const json& cfg) {
    return std::make_unique<HttpTrainingBackend>(http_config_from(cfg),
                                                 cfg.value("checkpoints", json::object()));
}

}  // namespace hsd
