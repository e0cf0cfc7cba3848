#include "core/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "core/errors.hpp"
#include "core/log.hpp"
#include "core/text.hpp"

namespace hsd {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Head h) {
    switch (h) {
        case Head::native: return "native";
        case Head::tabnet: return "tabnet";
        case Head::lstm_cnn_fc: return "lstm_cnn_fc";
        case Head::logistic_regression: return "logistic_regression";
        case Head::lstm_fc: return "lstm_fc";
    }
    return "?";
}

std::string to_string(EmbeddingSource s) {
    return s == EmbeddingSource::self ? "self" : "static-vectors";
}

Head head_from_string(const std::string& s) {
    if (s == "native") return Head::native;
    if (s == "tabnet") return Head::tabnet;
    if (s == "lstm_cnn_fc") return Head::lstm_cnn_fc;
    if (s == "logistic_regression") return Head::logistic_regression;
    if (s == "lstm_fc") return Head::lstm_fc;
    throw ValidationError("unknown head '" + s + "'");
}

EmbeddingSource embedding_source_from_string(const std::string& s) {
    if (s == "self") return EmbeddingSource::self;
    if (s == "static-vectors") return EmbeddingSource::static_vectors;
    throw ValidationError("unknown embedding source '" + s + "'");
}

void ModelSpec::validate() const {
    if (id.empty()) throw ValidationError("model spec: id must be non-empty");
    if (encoder.empty()) throw ValidationError("model spec '" + id + "': encoder must be non-empty");
    if (embedding_source == EmbeddingSource::static_vectors && head != Head::lstm_fc) {
        throw ValidationError("model spec '" + id +
                              "': static-vectors embeddings pair only with the lstm_fc head");
    }
}

json ModelSpec::to_json() const {
    json j;
    j["id"] = id;
    j["encoder"] = encoder;
    j["embedding_source"] = to_string(embedding_source);
    j["head"] = to_string(head);
    j["trainable_encoder"] = trainable_encoder;
    j["from_registry"] = from_registry;
    j["head_params"] = {{"hidden", head_params.hidden},
                        {"conv_kernel", head_params.conv_kernel},
                        {"dropout", head_params.dropout}};
    return j;
}

ModelSpec ModelSpec::from_json(const json& j) {
    ModelSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.encoder = j.at("encoder").get<std::string>();
    spec.embedding_source = embedding_source_from_string(j.value("embedding_source", "self"));
    spec.head = head_from_string(j.value("head", "native"));
    spec.trainable_encoder = j.value("trainable_encoder", true);
    spec.from_registry = j.value("from_registry", false);
    if (j.contains("head_params")) {
        const auto& hp = j.at("head_params");
        spec.head_params.hidden = hp.value("hidden", 256);
        spec.head_params.conv_kernel = hp.value("conv_kernel", 3);
        spec.head_params.dropout = hp.value("dropout", 0.1);
    }
    spec.validate();
    return spec;
}

const std::vector<ModelSpec>& registry() {
    static const std::vector<ModelSpec> specs = [] {
        auto row = [](std::string id, std::string encoder, EmbeddingSource src, Head head,
                      bool trainable) {
            ModelSpec s;
            s.id = std::move(id);
            s.encoder = std::move(encoder);
            s.embedding_source = src;
            s.head = head;
            s.trainable_encoder = trainable;
            s.from_registry = true;
            s.validate();
            return s;
        };
        std::vector<ModelSpec> r;
        r.push_back(row("M1", "muril-abusive", EmbeddingSource::self, Head::native, true));
        r.push_back(row("M2", "muril", EmbeddingSource::self, Head::tabnet, true));
        r.push_back(row("M3", "muril", EmbeddingSource::self, Head::native, true));
        r.push_back(row("M4", "indicbert", EmbeddingSource::self, Head::native, true));
        r.push_back(row("M5", "indicbert", EmbeddingSource::self, Head::lstm_cnn_fc, true));
        r.push_back(row("M6", "xlm-roberta", EmbeddingSource::self, Head::logistic_regression,
                        false));
        r.push_back(row("M7", "xlm-roberta", EmbeddingSource::self, Head::native, true));
        r.push_back(row("M8", "fasttext-hi-ne", EmbeddingSource::static_vectors, Head::lstm_fc,
                        false));
        return r;
    }();
    return specs;
}

ModelSpec spec_for(const std::string& id) {
    for (const auto& spec : registry()) {
        if (spec.id == id) return spec;
    }
    throw ValidationError("unknown model id '" + id + "' (registry has M1..M8)");
}

TrainingConfig TrainingConfig::from_json(const json& j) {
    TrainingConfig cfg;
    if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
    if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
    if (j.contains("max_sequence_length")) {
        cfg.max_sequence_length = j.at("max_sequence_length").get<int>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::int64_t>();
    return cfg;
}

json ResolvedTrainingConfig::to_json() const {
    json j;
    j["learning_rate"] = learning_rate;
    j["batch_size"] = batch_size;
    j["epochs"] = epochs;
    j["max_sequence_length"] = max_sequence_length;
    j["seed"] = seed;
    return j;
}

ResolvedTrainingConfig resolve(const TrainingConfig& cfg) {
    ResolvedTrainingConfig r;
    r.learning_rate = cfg.learning_rate.value_or(2e-5);
    r.batch_size = cfg.batch_size.value_or(16);
    if (!cfg.epochs) {
        throw ValidationError("training config: epochs is required (no default)");
    }
    r.epochs = *cfg.epochs;
    r.max_sequence_length = cfg.max_sequence_length.value_or(128);
    r.seed = cfg.seed.value_or(0);
    if (r.learning_rate <= 0) throw ValidationError("training config: learning_rate must be > 0");
    if (r.batch_size <= 0) throw ValidationError("training config: batch_size must be > 0");
    if (r.epochs <= 0) throw ValidationError("training config: epochs must be > 0");
    if (r.max_sequence_length <= 0) {
        throw ValidationError("training config: max_sequence_length must be > 0");
    }
    log::event(json{{"event", "training_config_resolved"}, {"config", r.to_json()}}.dump());
    return r;
}

std::vector<double> ModelState::score_batch(const std::vector<std::string>& texts) const {
    std::vector<double> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(score(t));
    return out;
}

// ---------------------------------------------------------------------------
// Mock backend: hashed bag-of-words logistic regression with seeded SGD.

namespace {

constexpr std::size_t kMockDims = 4096;
// The mock's model family needs a much larger step than a transformer
// fine-tune: the default 2e-5 maps to 0.5. The configured learning rate
// still scales the effective step (and the fingerprint).
constexpr double kMockLrScale = 25000.0;

std::map<std::size_t, double> bow_features(std::string_view txt, std::uint64_t salt, int msl) {
    auto tokens = text::tokenize(txt);
    if (tokens.size() > static_cast<std::size_t>(msl)) {
        tokens.resize(static_cast<std::size_t>(msl));
    }
    std::map<std::size_t, double> x;
    if (tokens.empty()) return x;
    for (auto t : tokens) {
        x[static_cast<std::size_t>(text::mix(text::fnv1a(t) ^ salt) % kMockDims)] += 1.0;
    }
    for (auto& [i, v] : x) v /= static_cast<double>(tokens.size());
    return x;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

class MockLogRegState : public ModelState {
public:
    MockLogRegState(std::uint64_t salt, int msl, std::vector<double> weights, double bias)
        : salt_(salt), msl_(msl), weights_(std::move(weights)), bias_(bias) {}

    double score(std::string_view txt) const override {
        double z = bias_;
        for (const auto& [i, v] : bow_features(txt, salt_, msl_)) {
            z += weights_[i] * v;
        }
        return sigmoid(z);
    }

    json serialize() const override {
        json idx = json::array();
        json val = json::array();
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            if (weights_[i] != 0.0) {
                idx.push_back(i);
                val.push_back(weights_[i]);
            }
        }
        char salt_hex[17];
        std::snprintf(salt_hex, sizeof(salt_hex), "%016llx",
                      static_cast<unsigned long long>(salt_));
        return json{{"type", "mock-logreg"}, {"dims", kMockDims},     {"salt", salt_hex},
                    {"msl", msl_},           {"bias", bias_},         {"idx", idx},
                    {"val", val}};
    }

    static std::shared_ptr<const ModelState> deserialize(const json& j) {
        std::vector<double> w(j.at("dims").get<std::size_t>(), 0.0);
        const auto& idx = j.at("idx");
        const auto& val = j.at("val");
        for (std::size_t k = 0; k < idx.size(); ++k) {
            w.at(idx[k].get<std::size_t>()) = val[k].get<double>();
        }
        std::uint64_t salt = std::stoull(j.at("salt").get<std::string>(), nullptr, 16);
        return std::make_shared<MockLogRegState>(salt, j.at("msl").get<int>(), std::move(w),
                                                 j.at("bias").get<double>());
    }

private:
    std::uint64_t salt_;
    int msl_;
    std::vector<double> weights_;
    double bias_;
};

}  // namespace

std::shared_ptr<const ModelState> MockTrainingBackend::fit(const ModelSpec& spec,
                                                           const Corpus& corpus,
                                                           const ResolvedTrainingConfig& cfg) {
    std::uint64_t salt = text::mix(text::fnv1a(spec.id) ^ text::mix(text::fnv1a(spec.encoder)) ^
                                   text::fnv1a(to_string(spec.head)) ^
                                   text::mix(static_cast<std::uint64_t>(cfg.seed)));
    const auto& samples = corpus.samples();
    std::vector<std::map<std::size_t, double>> feats;
    std::vector<double> labels;
    feats.reserve(samples.size());
    for (const Sample& s : samples) {
        feats.push_back(bow_features(s.text, salt, cfg.max_sequence_length));
        labels.push_back(static_cast<double>(*s.label));
    }

    std::vector<double> w(kMockDims, 0.0);
    double b = 0.0;
    const double lr = cfg.learning_rate * kMockLrScale;
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(salt ^ 0x5eedu);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::map<std::size_t, double> grad;
            double grad_b = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto& x = feats[order[k]];
                double z = b;
                for (const auto& [i, v] : x) z += w[i] * v;
                double g = sigmoid(z) - labels[order[k]];
                for (const auto& [i, v] : x) grad[i] += g * v;
                grad_b += g;
            }
            double scale = lr / static_cast<double>(end - start);
            for (const auto& [i, g] : grad) w[i] -= scale * g;
            b -= scale * grad_b;
        }
    }
    return std::make_shared<MockLogRegState>(salt, cfg.max_sequence_length, std::move(w), b);
}

std::shared_ptr<const ModelState> MockTrainingBackend::restore(const json& state) {
    if (state.value("type", "") != "mock-logreg") {
        throw ValidationError("mock backend cannot restore state of type '" +
                              state.value("type", "?") + "'");
    }
    return MockLogRegState::deserialize(state);
}

// ---------------------------------------------------------------------------
// Lexicon backend

namespace {

class LexiconState : public ModelState {
public:
    explicit LexiconState(std::vector<std::string> markers) : markers_(std::move(markers)) {}

    double score(std::string_view txt) const override {
        for (auto tok : text::tokenize(txt)) {
            for (const auto& m : markers_) {
                if (tok == m) return 1.0;
            }
        }
        return 0.0;
    }

    json serialize() const override { return json{{"type", "lexicon"}, {"markers", markers_}}; }

private:
    std::vector<std::string> markers_;
};

}  // namespace

LexiconBackend::LexiconBackend(std::vector<std::string> markers) : markers_(std::move(markers)) {
    if (markers_.empty()) throw ValidationError("lexicon backend: marker list must be non-empty");
}

std::shared_ptr<const ModelState> LexiconBackend::fit(const ModelSpec&, const Corpus&,
                                                      const ResolvedTrainingConfig&) {
    return std::make_shared<LexiconState>(markers_);
}

std::shared_ptr<const ModelState> LexiconBackend::restore(const json& state) {
    if (state.value("type", "") != "lexicon") {
        throw ValidationError("lexicon backend cannot restore state of type '" +
                              state.value("type", "?") + "'");
    }
    return std::make_shared<LexiconState>(state.at("markers").get<std::vector<std::string>>());
}

std::unique_ptr<TrainingBackend> make_http_training_backend(const json& cfg);  // backends_http.cpp

std::unique_ptr<TrainingBackend> make_training_backend(const json& cfg) {
    if (!cfg.is_object() || !cfg.contains("name")) {
        throw ValidationError("trainer config must be an object with a 'name'");
    }
    std::string name = cfg.at("name").get<std::string>();
    if (name == "mock") return std::make_unique<MockTrainingBackend>();
    if (name == "lexicon") {
        std::vector<std::string> markers = {"#hate"};
        if (cfg.contains("markers")) markers = cfg.at("markers").get<std::vector<std::string>>();
        return std::make_unique<LexiconBackend>(std::move(markers));
    }
    if (name == "http") return make_http_training_backend(cfg);
    throw ValidationError("unknown training backend '" + name + "'");
}

// ---------------------------------------------------------------------------
// train / predict

namespace {

std::string fmt_double(double d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

std::string fingerprint_of(const ModelSpec& spec, const ResolvedTrainingConfig& cfg,
                           const std::string& backend, const Corpus& corpus) {
    std::string canon = spec.id + "|" + spec.encoder + "|" + to_string(spec.head) + "|" +
                        to_string(spec.embedding_source) + "|" +
                        (spec.trainable_encoder ? "t" : "f") + "|" + fmt_double(cfg.learning_rate) +
                        "|" + std::to_string(cfg.batch_size) + "|" + std::to_string(cfg.epochs) +
                        "|" + std::to_string(cfg.max_sequence_length) + "|" +
                        std::to_string(cfg.seed) + "|" + backend + "|ids:";
    for (const Sample& s : corpus.samples()) {
        canon += std::to_string(s.id);
        canon += ',';
    }
    return text::content_hash_hex(canon);
}

}  // namespace

json TrainedModel::metadata() const {
    json j;
    j["spec"] = spec.to_json();
    j["config"] = config.to_json();
    j["backend"] = backend;
    j["fingerprint"] = fingerprint;
    return j;
}

TrainedModel train(const ModelSpec& spec, const Corpus& corpus, const TrainingConfig& cfg,
                   TrainingBackend& backend) {
    spec.validate();
    if (corpus.empty()) {
        throw ValidationError("train: corpus is empty");
    }
    if (!corpus.labeled()) {
        throw ValidationError("train: corpus must be fully labeled");
    }
    if (!backend.supports(spec.head)) {
        throw CapabilityError("backend '" + backend.name() + "' does not support head '" +
                              to_string(spec.head) + "' (model " + spec.id + ")");
    }
    TrainedModel model;
    model.spec = spec;
    model.config = resolve(cfg);
    model.backend = backend.name();
    model.state = backend.fit(spec, corpus, model.config);
    model.fingerprint = fingerprint_of(spec, model.config, backend.name(), corpus);
    log::event(json{{"event", "train"},
                    {"model", spec.id},
                    {"backend", backend.name()},
                    {"samples", corpus.size()},
                    {"fingerprint", model.fingerprint}}
                   .dump());
    return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write model file: " + path.string());
    json j;
    j["metadata"] = model.metadata();
    j["state"] = model.state->serialize();
    out << j.dump(2) << "\n";
    if (!out) throw ValidationError("write failed: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path, TrainingBackend& backend) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open model file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": invalid model file: " + e.what());
    }
    const auto& meta = j.at("metadata");
    TrainedModel model;
    model.spec = ModelSpec::from_json(meta.at("spec"));
    const auto& c = meta.at("config");
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.batch_size = c.at("batch_size").get<int>();
    model.config.epochs = c.at("epochs").get<int>();
    model.config.max_sequence_length = c.at("max_sequence_length").get<int>();
    model.config.seed = c.at("seed").get<std::int64_t>();
    model.backend = meta.at("backend").get<std::string>();
    model.fingerprint = meta.at("fingerprint").get<std::string>();
    if (model.backend != backend.name()) {
        throw ValidationError("model file " + path.string() + " was trained with backend '" +
                              model.backend + "', not '" + backend.name() + "'");
    }
    model.state = backend.restore(j.at("state"));
    return model;
}

// ---------------------------------------------------------------------------
// PredictionSet

void PredictionSet::insert(std::uint64_t id, int prediction) {
    if (prediction != 0 && prediction != 1) {
        throw ValidationError("prediction for id " + std::to_string(id) + " must be 0 or 1, got " +
                              std::to_string(prediction));
    }
    if (!predictions_.emplace(id, prediction).second) {
        throw ValidationError("prediction for id " + std::to_string(id) + " already present");
    }
}

void PredictionSet::insert(std::uint64_t id, int prediction, double score) {
    if (score < 0.0 || score > 1.0 || !std::isfinite(score)) {
        throw ValidationError("score for id " + std::to_string(id) + " must be in [0, 1]");
    }
    int implied = score > 0.5 ? 1 : 0;
    if (prediction != implied) {
        throw ValidationError("prediction " + std::to_string(prediction) + " for id " +
                              std::to_string(id) + " contradicts score " + fmt_double(score) +
                              " under the 0.5 decision rule");
    }
    insert(id, prediction);
    scores_[id] = score;
}

void PredictionSet::annotate_branch(std::uint64_t id, const std::string& branch) {
    if (!predictions_.count(id)) {
        throw ValidationError("cannot annotate branch for unknown id " + std::to_string(id));
    }
    branches_[id] = branch;
}

std::optional<double> PredictionSet::score(std::uint64_t id) const {
    auto it = scores_.find(id);
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> PredictionSet::branch(std::uint64_t id) const {
    auto it = branches_.find(id);
    if (it == branches_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::uint64_t> PredictionSet::ids() const {
    std::vector<std::uint64_t> out;
    out.reserve(predictions_.size());
    for (const auto& [id, _] : predictions_) out.push_back(id);
    return out;
}

PredictionSet predict(const TrainedModel& model, const Corpus& corpus) {
    if (corpus.empty()) {
        throw ValidationError("predict: corpus is empty");
    }
    const auto msl = static_cast<std::size_t>(model.config.max_sequence_length);
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    std::size_t truncated = 0;
    for (const Sample& s : corpus.samples()) {
        auto tokens = text::tokenize(s.text);
        if (tokens.size() > msl) {
            ++truncated;
            std::string t;
            for (std::size_t i = 0; i < msl; ++i) {
                if (i) t += ' ';
                t += tokens[i];
            }
            texts.push_back(std::move(t));
        } else {
            texts.push_back(s.text);
        }
    }
    std::vector<double> scores = model.state->score_batch(texts);
    if (scores.size() != corpus.size()) {
        throw TransportError("backend returned " + std::to_string(scores.size()) +
                             " scores for " + std::to_string(corpus.size()) + " samples");
    }
    PredictionSet set(model.spec.id);
    std::size_t i = 0;
    for (const Sample& s : corpus.samples()) {
        double sc = scores[i++];
        set.insert(s.id, sc > 0.5 ? 1 : 0, sc);
    }
    if (truncated > 0) {
        log::event(json{{"event", "truncation"},
                        {"model", model.spec.id},
                        {"max_sequence_length", model.config.max_sequence_length},
                        {"samples_truncated", truncated}}
                       .dump());
    }
    return set;
}

void save_predictions(const PredictionSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write predictions: " + path.string());
    for (const auto& [id, pred] : set.predictions()) {
        ordered_json obj;
        obj["index"] = id;
        obj["prediction"] = pred;
        if (auto br = set.branch(id)) obj["branch"] = *br;
        out << obj.dump() << '\n';
    }
    if (!out) throw ValidationError("write failed: " + path.string());
}

PredictionSet load_predictions(const std::filesystem::path& path, const std::string& model_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open predictions: " + path.string());
    PredictionSet set(model_id.empty() ? path.stem().string() : model_id);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string where = path.filename().string() + " line " + std::to_string(lineno);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(where + ": invalid JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("index") || !obj.contains("prediction")) {
            throw ValidationError(where + ": expected {\"index\": ..., \"prediction\": ...}");
        }
        bool id_ok = obj["index"].is_number_unsigned() ||
                     (obj["index"].is_number_integer() && obj["index"].get<long long>() >= 0);
        if (!id_ok) {
            throw ValidationError(where + ": 'index' must be a non-negative integer");
        }
        if (!obj["prediction"].is_number_integer()) {
            throw ValidationError(where + ": 'prediction' must be an integer");
        }
        std::uint64_t id = obj["index"].get<std::uint64_t>();
        int pred = obj["prediction"].get<int>();
        try {
            set.insert(id, pred);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (obj.contains("branch")) {
            set.annotate_branch(id, obj["branch"].get<std::string>());
        }
    }
    return set;
}

}  // namespace hsd
