#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/corpus.hpp"

namespace hsd {

enum class Head { native, tabnet, lstm_cnn_fc, logistic_regression, lstm_fc };
enum class EmbeddingSource { self, static_vectors };

std::string to_string(Head h);
std::string to_string(EmbeddingSource s);
Head head_from_string(const std::string& s);
EmbeddingSource embedding_source_from_string(const std::string& s);

// Head layer sizes are not part of the registry identity; these are the
// documented defaults any backend may realize.
struct HeadParams {
    int hidden = 256;
    int conv_kernel = 3;
    double dropout = 0.1;

    bool operator==(const HeadParams&) const = default;
};

// One model configuration: encoder checkpoint slot, where embeddings come
// from, and the classification head stacked on top. The concrete checkpoint
// behind a slot name is supplied by run config, never hardcoded here.
struct ModelSpec {
    std::string id;
    std::string encoder;
    EmbeddingSource embedding_source = EmbeddingSource::self;
    Head head = Head::native;
    bool trainable_encoder = true;
    bool from_registry = false;  // custom specs are allowed but flagged
    HeadParams head_params;

    std::string label() const { return encoder + "/" + to_string(head); }
    void validate() const;
    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

// The eight pre-registered configurations M1..M8.
const std::vector<ModelSpec>& registry();
ModelSpec spec_for(const std::string& id);

// User-facing knobs; anything unset resolves to the documented default.
// epochs has no default and must be provided.
struct TrainingConfig {
    std::optional<double> learning_rate;
    std::optional<int> batch_size;
    std::optional<int> epochs;
    std::optional<int> max_sequence_length;
    std::optional<std::int64_t> seed;

    static TrainingConfig from_json(const nlohmann::json& j);
};

struct ResolvedTrainingConfig {
    double learning_rate = 2e-5;
    int batch_size = 16;
    int epochs = 0;
    int max_sequence_length = 128;
    std::int64_t seed = 0;

    nlohmann::json to_json() const;
};

// Fills defaults, validates, and logs the fully resolved configuration.
ResolvedTrainingConfig resolve(const TrainingConfig& cfg);

// Opaque trained-model handle. score() maps text to [0, 1]; implementations
// must be deterministic for a fixed state.
class ModelState {
public:
    virtual ~ModelState() = default;
    virtual double score(std::string_view text) const = 0;
    virtual std::vector<double> score_batch(const std::vector<std::string>& texts) const;
    virtual nlohmann::json serialize() const = 0;
};

class TrainingBackend {
public:
    virtual ~TrainingBackend() = default;
    virtual std::string name() const = 0;
    virtual bool supports(Head head) const = 0;
    virtual std::shared_ptr<const ModelState> fit(const ModelSpec& spec, const Corpus& corpus,
                                                  const ResolvedTrainingConfig& cfg) = 0;
    virtual std::shared_ptr<const ModelState> restore(const nlohmann::json& state) = 0;
};

// Deterministic in-process trainer: hashed bag-of-words logistic regression,
// seeded SGD. Declares every head (it realizes them all with the same model
// family, which is enough to exercise each pipeline contract offline).
class MockTrainingBackend : public TrainingBackend {
public:
    std::string name() const override { return "mock"; }
    bool supports(Head) const override { return true; }
    std::shared_ptr<const ModelState> fit(const ModelSpec&, const Corpus&,
                                          const ResolvedTrainingConfig&) override;
    std::shared_ptr<const ModelState> restore(const nlohmann::json& state) override;
};

// Predicts 1 iff the text contains one of the marker tokens. Supports only
// the native head, which makes it the canonical capability-error fixture.
class LexiconBackend : public TrainingBackend {
public:
    explicit LexiconBackend(std::vector<std::string> markers);
    std::string name() const override { return "lexicon"; }
    bool supports(Head head) const override { return head == Head::native; }
    std::shared_ptr<const ModelState> fit(const ModelSpec&, const Corpus&,
                                          const ResolvedTrainingConfig&) override;
    std::shared_ptr<const ModelState> restore(const nlohmann::json& state) override;

private:
    std::vector<std::string> markers_;
};

// {"name": "mock"} | {"name": "lexicon", "markers": [...]}
// | {"name": "http", "base_url": "...", "checkpoints": {...}}
std::unique_ptr<TrainingBackend> make_training_backend(const nlohmann::json& cfg);

struct TrainedModel {
    ModelSpec spec;
    ResolvedTrainingConfig config;
    std::string backend;
    std::string fingerprint;  // binds spec + config + corpus ids
    std::shared_ptr<const ModelState> state;

    nlohmann::json metadata() const;
};

TrainedModel train(const ModelSpec& spec, const Corpus& corpus, const TrainingConfig& cfg,
                   TrainingBackend& backend);

// Serialized model (backend state + metadata) for later predict runs.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path, TrainingBackend& backend);

// Per-sample binary predictions from one model (or the ensemble), keyed by
// sample id. When scores are present, prediction == (score > 0.5) is enforced.
class PredictionSet {
public:
    explicit PredictionSet(std::string model_id) : model_id_(std::move(model_id)) {}

    void insert(std::uint64_t id, int prediction);
    void insert(std::uint64_t id, int prediction, double score);
    void annotate_branch(std::uint64_t id, const std::string& branch);

    const std::string& model_id() const { return model_id_; }
    const std::map<std::uint64_t, int>& predictions() const { return predictions_; }
    std::optional<double> score(std::uint64_t id) const;
    std::optional<std::string> branch(std::uint64_t id) const;
    bool has_scores() const { return !scores_.empty(); }
    bool has_branches() const { return !branches_.empty(); }
    std::size_t size() const { return predictions_.size(); }
    std::vector<std::uint64_t> ids() const;

private:
    std::string model_id_;
    std::map<std::uint64_t, int> predictions_;
    std::map<std::uint64_t, double> scores_;
    std::map<std::uint64_t, std::string> branches_;
};

PredictionSet predict(const TrainedModel& model, const Corpus& corpus);

// Submission format: one {"index": id, "prediction": 0|1} object per line,
// ascending index; ensemble files add a "branch" key.
void save_predictions(const PredictionSet& set, const std::filesystem::path& path);
PredictionSet load_predictions(const std::filesystem::path& path,
                               const std::string& model_id = "");

}  // namespace hsd
