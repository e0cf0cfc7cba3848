#include "hsd/hsd.h"

#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "core/augmentation.hpp"
#include "core/classifiers.hpp"
#include "core/corpus.hpp"
#include "core/embeddings.hpp"
#include "core/ensemble.hpp"
#include "core/errors.hpp"
#include "core/log.hpp"
#include "core/metrics.hpp"

using nlohmann::json;

struct hsd_corpus {
    hsd::Corpus value;
};

struct hsd_model {
    hsd::TrainedModel value;
};

struct hsd_predictions {
    hsd::PredictionSet value;
};

namespace {

thread_local std::string tl_error;

template <typename F>
hsd_status guarded(F&& f) noexcept {
    try {
        f();
        tl_error.clear();
        return HSD_OK;
    } catch (const hsd::ValidationError& e) {
        tl_error = e.what();
        return HSD_ERROR_VALIDATION;
    } catch (const hsd::AugmentationFailure& e) {
        tl_error = e.what();
        return HSD_ERROR_VALIDATION;
    } catch (const hsd::CapabilityError& e) {
        tl_error = e.what();
        return HSD_ERROR_BACKEND;
    } catch (const hsd::TransportError& e) {
        tl_error = e.what();
        return HSD_ERROR_BACKEND;
    } catch (const std::exception& e) {
        tl_error = e.what();
        return HSD_ERROR_INTERNAL;
    } catch (...) {
        tl_error = "unknown error";
        return HSD_ERROR_INTERNAL;
    }
}

char* alloc_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool cond, const char* msg) {
    if (!cond) throw hsd::ValidationError(msg);
}

json parse_json_arg(const char* arg, const char* what) {
    require(arg != nullptr, "missing JSON argument");
    try {
        return json::parse(arg);
    } catch (const json::exception& e) {
        throw hsd::ValidationError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

hsd::ModelSpec spec_from_arg(const char* spec) {
    require(spec != nullptr, "model spec is null");
    std::string s(spec);
    auto first = s.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && s[first] == '{') {
        return hsd::ModelSpec::from_json(parse_json_arg(spec, "model spec"));
    }
    return hsd::spec_for(s);
}

hsd::ReportRows rows_from_json_arg(const char* rows_json) {
    json j = parse_json_arg(rows_json, "report rows");
    require(j.is_object(), "report rows must be a JSON object keyed by model id");
    hsd::ReportRows rows;
    for (const auto& [id, row] : j.items()) {
        rows[id] = hsd::MetricsRow::from_json(row);
    }
    return rows;
}

}  // namespace

extern "C" {

const char* hsd_version(void) { return "0.1.0"; }

const char* hsd_last_error(void) { return tl_error.c_str(); }

void hsd_string_free(char* s) { delete[] s; }

void hsd_set_log_callback(hsd_log_callback cb, void* user_data) {
    if (cb == nullptr) {
        hsd::log::set_sink(nullptr);
    } else {
        hsd::log::set_sink([cb, user_data](const std::string& line) { cb(line.c_str(), user_data); });
    }
}

/* ---- corpus ------------------------------------------------------------ */

hsd_status hsd_corpus_ingest(const char* path, const char* format, const char* split,
                             hsd_corpus** out) {
    return guarded([&] {
        require(path && format && split && out, "hsd_corpus_ingest: null argument");
        auto corpus = hsd::Corpus::ingest(path, hsd::format_from_string(format),
                                          hsd::split_from_string(split));
        *out = new hsd_corpus{std::move(corpus)};
    });
}

hsd_status hsd_corpus_export(const hsd_corpus* corpus, const char* path, const char* format) {
    return guarded([&] {
        require(corpus && path && format, "hsd_corpus_export: null argument");
        corpus->value.export_to(path, hsd::format_from_string(format));
    });
}

hsd_status hsd_corpus_stats_json(const hsd_corpus* corpus, char** out_json) {
    return guarded([&] {
        require(corpus && out_json, "hsd_corpus_stats_json: null argument");
        hsd::CorpusStats st = hsd::stats(corpus->value);
        json cells = json::object();
        for (const auto& [key, count] : st.cells) {
            cells[key.first + "/" + std::to_string(key.second)] = count;
        }
        json j;
        j["split"] = hsd::to_string(corpus->value.split());
        j["cells"] = cells;
        j["residual"] = st.residual;
        j["total"] = st.total;
        *out_json = alloc_string(j.dump());
    });
}

hsd_status hsd_corpus_filter(const hsd_corpus* corpus, const char* lang, int label,
                             hsd_corpus** out) {
    return guarded([&] {
        require(corpus && out, "hsd_corpus_filter: null argument");
        require(label == -1 || label == 0 || label == 1,
                "hsd_corpus_filter: label must be -1, 0 or 1");
        std::optional<int> label_opt;
        if (label != -1) label_opt = label;
        std::optional<std::string> lang_opt;
        if (lang != nullptr) lang_opt = std::string(lang);
        *out = new hsd_corpus{corpus->value.filter(label_opt, lang_opt)};
    });
}

hsd_status hsd_corpus_merge(const hsd_corpus* a, const hsd_corpus* b, int remap_ids,
                            hsd_corpus** out) {
    return guarded([&] {
        require(a && b && out, "hsd_corpus_merge: null argument");
        *out = new hsd_corpus{remap_ids ? a->value.merge_remapping_ids(b->value)
                                        : a->value.merge(b->value)};
    });
}

uint64_t hsd_corpus_size(const hsd_corpus* corpus) {
    return corpus ? static_cast<uint64_t>(corpus->value.size()) : 0;
}

void hsd_corpus_free(hsd_corpus* corpus) { delete corpus; }

/* ---- embeddings --------------------------------------------------------- */

hsd_status hsd_cosine_similarity(const double* a, const double* b, size_t dim, double* out) {
    return guarded([&] {
        require(a && b && out, "hsd_cosine_similarity: null argument");
        hsd::EmbeddingVector va(a, a + dim), vb(b, b + dim);
        *out = hsd::cosine_similarity(va, vb);
    });
}

/* ---- augmentation ------------------------------------------------------- */

hsd_status hsd_augment(const hsd_corpus* corpus, const char* config_json,
                       const char* translator_json, const char* embedder_json,
                       hsd_corpus** out_corpus, char** out_audit_jsonl,
                       char** out_summary_json) {
    return guarded([&] {
        require(corpus && out_corpus, "hsd_augment: null argument");
        auto cfg = hsd::AugmentationConfig::from_json(parse_json_arg(config_json, "augment config"));
        auto translator = hsd::make_translator(parse_json_arg(translator_json, "translator config"));
        auto provider = hsd::make_embedding_provider(parse_json_arg(embedder_json, "embedder config"));
        cfg.translator = translator->name();
        cfg.provider = provider->name();
        hsd::AugmentationResult result = hsd::augment(corpus->value, cfg, *translator, *provider);
        if (out_audit_jsonl) *out_audit_jsonl = alloc_string(hsd::audit_to_jsonl(result.records));
        if (out_summary_json) {
            json summary;
            summary["input"] = result.input_size;
            summary["accepted"] = result.accepted;
            summary["rejected"] = result.rejected;
            summary["duplicated"] = result.duplicated;
            summary["failed"] = result.failed;
            summary["output"] = result.corpus.size();
            *out_summary_json = alloc_string(summary.dump());
        }
        *out_corpus = new hsd_corpus{std::move(result.corpus)};
    });
}

/* ---- classifiers -------------------------------------------------------- */

hsd_status hsd_registry_json(char** out_json) {
    return guarded([&] {
        require(out_json != nullptr, "hsd_registry_json: null argument");
        json arr = json::array();
        for (const auto& spec : hsd::registry()) arr.push_back(spec.to_json());
        *out_json = alloc_string(arr.dump());
    });
}

hsd_status hsd_train(const char* spec, const hsd_corpus* corpus, const char* training_json,
                     const char* backend_json, hsd_model** out) {
    return guarded([&] {
        require(corpus && out, "hsd_train: null argument");
        hsd::ModelSpec model_spec = spec_from_arg(spec);
        auto cfg = hsd::TrainingConfig::from_json(parse_json_arg(training_json, "training config"));
        auto backend = hsd::make_training_backend(parse_json_arg(backend_json, "trainer config"));
        *out = new hsd_model{hsd::train(model_spec, corpus->value, cfg, *backend)};
    });
}

hsd_status hsd_model_metadata_json(const hsd_model* model, char** out_json) {
    return guarded([&] {
        require(model && out_json, "hsd_model_metadata_json: null argument");
        *out_json = alloc_string(model->value.metadata().dump());
    });
}

hsd_status hsd_model_save(const hsd_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "hsd_model_save: null argument");
        hsd::save_model(model->value, path);
    });
}

hsd_status hsd_model_load(const char* path, const char* backend_json, hsd_model** out) {
    return guarded([&] {
        require(path && out, "hsd_model_load: null argument");
        auto backend = hsd::make_training_backend(parse_json_arg(backend_json, "trainer config"));
        *out = new hsd_model{hsd::load_model(path, *backend)};
    });
}

void hsd_model_free(hsd_model* model) { delete model; }

hsd_status hsd_predict(const hsd_model* model, const hsd_corpus* corpus, hsd_predictions** out) {
    return guarded([&] {
        require(model && corpus && out, "hsd_predict: null argument");
        *out = new hsd_predictions{hsd::predict(model->value, corpus->value)};
    });
}

hsd_status hsd_predictions_save(const hsd_predictions* preds, const char* path) {
    return guarded([&] {
        require(preds && path, "hsd_predictions_save: null argument");
        hsd::save_predictions(preds->value, path);
    });
}

hsd_status hsd_predictions_load(const char* path, const char* model_id, hsd_predictions** out) {
    return guarded([&] {
        require(path && out, "hsd_predictions_load: null argument");
        *out = new hsd_predictions{
            hsd::load_predictions(path, model_id == nullptr ? "" : model_id)};
    });
}

uint64_t hsd_predictions_size(const hsd_predictions* preds) {
    return preds ? static_cast<uint64_t>(preds->value.size()) : 0;
}

void hsd_predictions_free(hsd_predictions* preds) { delete preds; }

/* ---- ensemble ----------------------------------------------------------- */

int hsd_cascade_predict(int p, int s, int f) { return hsd::cascade_predict(p, s, f); }

hsd_status hsd_ensemble_run(const hsd_predictions* primary, const hsd_predictions* secondary,
                            const hsd_predictions* fallback, hsd_predictions** out) {
    return guarded([&] {
        require(primary && secondary && fallback && out, "hsd_ensemble_run: null argument");
        hsd::CascadeSpec spec{primary->value.model_id(), secondary->value.model_id(),
                              fallback->value.model_id()};
        *out = new hsd_predictions{
            hsd::ensemble_run(spec, primary->value, secondary->value, fallback->value)};
    });
}

/* ---- metrics ------------------------------------------------------------ */

hsd_status hsd_evaluate_json(const hsd_predictions* preds, const hsd_corpus* gold,
                             const char* averaging, char** out_row_json) {
    return guarded([&] {
        require(preds && gold && out_row_json, "hsd_evaluate_json: null argument");
        hsd::Averaging avg = averaging == nullptr ? hsd::Averaging::positive_class
                                                  : hsd::averaging_from_string(averaging);
        hsd::ConfusionMatrix cm = hsd::confusion(preds->value, gold->value);
        hsd::MetricsRow row = hsd::compute_metrics(cm, avg);
        json j = row.to_json();
        j["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
        *out_row_json = alloc_string(j.dump());
    });
}

hsd_status hsd_render_report_text(const char* rows_json, char** out_text) {
    return guarded([&] {
        require(out_text != nullptr, "hsd_render_report_text: null argument");
        *out_text = alloc_string(hsd::render_report_text(rows_from_json_arg(rows_json)));
    });
}

hsd_status hsd_render_report_json(const char* rows_json, char** out_json) {
    return guarded([&] {
        require(out_json != nullptr, "hsd_render_report_json: null argument");
        *out_json = alloc_string(hsd::render_report_json(rows_from_json_arg(rows_json)).dump(2));
    });
}

hsd_status hsd_render_report_svg(const char* rows_json, char** out_svg) {
    return guarded([&] {
        require(out_svg != nullptr, "hsd_render_report_svg: null argument");
        *out_svg = alloc_string(hsd::render_report_svg(rows_from_json_arg(rows_json)));
    });
}

} /* extern "C" */
