// hsd: end-to-end pipeline for binary hate-speech classification over
// Devanagari-script text. Subcommands: ingest, stats, augment, train,
// predict, ensemble, evaluate, report.
//
// Exit codes: 0 success, 2 validation/user error, 3 backend/transport error.

#include <hsd/hsd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;

struct CStr {
    char* p = nullptr;
    ~CStr() { hsd_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

using CorpusHandle = std::unique_ptr<hsd_corpus, decltype(&hsd_corpus_free)>;
using ModelHandle = std::unique_ptr<hsd_model, decltype(&hsd_model_free)>;
using PredictionsHandle = std::unique_ptr<hsd_predictions, decltype(&hsd_predictions_free)>;

CorpusHandle corpus_handle(hsd_corpus* p = nullptr) { return {p, &hsd_corpus_free}; }
ModelHandle model_handle(hsd_model* p = nullptr) { return {p, &hsd_model_free}; }
PredictionsHandle predictions_handle(hsd_predictions* p = nullptr) {
    return {p, &hsd_predictions_free};
}

int fail(hsd_status st) {
    std::cerr << "error: " << hsd_last_error() << "\n";
    return static_cast<int>(st);
}

int fail_msg(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return kExitValidation;
}

void stderr_log(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

void log_event(const json& j) { std::fprintf(stderr, "%s\n", j.dump().c_str()); }

std::string infer_format(const std::string& path, const std::string& explicit_format) {
    if (!explicit_format.empty()) return explicit_format;
    auto ext = fs::path(path).extension().string();
    return ext == ".csv" ? "csv" : "jsonl";
}

// ---------------------------------------------------------------------------
// Run configuration. The file is JSON; every value the pipeline uses lands in
// the manifest so a run can be reproduced from the output directory alone.

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::int64_t> seed;
    std::string backend;
};

json default_config() {
    return json{
        {"seed", 0},
        {"out_dir", "out"},
        {"dataset",
         {{"train", ""}, {"evaluation", ""}, {"test", ""}, {"format", "jsonl"}}},
        {"augmentation",
         {{"threshold", 0.9},
          {"pivot", "en"},
          {"languages_to_augment", json{{"train", {"hi", "ne"}}, {"evaluation", {"hi"}}}},
          {"duplicate_minority", true},
          {"duplicate_scope", "original_only"},
          {"merge_eval_minority", false}}},
        {"training",
         {{"learning_rate", 2e-5},
          {"batch_size", 16},
          {"max_sequence_length", 128}}},
        {"models", {"M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8"}},
        {"cascade", {{"primary", "M7"}, {"secondary", "M3"}, {"fallback", "M1"}}},
        {"backends",
         {{"translator", {{"name", "mock"}, {"pivot", "en"}}},
          {"embedder", {{"name", "token-hash"}, {"dim", 64}, {"pooling", "mean"}}},
          {"trainer", {{"name", "mock"}}}}},
        {"averaging", "positive_class"},
    };
}

void deep_merge(json& base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (const auto& [key, value] : overlay.items()) {
        if (base.contains(key) && base[key].is_object() && value.is_object()) {
            deep_merge(base[key], value);
        } else {
            base[key] = value;
        }
    }
}

// Load + default + apply command-line overrides. The result is what gets
// written to the manifest.
json resolve_config(const GlobalArgs& args, bool require_file) {
    json cfg = default_config();
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + args.config_path);
        json user;
        try {
            in >> user;
        } catch (const json::exception& e) {
            throw std::runtime_error(args.config_path + ": invalid JSON: " + e.what());
        }
        deep_merge(cfg, user);
    } else if (require_file) {
        throw std::runtime_error("this command requires --config");
    }
    if (args.seed) cfg["seed"] = *args.seed;
    if (!args.out_dir.empty()) cfg["out_dir"] = args.out_dir;
    // The run seed flows into every seeded component that was not pinned.
    std::int64_t seed = cfg["seed"].get<std::int64_t>();
    if (!cfg["training"].contains("seed")) cfg["training"]["seed"] = seed;
    for (const char* b : {"translator", "embedder"}) {
        json& backend = cfg["backends"][b];
        if (backend.value("name", "") != "identity" && !backend.contains("seed")) {
            backend["seed"] = seed;
        }
    }
    return cfg;
}

fs::path out_dir_of(const json& cfg) { return fs::path(cfg.at("out_dir").get<std::string>()); }

void write_manifest(const json& cfg) {
    fs::path dir = out_dir_of(cfg);
    fs::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << cfg.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write manifest to " + dir.string());
}

std::string dataset_path(const json& cfg, const std::string& split) {
    std::string key = split == "test" ? "test" : (split == "train" ? "train" : "evaluation");
    std::string path = cfg.at("dataset").value(key, "");
    if (path.empty()) {
        throw std::runtime_error("config dataset." + key + " is not set");
    }
    return path;
}

// ---------------------------------------------------------------------------
// stats table

int print_stats(const std::string& stats_json) {
    json st = json::parse(stats_json);
    std::cout << "split: " << st["split"].get<std::string>() << "\n";
    std::printf("%-12s %10s\n", "lang/label", "count");
    const json& cells = st["cells"];
    for (const char* key : {"hi/0", "ne/0", "hi/1", "ne/1"}) {
        if (cells.contains(key)) {
            std::printf("%-12s %10llu\n", key,
                        static_cast<unsigned long long>(cells[key].get<std::uint64_t>()));
        }
    }
    for (const auto& [key, count] : cells.items()) {
        if (key != "hi/0" && key != "ne/0" && key != "hi/1" && key != "ne/1") {
            std::printf("%-12s %10llu\n", key.c_str(),
                        static_cast<unsigned long long>(count.get<std::uint64_t>()));
        }
    }
    if (st["residual"].get<std::uint64_t>() > 0) {
        std::printf("%-12s %10llu\n", "(residual)",
                    static_cast<unsigned long long>(st["residual"].get<std::uint64_t>()));
    }
    std::printf("%-12s %10llu\n", "total",
                static_cast<unsigned long long>(st["total"].get<std::uint64_t>()));
    log_event(json{{"event", "stats"}, {"stats", st}});
    return 0;
}

// ---------------------------------------------------------------------------
// subcommand implementations

struct IngestArgs {
    std::string input;
    std::string format;
    std::string split = "train";
    bool write_out = false;  // ingest copies the normalized corpus into the out tree
};

int cmd_ingest_or_stats(const GlobalArgs& gargs, const IngestArgs& args) {
    json cfg = resolve_config(gargs, false);
    std::string format = infer_format(args.input, args.format);
    auto corpus = corpus_handle();
    hsd_corpus* raw = nullptr;
    if (auto st = hsd_corpus_ingest(args.input.c_str(), format.c_str(), args.split.c_str(), &raw);
        st != HSD_OK) {
        return fail(st);
    }
    corpus = corpus_handle(raw);
    CStr stats;
    if (auto st = hsd_corpus_stats_json(corpus.get(), &stats.p); st != HSD_OK) return fail(st);
    if (args.write_out) {
        write_manifest(cfg);
        fs::path dir = out_dir_of(cfg) / "corpus";
        fs::create_directories(dir);
        fs::path dest = dir / (args.split + ".jsonl");
        if (auto st = hsd_corpus_export(corpus.get(), dest.string().c_str(), "jsonl");
            st != HSD_OK) {
            return fail(st);
        }
        log_event(json{{"event", "ingest"},
                       {"input", args.input},
                       {"split", args.split},
                       {"normalized_copy", dest.string()}});
    }
    return print_stats(stats.str());
}

struct AugmentArgs {
    std::string split = "train";
    std::string data;  // overrides the config dataset path
};

json languages_for_split(const json& aug_cfg, const std::string& split) {
    const json& langs = aug_cfg.at("languages_to_augment");
    if (langs.is_object()) {
        return langs.value(split, json::array());
    }
    return langs;
}

int cmd_augment(const GlobalArgs& gargs, const AugmentArgs& args) {
    json cfg = resolve_config(gargs, true);
    if (!gargs.backend.empty()) cfg["backends"]["translator"]["name"] = gargs.backend;
    write_manifest(cfg);

    std::string input = args.data.empty() ? dataset_path(cfg, args.split) : args.data;
    std::string format = infer_format(input, cfg["dataset"].value("format", ""));
    hsd_corpus* raw = nullptr;
    if (auto st = hsd_corpus_ingest(input.c_str(), format.c_str(), args.split.c_str(), &raw);
        st != HSD_OK) {
        return fail(st);
    }
    auto corpus = corpus_handle(raw);

    json aug_cfg = cfg["augmentation"];
    // Pipeline recipe: fold the evaluation-split minority into training
    // before augmenting. Incoming ids are remapped above the training range.
    if (args.split == "train" && aug_cfg.value("merge_eval_minority", false)) {
        hsd_corpus* eval_raw = nullptr;
        std::string eval_path = dataset_path(cfg, "evaluation");
        std::string eval_format = infer_format(eval_path, cfg["dataset"].value("format", ""));
        if (auto st = hsd_corpus_ingest(eval_path.c_str(), eval_format.c_str(), "evaluation",
                                        &eval_raw);
            st != HSD_OK) {
            return fail(st);
        }
        auto eval_corpus = corpus_handle(eval_raw);
        hsd_corpus* minority_raw = nullptr;
        if (auto st = hsd_corpus_filter(eval_corpus.get(), nullptr, 1, &minority_raw);
            st != HSD_OK) {
            return fail(st);
        }
        auto minority = corpus_handle(minority_raw);
        hsd_corpus* merged_raw = nullptr;
        if (auto st = hsd_corpus_merge(corpus.get(), minority.get(), 1, &merged_raw);
            st != HSD_OK) {
            return fail(st);
        }
        log_event(json{{"event", "merge_eval_minority"},
                       {"train", hsd_corpus_size(corpus.get())},
                       {"eval_minority", hsd_corpus_size(minority.get())}});
        corpus = corpus_handle(merged_raw);
    }

    json op_cfg{{"threshold", aug_cfg.value("threshold", 0.9)},
                {"pivot", aug_cfg.value("pivot", "en")},
                {"languages_to_augment", languages_for_split(aug_cfg, args.split)},
                {"duplicate_minority", aug_cfg.value("duplicate_minority", true)},
                {"duplicate_scope", aug_cfg.value("duplicate_scope", "original_only")}};

    hsd_corpus* augmented_raw = nullptr;
    CStr audit, summary;
    if (auto st = hsd_augment(corpus.get(), op_cfg.dump().c_str(),
                              cfg["backends"]["translator"].dump().c_str(),
                              cfg["backends"]["embedder"].dump().c_str(), &augmented_raw,
                              &audit.p, &summary.p);
        st != HSD_OK) {
        return fail(st);
    }
    auto augmented = corpus_handle(augmented_raw);

    fs::path out_root = out_dir_of(cfg);
    fs::create_directories(out_root / "corpus");
    fs::create_directories(out_root / "augmentation");
    fs::path corpus_path = out_root / "corpus" / (args.split + ".augmented.jsonl");
    if (auto st = hsd_corpus_export(augmented.get(), corpus_path.string().c_str(), "jsonl");
        st != HSD_OK) {
        return fail(st);
    }
    fs::path audit_path = out_root / "augmentation" / "audit.jsonl";
    {
        std::ofstream out(audit_path, std::ios::binary | std::ios::trunc);
        out << audit.str();
        if (!out) return fail_msg("cannot write " + audit_path.string());
    }

    json s = json::parse(summary.str());
    std::cout << s["output"].get<std::uint64_t>() << " = " << s["input"].get<std::uint64_t>()
              << " + " << s["accepted"].get<std::uint64_t>() << " + "
              << s["duplicated"].get<std::uint64_t>() << "\n";
    log_event(json{{"event", "augment_done"},
                   {"summary", s},
                   {"corpus", corpus_path.string()},
                   {"audit", audit_path.string()}});
    return 0;
}

std::vector<std::string> active_models(const json& cfg, const std::vector<std::string>& flag) {
    if (!flag.empty()) return flag;
    return cfg.at("models").get<std::vector<std::string>>();
}

int cmd_train(const GlobalArgs& gargs, const std::vector<std::string>& models_flag,
              const std::string& data_flag) {
    json cfg = resolve_config(gargs, true);
    if (!gargs.backend.empty()) cfg["backends"]["trainer"]["name"] = gargs.backend;
    write_manifest(cfg);

    fs::path out_root = out_dir_of(cfg);
    std::string input = data_flag;
    if (input.empty()) {
        fs::path augmented = out_root / "corpus" / "train.augmented.jsonl";
        input = fs::exists(augmented) ? augmented.string() : dataset_path(cfg, "train");
    }
    std::string format = infer_format(input, cfg["dataset"].value("format", ""));
    hsd_corpus* raw = nullptr;
    if (auto st = hsd_corpus_ingest(input.c_str(), format.c_str(), "train", &raw); st != HSD_OK) {
        return fail(st);
    }
    auto corpus = corpus_handle(raw);
    log_event(json{{"event", "train_data"}, {"path", input}, {"samples", hsd_corpus_size(raw)}});

    fs::create_directories(out_root / "models");
    std::string trainer = cfg["backends"]["trainer"].dump();
    std::string training = cfg["training"].dump();
    for (const std::string& id : active_models(cfg, models_flag)) {
        hsd_model* model_raw = nullptr;
        if (auto st = hsd_train(id.c_str(), corpus.get(), training.c_str(), trainer.c_str(),
                                &model_raw);
            st != HSD_OK) {
            return fail(st);
        }
        auto model = model_handle(model_raw);
        fs::path model_path = out_root / "models" / (id + ".model.json");
        if (auto st = hsd_model_save(model.get(), model_path.string().c_str()); st != HSD_OK) {
            return fail(st);
        }
        CStr meta;
        if (auto st = hsd_model_metadata_json(model.get(), &meta.p); st != HSD_OK) return fail(st);
        std::cout << "trained " << id << " -> " << model_path.string() << "\n";
        log_event(json{{"event", "model_saved"}, {"model", id}, {"path", model_path.string()},
                       {"metadata", json::parse(meta.str())}});
    }
    return 0;
}

int cmd_predict(const GlobalArgs& gargs, const std::vector<std::string>& models_flag,
                const std::string& split, const std::string& data_flag) {
    json cfg = resolve_config(gargs, true);
    if (!gargs.backend.empty()) cfg["backends"]["trainer"]["name"] = gargs.backend;
    write_manifest(cfg);

    fs::path out_root = out_dir_of(cfg);
    std::string input = data_flag.empty() ? dataset_path(cfg, split) : data_flag;
    std::string format = infer_format(input, cfg["dataset"].value("format", ""));
    hsd_corpus* raw = nullptr;
    if (auto st = hsd_corpus_ingest(input.c_str(), format.c_str(), split.c_str(), &raw);
        st != HSD_OK) {
        return fail(st);
    }
    auto corpus = corpus_handle(raw);

    fs::create_directories(out_root / "predictions");
    std::string trainer = cfg["backends"]["trainer"].dump();
    for (const std::string& id : active_models(cfg, models_flag)) {
        fs::path model_path = out_root / "models" / (id + ".model.json");
        hsd_model* model_raw = nullptr;
        if (auto st = hsd_model_load(model_path.string().c_str(), trainer.c_str(), &model_raw);
            st != HSD_OK) {
            return fail(st);
        }
        auto model = model_handle(model_raw);
        hsd_predictions* preds_raw = nullptr;
        if (auto st = hsd_predict(model.get(), corpus.get(), &preds_raw); st != HSD_OK) {
            return fail(st);
        }
        auto preds = predictions_handle(preds_raw);
        fs::path pred_path = out_root / "predictions" / (id + ".jsonl");
        if (auto st = hsd_predictions_save(preds.get(), pred_path.string().c_str());
            st != HSD_OK) {
            return fail(st);
        }
        CStr meta;
        if (auto st = hsd_model_metadata_json(model.get(), &meta.p); st != HSD_OK) return fail(st);
        fs::path meta_path = out_root / "predictions" / (id + ".meta.json");
        {
            std::ofstream out(meta_path, std::ios::binary | std::ios::trunc);
            out << json::parse(meta.str()).dump(2) << "\n";
            if (!out) return fail_msg("cannot write " + meta_path.string());
        }
        std::cout << "predicted " << id << " -> " << pred_path.string() << " ("
                  << hsd_predictions_size(preds.get()) << " ids)\n";
    }
    return 0;
}

int cmd_ensemble(const GlobalArgs& gargs, std::string primary, std::string secondary,
                 std::string fallback) {
    json cfg = resolve_config(gargs, true);
    write_manifest(cfg);
    if (primary.empty()) primary = cfg["cascade"].value("primary", "M7");
    if (secondary.empty()) secondary = cfg["cascade"].value("secondary", "M3");
    if (fallback.empty()) fallback = cfg["cascade"].value("fallback", "M1");

    fs::path pred_dir = out_dir_of(cfg) / "predictions";
    auto load = [&](const std::string& id, PredictionsHandle& out) -> std::optional<int> {
        fs::path path = pred_dir / (id + ".jsonl");
        hsd_predictions* raw = nullptr;
        if (auto st = hsd_predictions_load(path.string().c_str(), id.c_str(), &raw);
            st != HSD_OK) {
            return fail(st);
        }
        out = predictions_handle(raw);
        return std::nullopt;
    };
    auto p = predictions_handle(), s = predictions_handle(), f = predictions_handle();
    if (auto rc = load(primary, p)) return *rc;
    if (auto rc = load(secondary, s)) return *rc;
    if (auto rc = load(fallback, f)) return *rc;

    hsd_predictions* ens_raw = nullptr;
    if (auto st = hsd_ensemble_run(p.get(), s.get(), f.get(), &ens_raw); st != HSD_OK) {
        return fail(st);
    }
    auto ens = predictions_handle(ens_raw);
    fs::path out_path = pred_dir / "ensemble.jsonl";
    if (auto st = hsd_predictions_save(ens.get(), out_path.string().c_str()); st != HSD_OK) {
        return fail(st);
    }
    std::cout << "ensemble(" << primary << "," << secondary << "," << fallback << ") -> "
              << out_path.string() << " (" << hsd_predictions_size(ens.get()) << " ids)\n";
    log_event(json{{"event", "ensemble"},
                   {"primary", primary},
                   {"secondary", secondary},
                   {"fallback", fallback},
                   {"output", out_path.string()}});
    return 0;
}

int write_reports(const json& rows, const fs::path& report_dir) {
    fs::create_directories(report_dir);
    std::string rows_str = rows.dump();
    CStr text, report_json, svg;
    if (auto st = hsd_render_report_text(rows_str.c_str(), &text.p); st != HSD_OK) return fail(st);
    if (auto st = hsd_render_report_json(rows_str.c_str(), &report_json.p); st != HSD_OK) {
        return fail(st);
    }
    if (auto st = hsd_render_report_svg(rows_str.c_str(), &svg.p); st != HSD_OK) return fail(st);
    auto write_file = [&](const fs::path& path, const std::string& content) -> bool {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        return static_cast<bool>(out);
    };
    if (!write_file(report_dir / "report.txt", text.str()) ||
        !write_file(report_dir / "report.json", report_json.str() + "\n") ||
        !write_file(report_dir / "report.svg", svg.str())) {
        return fail_msg("cannot write report files under " + report_dir.string());
    }
    std::cout << text.str();
    log_event(json{{"event", "report_written"}, {"dir", report_dir.string()}});
    return 0;
}

int cmd_evaluate(const GlobalArgs& gargs, const std::vector<std::string>& pred_files,
                 std::string gold_path, const std::string& gold_format_flag,
                 const std::string& averaging_flag) {
    json cfg = resolve_config(gargs, !(!pred_files.empty() && !gold_path.empty()));
    write_manifest(cfg);
    fs::path out_root = out_dir_of(cfg);

    if (gold_path.empty()) gold_path = dataset_path(cfg, "evaluation");
    std::string gold_format =
        infer_format(gold_path, gold_format_flag.empty() ? cfg["dataset"].value("format", "")
                                                         : gold_format_flag);
    hsd_corpus* gold_raw = nullptr;
    if (auto st = hsd_corpus_ingest(gold_path.c_str(), gold_format.c_str(), "evaluation",
                                    &gold_raw);
        st != HSD_OK) {
        return fail(st);
    }
    auto gold = corpus_handle(gold_raw);

    std::vector<fs::path> files;
    if (!pred_files.empty()) {
        for (const auto& f : pred_files) files.emplace_back(f);
    } else {
        for (const std::string& id : cfg["models"].get<std::vector<std::string>>()) {
            files.emplace_back(out_root / "predictions" / (id + ".jsonl"));
        }
        fs::path ens = out_root / "predictions" / "ensemble.jsonl";
        if (fs::exists(ens)) files.push_back(ens);
    }

    std::string averaging = averaging_flag.empty()
                                ? cfg.value("averaging", "positive_class")
                                : averaging_flag;
    json rows = json::object();
    for (const auto& file : files) {
        hsd_predictions* preds_raw = nullptr;
        if (auto st = hsd_predictions_load(file.string().c_str(), nullptr, &preds_raw);
            st != HSD_OK) {
            return fail(st);
        }
        auto preds = predictions_handle(preds_raw);
        CStr row;
        if (auto st = hsd_evaluate_json(preds.get(), gold.get(), averaging.c_str(), &row.p);
            st != HSD_OK) {
            return fail(st);
        }
        rows[file.stem().string()] = json::parse(row.str());
    }
    return write_reports(rows, out_root / "reports");
}

int cmd_report(const GlobalArgs& gargs, const std::string& rows_path) {
    json cfg = resolve_config(gargs, false);
    std::ifstream in(rows_path);
    if (!in) return fail_msg("cannot open rows file: " + rows_path);
    json rows;
    try {
        in >> rows;
    } catch (const json::exception& e) {
        return fail_msg(rows_path + ": invalid JSON: " + std::string(e.what()));
    }
    return write_reports(rows, out_dir_of(cfg) / "reports");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hate-speech detection pipeline for Devanagari-script text (hsd " +
                 std::string(hsd_version()) + ")"};
    app.require_subcommand(1);

    GlobalArgs gargs;
    std::int64_t seed_flag = 0;
    app.add_option("--config", gargs.config_path, "run configuration file (JSON)");
    app.add_option("--out", gargs.out_dir, "output directory (default: config out_dir)");
    auto* seed_opt = app.add_option("--seed", seed_flag, "override the run seed");
    app.add_option("--backend", gargs.backend,
                   "override the backend for this command (augment: translator, "
                   "train/predict: trainer)");

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "ingest a dataset file and print its stats");
    ingest->add_option("--input", ingest_args.input, "dataset file")->required();
    ingest->add_option("--format", ingest_args.format, "csv or jsonl (default: by extension)");
    ingest->add_option("--split", ingest_args.split, "train, evaluation or test");

    IngestArgs stats_args;
    auto* stats = app.add_subcommand("stats", "print per-(lang,label) counts for a dataset file");
    stats->add_option("--input", stats_args.input, "dataset file")->required();
    stats->add_option("--format", stats_args.format, "csv or jsonl (default: by extension)");
    stats->add_option("--split", stats_args.split, "train, evaluation or test");

    AugmentArgs augment_args;
    auto* augment = app.add_subcommand("augment",
                                       "backtranslate + gate + duplicate the minority class");
    augment->add_option("--split", augment_args.split, "split to augment (default: train)");
    augment->add_option("--data", augment_args.data, "input file (default: config dataset path)");

    std::vector<std::string> train_models, predict_models;
    std::string train_data, predict_data, predict_split = "evaluation";
    auto* train = app.add_subcommand("train", "train the selected models");
    train->add_option("--models", train_models, "model ids (default: config models)")
        ->delimiter(',');
    train->add_option("--data", train_data,
                      "training file (default: augmented corpus if present, else config "
                      "dataset.train)");

    auto* predict = app.add_subcommand("predict", "write prediction files for trained models");
    predict->add_option("--models", predict_models, "model ids (default: config models)")
        ->delimiter(',');
    predict->add_option("--split", predict_split, "evaluation or test (default: evaluation)");
    predict->add_option("--data", predict_data, "input file (default: config dataset path)");

    std::string ens_primary, ens_secondary, ens_fallback;
    auto* ensemble = app.add_subcommand("ensemble", "cascade three prediction files");
    ensemble->add_option("--primary", ens_primary, "primary model id (default: config cascade)");
    ensemble->add_option("--secondary", ens_secondary, "secondary model id");
    ensemble->add_option("--fallback", ens_fallback, "fallback model id");

    std::vector<std::string> eval_preds;
    std::string eval_gold, eval_gold_format, eval_averaging;
    auto* evaluate = app.add_subcommand("evaluate", "score prediction files against gold labels");
    evaluate->add_option("--pred", eval_preds,
                         "prediction files (default: out tree predictions for config models)");
    evaluate->add_option("--gold", eval_gold, "gold dataset file (default: config evaluation)");
    evaluate->add_option("--gold-format", eval_gold_format, "csv or jsonl");
    evaluate->add_option("--averaging", eval_averaging,
                         "positive_class, macro, micro or weighted");

    std::string report_rows;
    auto* report = app.add_subcommand("report", "render a report from a metric-rows JSON file");
    report->add_option("--rows", report_rows, "rows JSON file")->required();

    // Global flags are accepted after the subcommand name too.
    for (auto* sub : {ingest, stats, augment, train, predict, ensemble, evaluate, report}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }
    if (seed_opt->count() > 0) gargs.seed = seed_flag;

    hsd_set_log_callback(&stderr_log, nullptr);

    try {
        if (*ingest) {
            ingest_args.write_out = true;
            return cmd_ingest_or_stats(gargs, ingest_args);
        }
        if (*stats) return cmd_ingest_or_stats(gargs, stats_args);
        if (*augment) return cmd_augment(gargs, augment_args);
        if (*train) return cmd_train(gargs, train_models, train_data);
        if (*predict) return cmd_predict(gargs, predict_models, predict_split, predict_data);
        if (*ensemble) return cmd_ensemble(gargs, ens_primary, ens_secondary, ens_fallback);
        if (*evaluate) {
            return cmd_evaluate(gargs, eval_preds, eval_gold, eval_gold_format, eval_averaging);
        }
        if (*report) return cmd_report(gargs, report_rows);
    } catch (const std::exception& e) {
        return fail_msg(e.what());
    }
    return fail_msg("no subcommand selected");
}
