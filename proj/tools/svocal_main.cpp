#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "svocal/agreement.hpp"
#include "svocal/annotate.hpp"
#include "svocal/backends.hpp"
#include "svocal/config.hpp"
#include "svocal/corpus.hpp"
#include "svocal/dataset.hpp"
#include "svocal/errors.hpp"
#include "svocal/evaluation.hpp"
#include "svocal/inference.hpp"
#include "svocal/isotonic.hpp"
#include "svocal/jsonl.hpp"
#include "svocal/pipeline.hpp"
#include "svocal/postprocess.hpp"
#include "svocal/util.hpp"

namespace fs = std::filesystem;
using namespace svocal;

namespace {

struct GlobalOptions {
    std::string config_path;
    bool mock = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> parallel;
    std::string out_dir = ".";
};

AppConfig resolve_config(const GlobalOptions& global) {
    AppConfig config;
    if (!global.config_path.empty()) config = load_config(global.config_path);
    if (global.seed) config.seed = *global.seed;
    if (global.parallel) config.parallel = *global.parallel;
    return config;
}

std::string out_path(const GlobalOptions& global, const std::string& name) {
    fs::create_directories(global.out_dir);
    return (fs::path(global.out_dir) / name).string();
}

std::vector<GoldRecord> load_characters(const std::string& gold_path,
                                        const std::string& from_svocal) {
    if (!from_svocal.empty()) return convert_external_dataset(from_svocal);
    if (gold_path.empty())
        throw ContractError("either --characters or --from-svocal is required");
    return load_gold(gold_path);
}

std::unique_ptr<EmbeddingBackend> make_embedder(const AppConfig& config,
                                                bool mock) {
    if (mock) {
        return make_mock_embedding_backend(
            config.seed, static_cast<std::size_t>(config.mock_embedding_dim));
    }
    if (config.embedding.base_url.empty()) return nullptr;
    return make_http_embedding_backend(config.embedding);
}

std::unique_ptr<ChatBackend> make_chat(const AppConfig& config, bool mock) {
    if (mock) {
        std::map<std::string, MockChatFixture> fixtures;
        if (!config.mock_fixtures_path.empty())
            fixtures = load_mock_chat_fixtures(config.mock_fixtures_path);
        return make_mock_chat_backend(std::move(fixtures));
    }
    if (config.chat.base_url.empty())
        throw ContractError(
            "chat.base_url is not configured; pass --mock or a config file");
    return make_http_chat_backend(config.chat);
}

PromptTemplate resolve_template(const AppConfig& config) {
    if (config.prompt_template_path.empty()) return default_prompt_template();
    return load_prompt_template(config.prompt_template_path);
}

std::map<AttributeKind, HasCalibration> load_calibration_map(
    const std::string& path) {
    std::map<AttributeKind, HasCalibration> out;
    for (auto& cal : load_calibrations(path)) {
        out.emplace(cal.kind, std::move(cal));
    }
    return out;
}

// ------------------------------------------------------------------
// Subcommands.
// ------------------------------------------------------------------

int cmd_ingest(const GlobalOptions& global, const std::string& books_path,
               const std::string& gold_path, const std::string& from_svocal,
               int window_words, bool keep_boilerplate) {
    AppConfig config = resolve_config(global);
    if (window_words <= 0) window_words = config.retrieval.window_words;
    auto books = load_book_manifest(books_path);
    auto characters = load_characters(gold_path, from_svocal);

    std::vector<std::string> inputs = {books_path};
    if (!gold_path.empty()) inputs.push_back(gold_path);
    RunManifest manifest = make_run_manifest(
        "ingest", config_snapshot(config), inputs, {}, config.seed, true);

    IngestResult result =
        ingest_corpus(books, characters, window_words, !keep_boilerplate);
    for (const auto& warning : result.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    for (const auto& error : result.errors) {
        std::cerr << "error: " << error << "\n";
    }

    std::vector<nlohmann::ordered_json> rows;
    rows.push_back(make_run_header(manifest.run_id, "passages"));
    for (const auto& p : result.passages) {
        nlohmann::ordered_json row;
        row["passage_id"] = p.passage_id;
        row["book_id"] = p.book_id;
        row["character_id"] = p.character_id;
        row["start_word"] = p.start_word;
        row["end_word"] = p.end_word;
        row["text"] = p.text;
        rows.push_back(std::move(row));
    }
    write_jsonl(out_path(global, "passages.jsonl"), rows);

    nlohmann::ordered_json index;
    index["run_id"] = manifest.run_id;
    index["books"] = nlohmann::ordered_json::object();
    for (const auto& [book_id, count] : result.per_book_counts) {
        index["books"][book_id] = count;
    }
    index["n_passages"] = result.passages.size();
    index["n_warnings"] = result.warnings.size();
    index["failed_books"] = result.errors;
    util::write_file(out_path(global, "passage_index.json"),
                     index.dump(2) + "\n");
    save_run_manifest(out_path(global, "ingest_manifest.json"), manifest);

    std::cout << "wrote " << result.passages.size() << " passages for "
              << characters.size() << " characters across "
              << result.per_book_counts.size() << " books\n";
    return result.errors.empty() ? 0 : 1;
}

int cmd_infer(const GlobalOptions& global, const std::string& passages_path,
              const std::string& gold_path, const std::string& from_svocal) {
    AppConfig config = resolve_config(global);
    auto characters = load_characters(gold_path, from_svocal);
    auto passages = load_passages(passages_path);

    auto embedder = make_embedder(config, global.mock);
    if (!embedder)
        throw ContractError(
            "embedding.base_url is not configured; pass --mock or a config "
            "file");
    auto chat = make_chat(config, global.mock);

    InferOptions options;
    options.retrieval = config.retrieval;
    options.generation = config.generation;
    options.prompt_template = resolve_template(config);
    options.parallel = config.parallel;
    options.frozen_time = global.mock;

    std::vector<std::string> inputs = {passages_path};
    if (!gold_path.empty()) inputs.push_back(gold_path);
    RunManifest manifest = make_run_manifest(
        "infer", config_snapshot(config), inputs,
        {embedder->id(), chat->id()}, config.seed, global.mock);

    InferOutcome outcome = infer_characters(characters, passages, *embedder,
                                            *chat, options, &std::cout);
    for (auto& pred : outcome.predictions) {
        pred.provenance.run_id = manifest.run_id;
    }

    std::string pred_path = out_path(global, "predictions.jsonl");
    {
        std::string blob =
            make_run_header(manifest.run_id, "predictions").dump() + "\n";
        for (const auto& pred : outcome.predictions) {
            blob += prediction_to_json(pred);
            blob += '\n';
        }
        util::write_file(pred_path, blob);
    }
    save_run_manifest(out_path(global, "infer_manifest.json"), manifest);

    std::cout << "\n" << outcome.predictions.size() << " predictions ("
              << outcome.stats.n_failed << " failed)\n";
    std::cout << "outputs repaired: " << outcome.stats.n_repaired << "\n";
    for (const auto& [rule, count] : outcome.stats.rule_counts) {
        std::cout << "  " << rule << ": " << count << "\n";
    }
    std::cout << "wrote " << pred_path << "\n";

    bool systemic = outcome.stats.n_failed == characters.size() &&
                    !characters.empty();
    return systemic ? 1 : 0;
}

int cmd_baseline(const GlobalOptions& global, const std::string& gold_path,
                 const std::string& from_svocal) {
    AppConfig config = resolve_config(global);
    auto characters = load_characters(gold_path, from_svocal);

    std::vector<std::string> inputs;
    if (!gold_path.empty()) inputs.push_back(gold_path);
    RunManifest manifest = make_run_manifest(
        "baseline", config_snapshot(config), inputs, {}, config.seed, true);

    auto predictions = majority_baseline(characters);
    for (auto& pred : predictions) pred.provenance.run_id = manifest.run_id;

    std::string pred_path = out_path(global, "baseline_predictions.jsonl");
    std::string blob =
        make_run_header(manifest.run_id, "predictions").dump() + "\n";
    for (const auto& pred : predictions) {
        blob += prediction_to_json(pred);
        blob += '\n';
    }
    util::write_file(pred_path, blob);
    save_run_manifest(out_path(global, "baseline_manifest.json"), manifest);

    MajorityValues majority = majority_values(characters);
    std::cout << "majority values:\n";
    for (AttributeKind kind : all_attribute_kinds()) {
        auto it = majority.values.find(kind);
        std::cout << "  " << attribute_name(kind) << ": "
                  << (it != majority.values.end() && it->second
                          ? *it->second
                          : std::string("(none)"))
                  << "\n";
    }
    std::cout << "wrote " << pred_path << " (" << predictions.size()
              << " rows)\n";
    return 0;
}

int cmd_evaluate(const GlobalOptions& global, const std::string& gold_path,
                 const std::string& from_svocal,
                 const std::string& predictions_path,
                 const std::string& compare_path,
                 const std::string& calibration_path, bool similarity) {
    AppConfig config = resolve_config(global);
    auto gold = load_characters(gold_path, from_svocal);
    auto predictions = load_predictions(predictions_path);

    std::unique_ptr<EmbeddingBackend> embedder;
    if (similarity || global.mock) embedder = make_embedder(config, global.mock);

    std::map<AttributeKind, HasCalibration> calibrations;
    if (!calibration_path.empty())
        calibrations = load_calibration_map(calibration_path);

    std::vector<std::string> inputs = {predictions_path};
    if (!gold_path.empty()) inputs.push_back(gold_path);
    if (!compare_path.empty()) inputs.push_back(compare_path);
    if (!calibration_path.empty()) inputs.push_back(calibration_path);
    RunManifest manifest = make_run_manifest(
        "evaluate", config_snapshot(config), inputs,
        embedder ? std::vector<std::string>{embedder->id()}
                 : std::vector<std::string>{},
        config.seed, true);

    EvaluationReport report = evaluate_predictions(
        gold, predictions, embedder.get(),
        calibrations.empty() ? nullptr : &calibrations);
    for (const auto& id : report.unmatched_gold) {
        std::cerr << "warning: no prediction for gold character " << id << "\n";
    }
    for (const auto& id : report.unmatched_predictions) {
        std::cerr << "warning: no gold character for prediction " << id << "\n";
    }

    util::write_file(out_path(global, "report.json"),
                     report_to_json(report, manifest.run_id).dump(2) + "\n");
    std::string markdown = report_to_markdown(report, manifest.run_id);
    util::write_file(out_path(global, "report.md"), markdown);
    if (embedder) {
        save_similarity_scores(out_path(global, "similarity_scores.jsonl"),
                               report, manifest.run_id);
    }

    if (!compare_path.empty()) {
        auto other_predictions = load_predictions(compare_path);
        EvaluationReport other = evaluate_predictions(
            gold, other_predictions, embedder.get(),
            calibrations.empty() ? nullptr : &calibrations);
        util::write_file(out_path(global, "paired_scores.csv"),
                         paired_scores_to_csv(report, other, manifest.run_id));
    } else if (embedder) {
        util::write_file(out_path(global, "scores.csv"),
                         scores_to_csv(report, manifest.run_id));
    }
    save_run_manifest(out_path(global, "evaluate_manifest.json"), manifest);

    std::cout << markdown;
    return 0;
}

int cmd_annotate(const GlobalOptions& global, const std::string& task,
                 const std::string& annotator, const std::string& gold_path,
                 const std::string& from_svocal, const std::string& items_path,
                 const std::string& adjudicate_a,
                 const std::string& adjudicate_b) {
    if (!adjudicate_a.empty() || !adjudicate_b.empty()) {
        if (adjudicate_a.empty() || adjudicate_b.empty())
            throw ContractError("adjudication needs both --resolve-a and "
                                "--resolve-b");
        std::string out = out_path(global, "judgments_adjudicated.jsonl");
        adjudicate_judgments(adjudicate_a, adjudicate_b, annotator, out,
                             std::cin, std::cout);
        return 0;
    }
    if (task == "age") {
        auto characters = load_characters(gold_path, from_svocal);
        std::string out = out_path(global, "age_annotations.jsonl");
        annotate_age(characters, annotator, out, std::cin, std::cout);
        return 0;
    }
    if (task == "judgment") {
        if (items_path.empty())
            throw ContractError(
                "--items <similarity_scores.jsonl> is required for the "
                "judgment task");
        auto items = load_judgment_items(items_path);
        std::string out = out_path(global, "judgments.jsonl");
        annotate_judgments(items, annotator, out, std::cin, std::cout);
        return 0;
    }
    throw ContractError("unknown annotation task '" + task +
                        "' (expected age or judgment)");
}

int cmd_calibrate(const GlobalOptions& global,
                  const std::string& judgments_path,
                  const std::string& scores_path) {
    AppConfig config = resolve_config(global);
    auto judgments = load_judgments(judgments_path);

    struct ScoreKey {
        std::string character_id;
        AttributeKind kind;
        bool operator<(const ScoreKey& other) const {
            return std::tie(character_id, kind) <
                   std::tie(other.character_id, other.kind);
        }
    };
    std::map<ScoreKey, double> cosines;
    for (const auto& line : read_jsonl(scores_path)) {
        if (is_run_header(line)) continue;
        auto kind = attribute_from_name(line.at("attribute").get<std::string>());
        if (!kind) continue;
        cosines[{line.at("character_id").get<std::string>(), *kind}] =
            line.at("cosine").get<double>();
    }

    RunManifest manifest = make_run_manifest(
        "calibrate", config_snapshot(config), {judgments_path, scores_path},
        {}, config.seed, true);

    // Mean human score per item, plus the per-annotator grid for agreement.
    std::map<ScoreKey, std::vector<double>> by_item;
    std::set<std::string> annotators;
    for (const auto& rec : judgments) {
        by_item[{rec.character_id, rec.kind}].push_back(rec.score);
        annotators.insert(rec.annotator_id);
    }

    std::vector<HasCalibration> calibrations;
    for (AttributeKind kind : all_attribute_kinds()) {
        std::vector<std::pair<double, double>> pairs;
        std::vector<double> xs, ys;
        for (const auto& [key, scores] : by_item) {
            if (key.kind != kind) continue;
            auto it = cosines.find(key);
            if (it == cosines.end()) continue;
            double mean = 0.0;
            for (double s : scores) mean += s;
            mean /= static_cast<double>(scores.size());
            pairs.emplace_back(it->second, mean);
            xs.push_back(it->second);
            ys.push_back(mean);
        }
        if (pairs.empty()) {
            bool requested = false;
            for (const auto& rec : judgments) {
                if (rec.kind == kind) requested = true;
            }
            if (requested)
                std::cerr << "warning: no (similarity, judgment) pairs for "
                          << attribute_name(kind) << ", skipped\n";
            continue;
        }
        calibrations.push_back(fit_isotonic(kind, pairs));
        std::cout << attribute_name(kind) << ": fitted on " << pairs.size()
                  << " pairs";
        if (xs.size() >= 3) {
            try {
                CorrelationReport corr = spearman_rho(xs, ys);
                std::cout << ", spearman rho " << corr.rho << " (p "
                          << corr.p_value << ")";
            } catch (const ContractError&) {
                std::cout << ", spearman rho undefined (no rank variance)";
            }
        }
        if (annotators.size() > 1) {
            std::vector<std::string> annotator_list(annotators.begin(),
                                                    annotators.end());
            std::map<std::string, std::size_t> annotator_index;
            for (std::size_t i = 0; i < annotator_list.size(); ++i) {
                annotator_index[annotator_list[i]] = i;
            }
            std::map<ScoreKey, std::vector<std::optional<double>>> grid_rows;
            for (const auto& rec : judgments) {
                if (rec.kind != kind) continue;
                auto& row = grid_rows[{rec.character_id, rec.kind}];
                row.resize(annotator_list.size());
                row[annotator_index[rec.annotator_id]] = rec.score;
            }
            std::vector<std::vector<std::optional<double>>> grid;
            for (auto& [key, row] : grid_rows) {
                row.resize(annotator_list.size());
                grid.push_back(row);
            }
            try {
                std::cout << ", krippendorff alpha "
                          << krippendorff_alpha_interval(grid);
            } catch (const ContractError&) {
                std::cout << ", krippendorff alpha undefined (<2 paired)";
            }
        }
        std::cout << "\n";
    }

    if (calibrations.empty())
        throw ContractError("no attribute had any (similarity, judgment) pair");
    std::string cal_path = out_path(global, "calibration.json");
    save_calibrations(cal_path, calibrations, manifest.run_id);
    save_run_manifest(out_path(global, "calibrate_manifest.json"), manifest);
    std::cout << "wrote " << cal_path << "\n";
    return 0;
}

int cmd_report(const GlobalOptions& global, const std::string& report_path,
               const std::string& gold_path, const std::string& from_svocal) {
    if (!report_path.empty()) {
        nlohmann::ordered_json doc =
            nlohmann::ordered_json::parse(util::read_file(report_path));
        std::string run_id = doc.value("run_id", std::string{});
        std::cout << "# Evaluation report\n\n";
        if (!run_id.empty()) std::cout << "Run: `" << run_id << "`\n\n";
        std::cout << "| Attribute | Metric | Value |\n|---|---|---:|\n";
        if (doc.contains("attributes")) {
            for (const auto& [name, entry] : doc["attributes"].items()) {
                auto row = [&](const char* metric, double value) {
                    std::cout << "| " << name << " | " << metric << " | "
                              << value << " |\n";
                };
                if (entry.contains("weighted_f1"))
                    row("weighted F1", entry["weighted_f1"]["aggregate"]);
                if (entry.contains("soft_f1"))
                    row("soft F1", entry["soft_f1"]["aggregate"]);
                if (entry.contains("micro_f1"))
                    row("micro F1", entry["micro_f1"]["aggregate"]);
                if (entry.contains("mean_cosine"))
                    row("mean cosine", entry["mean_cosine"]);
                if (entry.contains("mean_has"))
                    row("mean HAS", entry["mean_has"]);
            }
        }
        return 0;
    }
    auto characters = load_characters(gold_path, from_svocal);
    CoverageReport coverage = coverage_stats(characters);
    std::cout << "characters: " << characters.size() << "\n";
    std::cout << "| Attribute | Filled | Coverage |\n|---|---:|---:|\n";
    for (AttributeKind kind : all_attribute_kinds()) {
        const auto& cov = coverage.per_attribute.at(kind);
        std::cout << "| " << attribute_name(kind) << " | " << cov.filled
                  << "/" << cov.total << " | " << cov.fraction << " |\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Character attribute inference and evaluation for novels"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path,
                   "Key=value configuration file");
    app.add_flag("--mock", global.mock,
                 "Use deterministic in-process backends");
    std::uint64_t seed_value = 0;
    auto* seed_opt =
        app.add_option("--seed", seed_value, "Seed for deterministic runs");
    int parallel_value = 1;
    auto* parallel_opt = app.add_option("--parallel", parallel_value,
                                        "Bounded parallel backend calls");
    app.add_option("--out", global.out_dir, "Output directory");

    // ingest
    auto* ingest = app.add_subcommand(
        "ingest", "Extract mention windows from a book manifest");
    std::string books_path, gold_path, from_svocal;
    int window_words = 0;
    bool keep_boilerplate = false;
    ingest->add_option("--books", books_path, "Book manifest JSONL")
        ->required();
    ingest->add_option("--characters", gold_path, "Character gold JSONL");
    ingest->add_option("--from-svocal", from_svocal,
                       "Convert a published dataset checkout");
    ingest->add_option("--window", window_words, "Window width in words");
    ingest->add_flag("--keep-boilerplate", keep_boilerplate,
                     "Skip boilerplate marker stripping");

    // infer
    auto* infer = app.add_subcommand(
        "infer", "Retrieve passages and infer attributes per character");
    std::string passages_path;
    infer->add_option("--passages", passages_path, "Passage store JSONL")
        ->required();
    infer->add_option("--characters", gold_path, "Character gold JSONL");
    infer->add_option("--from-svocal", from_svocal,
                      "Convert a published dataset checkout");

    // baseline
    auto* baseline = app.add_subcommand(
        "baseline", "Write majority-value predictions for every character");
    baseline->add_option("--characters", gold_path, "Character gold JSONL");
    baseline->add_option("--from-svocal", from_svocal,
                         "Convert a published dataset checkout");

    // evaluate
    auto* evaluate =
        app.add_subcommand("evaluate", "Score predictions against gold");
    std::string predictions_path, compare_path, calibration_path;
    bool similarity = false;
    evaluate->add_option("--gold", gold_path, "Character gold JSONL");
    evaluate->add_option("--from-svocal", from_svocal,
                         "Convert a published dataset checkout");
    evaluate->add_option("--predictions", predictions_path, "Predictions JSONL")
        ->required();
    evaluate->add_option("--compare", compare_path,
                         "Second predictions file for a paired score CSV");
    evaluate->add_option("--calibration", calibration_path,
                         "Calibration file for HAS");
    evaluate->add_flag("--similarity", similarity,
                       "Embed gold and predictions for open-class scoring");

    // annotate
    auto* annotate =
        app.add_subcommand("annotate", "Interactive annotation tasks");
    std::string task = "judgment", annotator = "annotator", items_path;
    std::string adjudicate_a, adjudicate_b;
    annotate->add_option("--task", task, "age or judgment");
    annotate->add_option("--annotator", annotator, "Annotator id");
    annotate->add_option("--characters", gold_path, "Character gold JSONL");
    annotate->add_option("--from-svocal", from_svocal,
                         "Convert a published dataset checkout");
    annotate->add_option("--items", items_path,
                         "Similarity scores JSONL with gold/pred pairs");
    annotate->add_option("--resolve-a", adjudicate_a,
                         "First judgment file to adjudicate");
    annotate->add_option("--resolve-b", adjudicate_b,
                         "Second judgment file to adjudicate");

    // calibrate
    auto* calibrate = app.add_subcommand(
        "calibrate", "Fit per-attribute isotonic calibrations from judgments");
    std::string judgments_path, scores_path;
    calibrate->add_option("--judgments", judgments_path, "Judgments JSONL")
        ->required();
    calibrate->add_option("--scores", scores_path, "Similarity scores JSONL")
        ->required();

    // report
    auto* report = app.add_subcommand(
        "report", "Render a saved report, or coverage for a gold file");
    std::string report_path;
    report->add_option("--report", report_path, "Evaluation report JSON");
    report->add_option("--characters", gold_path, "Character gold JSONL");
    report->add_option("--from-svocal", from_svocal,
                       "Convert a published dataset checkout");

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) global.seed = seed_value;
    if (*parallel_opt) global.parallel = parallel_value;

    try {
        if (*ingest)
            return cmd_ingest(global, books_path, gold_path, from_svocal,
                              window_words, keep_boilerplate);
        if (*infer)
            return cmd_infer(global, passages_path, gold_path, from_svocal);
        if (*baseline) return cmd_baseline(global, gold_path, from_svocal);
        if (*evaluate)
            return cmd_evaluate(global, gold_path, from_svocal,
                                predictions_path, compare_path,
                                calibration_path, similarity);
        if (*annotate)
            return cmd_annotate(global, task, annotator, gold_path,
                                from_svocal, items_path, adjudicate_a,
                                adjudicate_b);
        if (*calibrate)
            return cmd_calibrate(global, judgments_path, scores_path);
        if (*report)
            return cmd_report(global, report_path, gold_path, from_svocal);
    } catch (const TimeoutError& e) {
        std::cerr << "timeout: " << e.what() << "\n";
        return 3;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
