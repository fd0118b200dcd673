#include "svocal/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "svocal/errors.hpp"
#include "svocal/postprocess.hpp"
#include "svocal/util.hpp"

namespace svocal {

namespace {

using nlohmann::ordered_json;

std::string hash_text(const std::string& text) {
    return util::hex64(util::fnv1a64(text));
}

CharacterIdentity identity_of(const GoldRecord& rec) {
    CharacterIdentity identity;
    identity.character_id = rec.character_id;
    identity.name = rec.name;
    identity.aliases = rec.aliases;
    return identity;
}

CharacterPrediction null_prediction(const std::string& character_id,
                                    const std::string& error,
                                    const std::string& model_id,
                                    const std::string& template_version,
                                    bool frozen_time) {
    CharacterPrediction pred;
    pred.character_id = character_id;
    pred.error = error;
    pred.provenance.model_id = model_id;
    pred.provenance.template_version = template_version;
    pred.provenance.timestamp = util::timestamp_utc(frozen_time);
    return pred;
}

}  // namespace

std::string compute_run_id(
    const std::map<std::string, std::string>& config_snapshot,
    const std::map<std::string, std::string>& input_hashes,
    std::uint64_t seed) {
    std::string blob;
    for (const auto& [key, value] : config_snapshot) {
        blob += key;
        blob += '=';
        blob += value;
        blob += '\n';
    }
    for (const auto& [path, hash] : input_hashes) {
        blob += path;
        blob += ':';
        blob += hash;
        blob += '\n';
    }
    blob += "seed=" + std::to_string(seed);
    return util::hex64(util::fnv1a64(blob));
}

RunManifest make_run_manifest(const std::string& command,
                              const std::map<std::string, std::string>& config,
                              const std::vector<std::string>& input_paths,
                              const std::vector<std::string>& backend_ids,
                              std::uint64_t seed, bool frozen_time) {
    RunManifest manifest;
    manifest.command = command;
    manifest.config_snapshot = config;
    for (const auto& path : input_paths) {
        manifest.input_hashes[path] = hash_text(util::read_file(path));
    }
    manifest.backend_ids = backend_ids;
    manifest.seed = seed;
    manifest.started_at = util::timestamp_utc(frozen_time);
    manifest.run_id = compute_run_id(config, manifest.input_hashes, seed);
    return manifest;
}

void save_run_manifest(const std::string& path, const RunManifest& manifest) {
    ordered_json doc;
    doc["run_id"] = manifest.run_id;
    doc["command"] = manifest.command;
    doc["seed"] = manifest.seed;
    doc["started_at"] = manifest.started_at;
    doc["config"] = manifest.config_snapshot;
    doc["input_hashes"] = manifest.input_hashes;
    doc["backends"] = manifest.backend_ids;
    util::write_file(path, doc.dump(2) + "\n");
}

IngestResult ingest_corpus(const std::vector<BookManifestEntry>& books,
                           const std::vector<GoldRecord>& characters,
                           int window_words, bool strip_boilerplate) {
    if (window_words < 1) throw ContractError("window_words must be >= 1");
    IngestResult result;
    std::map<std::string, std::vector<const GoldRecord*>> by_book;
    for (const auto& rec : characters) by_book[rec.book_id].push_back(&rec);

    std::set<std::string> known_books;
    for (const auto& entry : books) {
        known_books.insert(entry.book_id);
        std::vector<std::string> warnings;
        BookText book;
        try {
            std::string raw = util::read_file(entry.path);
            book = normalize_text(raw, entry.book_id, entry.title,
                                  strip_boilerplate, &warnings);
        } catch (const Error& e) {
            result.errors.push_back(entry.book_id + ": " + e.what());
            continue;
        }
        for (auto& w : warnings) result.warnings.push_back(std::move(w));

        std::size_t count = 0;
        auto it = by_book.find(entry.book_id);
        if (it != by_book.end()) {
            for (const GoldRecord* rec : it->second) {
                CharacterIdentity identity = identity_of(*rec);
                auto mentions = locate_mentions(book, identity);
                if (mentions.empty()) {
                    result.warnings.push_back("character " + rec->character_id +
                                              " (" + rec->name +
                                              ") is never mentioned in " +
                                              entry.book_id);
                    continue;
                }
                auto windows =
                    extract_windows(book, identity, mentions, window_words);
                count += windows.size();
                for (auto& p : windows) result.passages.push_back(std::move(p));
            }
        }
        result.per_book_counts[entry.book_id] = count;
    }

    for (const auto& [book_id, recs] : by_book) {
        if (!known_books.count(book_id)) {
            result.warnings.push_back("book " + book_id + " (" +
                                      std::to_string(recs.size()) +
                                      " characters) is not in the manifest");
        }
    }
    return result;
}

InferOutcome infer_characters(const std::vector<GoldRecord>& characters,
                              const std::vector<Passage>& passages,
                              EmbeddingBackend& embedder, ChatBackend& chat,
                              const InferOptions& options,
                              std::ostream* progress) {
    InferOutcome outcome;
    outcome.stats.n_characters = characters.size();
    outcome.predictions.resize(characters.size());

    std::map<std::string, std::vector<Passage>> by_character;
    for (const auto& p : passages) by_character[p.character_id].push_back(p);

    std::set<AttributeKind> all_attributes(all_attribute_kinds().begin(),
                                           all_attribute_kinds().end());
    std::mutex stats_mutex;

    auto process = [&](std::size_t index) {
        const GoldRecord& rec = characters[index];
        CharacterIdentity identity = identity_of(rec);
        std::vector<Passage> own;
        if (auto it = by_character.find(rec.character_id);
            it != by_character.end()) {
            own = it->second;
        }
        try {
            RetrievalResult selection;
            selection.character_id = rec.character_id;
            if (!own.empty()) {
                selection =
                    retrieve_for_character(embedder, identity, own,
                                           options.retrieval);
            }
            InferencePrompt prompt =
                build_prompt(identity, selection, own, all_attributes,
                             options.prompt_template);
            RawModelOutput output =
                run_inference(prompt, chat, options.generation);
            RepairResult repaired = repair_json(output.text);
            CharacterPrediction pred =
                parse_prediction(repaired.text, rec.character_id);
            pred.provenance.model_id = output.model_id;
            pred.provenance.template_version = prompt.template_version;
            pred.provenance.timestamp =
                util::timestamp_utc(options.frozen_time);
            {
                std::lock_guard<std::mutex> lock(stats_mutex);
                if (repaired.log.any_applied()) ++outcome.stats.n_repaired;
                for (const auto& step : repaired.log.steps) {
                    if (step.applied) ++outcome.stats.rule_counts[step.rule];
                }
                if (progress) {
                    *progress << rec.character_id << " " << rec.name << ": ok"
                              << (repaired.log.any_applied() ? " (repaired)"
                                                             : "")
                              << "\n";
                }
            }
            outcome.predictions[index] = std::move(pred);
        } catch (const Error& e) {
            CharacterPrediction pred = null_prediction(
                rec.character_id, e.what(), chat.id(),
                options.prompt_template.version, options.frozen_time);
            {
                std::lock_guard<std::mutex> lock(stats_mutex);
                ++outcome.stats.n_failed;
                if (progress) {
                    *progress << rec.character_id << " " << rec.name
                              << ": failed (" << e.what() << ")\n";
                }
            }
            outcome.predictions[index] = std::move(pred);
        }
    };

    const int parallel = std::max(1, options.parallel);
    if (parallel == 1) {
        for (std::size_t i = 0; i < characters.size(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        const std::size_t n_workers = std::min<std::size_t>(
            static_cast<std::size_t>(parallel), characters.size());
        workers.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < characters.size();
                     i = next.fetch_add(1)) {
                    process(i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }
    return outcome;
}

}  // namespace svocal
