#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "svocal/backends.hpp"
#include "svocal/corpus.hpp"
#include "svocal/dataset.hpp"
#include "svocal/inference.hpp"
#include "svocal/prediction.hpp"
#include "svocal/retrieval.hpp"

namespace svocal {

// Identifies one run; every artifact file a run writes embeds the run_id so
// outputs can be traced back to their inputs and configuration.
struct RunManifest {
    std::string run_id;
    std::string command;
    std::map<std::string, std::string> config_snapshot;
    std::map<std::string, std::string> input_hashes;  // path -> content hash
    std::string started_at;
    std::vector<std::string> backend_ids;
    std::uint64_t seed = 0;
};

// Stable content hash over configuration, input hashes and seed.
std::string compute_run_id(
    const std::map<std::string, std::string>& config_snapshot,
    const std::map<std::string, std::string>& input_hashes, std::uint64_t seed);

RunManifest make_run_manifest(const std::string& command,
                              const std::map<std::string, std::string>& config,
                              const std::vector<std::string>& input_paths,
                              const std::vector<std::string>& backend_ids,
                              std::uint64_t seed, bool frozen_time);

void save_run_manifest(const std::string& path, const RunManifest& manifest);

struct IngestResult {
    std::vector<Passage> passages;
    std::map<std::string, std::size_t> per_book_counts;
    std::vector<std::string> warnings;  // non-fatal (missing markers, no mentions)
    std::vector<std::string> errors;    // per-book failures
};

// Normalizes every book in the manifest and extracts mention windows for
// every character whose book_id matches. Book failures are collected, not
// thrown; a character without mentions yields a warning and no passages.
IngestResult ingest_corpus(const std::vector<BookManifestEntry>& books,
                           const std::vector<GoldRecord>& characters,
                           int window_words = 200,
                           bool strip_boilerplate = true);

struct InferStats {
    std::size_t n_characters = 0;
    std::size_t n_failed = 0;
    std::size_t n_repaired = 0;  // outputs where at least one rule applied
    std::map<std::string, std::size_t> rule_counts;
};

struct InferOutcome {
    std::vector<CharacterPrediction> predictions;  // one per character, in order
    InferStats stats;
};

struct InferOptions {
    RetrievalConfig retrieval;
    GenerationConfig generation;
    PromptTemplate prompt_template;
    int parallel = 1;
    bool frozen_time = false;  // provenance timestamps pinned to the epoch

    InferOptions() : prompt_template(default_prompt_template()) {}
};

// Full per-character loop: retrieval, prompt, chat completion, repair,
// parse. A failure on one character produces a null prediction carrying the
// error text instead of aborting the run.
InferOutcome infer_characters(const std::vector<GoldRecord>& characters,
                              const std::vector<Passage>& passages,
                              EmbeddingBackend& embedder, ChatBackend& chat,
                              const InferOptions& options,
                              std::ostream* progress = nullptr);

}  // namespace svocal
