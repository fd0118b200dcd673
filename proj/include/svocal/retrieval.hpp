#pragma once

#include <map>
#include <string>
#include <vector>

#include "svocal/attributes.hpp"
#include "svocal/backends.hpp"
#include "svocal/corpus.hpp"

namespace svocal {

struct RetrievalConfig {
    int k = 10;
    std::string general_instruction =
        "Given a question about a fictional character, retrieve passages "
        "from the novel that answer it.";
    int window_words = 200;
    // Optional instruction overrides for the two embedding calls. Empty
    // means the general instruction is used for queries and none for
    // passages.
    std::string query_prefix;
    std::string passage_prefix;
};

struct ScoredPassage {
    std::string passage_id;
    double score = 0.0;
};

// Retrieval outcome for one character: per-attribute ranked passage ids plus
// the deduplicated union used to build the prompt.
struct RetrievalResult {
    std::string character_id;
    std::map<AttributeKind, std::vector<ScoredPassage>> per_attribute;
    std::vector<std::string> merged_passage_ids;
};

// Fills the attribute question template with the character's name.
std::string render_query(AttributeKind kind, const std::string& name);

// Scores every passage against the query embedding, best first. Ties are
// broken by ascending start position so ranking is deterministic.
std::vector<ScoredPassage> score_passages(
    const std::vector<double>& query_embedding,
    const std::vector<Passage>& passages,
    const std::vector<std::vector<double>>& passage_embeddings);

// Runs all eight attribute queries for one character and merges the top-k
// lists into a single ordered, deduplicated passage id list.
RetrievalResult retrieve_for_character(
    EmbeddingBackend& backend, const CharacterIdentity& character,
    const std::vector<Passage>& passages, const RetrievalConfig& config);

}  // namespace svocal
