#include "svocal/retrieval.hpp"

#include <algorithm>
#include <set>

#include "svocal/errors.hpp"
#include "svocal/util.hpp"

namespace svocal {

std::string render_query(AttributeKind kind, const std::string& name) {
    switch (kind) {
        case AttributeKind::age:
            return "Is " + name + " a child, a teenager, an adult, or a senior?";
        case AttributeKind::gender:
            return "Is " + name + " male or female?";
        case AttributeKind::origin:
            return "Where is " + name + " from?";
        case AttributeKind::residence:
            return "Where does " + name + " live?";
        case AttributeKind::spoken_languages:
            return "What languages does " + name + " speak?";
        case AttributeKind::type:
            return "What type of entity is " + name + "?";
        case AttributeKind::occupation:
            return "What is " + name + "'s occupation?";
        case AttributeKind::physical_health:
            return "How is " + name + "'s health condition?";
    }
    throw ContractError("unknown attribute kind");
}

std::vector<ScoredPassage> score_passages(
    const std::vector<double>& query_embedding,
    const std::vector<Passage>& passages,
    const std::vector<std::vector<double>>& passage_embeddings) {
    if (passages.size() != passage_embeddings.size())
        throw ContractError("passage and embedding counts differ");
    std::vector<std::size_t> order(passages.size());
    std::vector<double> scores(passages.size());
    for (std::size_t i = 0; i < passages.size(); ++i) {
        order[i] = i;
        scores[i] = cosine(query_embedding, passage_embeddings[i]);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        if (passages[a].start_word != passages[b].start_word)
            return passages[a].start_word < passages[b].start_word;
        return passages[a].passage_id < passages[b].passage_id;
    });
    std::vector<ScoredPassage> ranked;
    ranked.reserve(passages.size());
    for (std::size_t i : order) {
        ranked.push_back({passages[i].passage_id, scores[i]});
    }
    return ranked;
}

RetrievalResult retrieve_for_character(EmbeddingBackend& backend,
                                       const CharacterIdentity& character,
                                       const std::vector<Passage>& passages,
                                       const RetrievalConfig& config) {
    if (passages.empty())
        throw ContractError("retrieval needs at least one passage for " +
                            character.character_id);
    if (config.k <= 0) throw ContractError("retrieval k must be positive");

    std::vector<std::string> texts;
    texts.reserve(passages.size());
    for (const auto& p : passages) texts.push_back(p.text);

    std::vector<std::vector<double>> passage_embeddings;
    try {
        passage_embeddings = backend.embed(config.passage_prefix, texts);
    } catch (const BackendError& e) {
        throw RetrievalError("passages", e.what());
    }

    const std::string query_instruction = config.query_prefix.empty()
                                              ? config.general_instruction
                                              : config.query_prefix;
    std::vector<std::string> queries;
    for (AttributeKind kind : all_attribute_kinds()) {
        queries.push_back(render_query(kind, character.name));
    }
    std::vector<std::vector<double>> query_embeddings;
    try {
        query_embeddings = backend.embed(query_instruction, queries);
    } catch (const BackendError& e) {
        throw RetrievalError("queries", e.what());
    }
    if (query_embeddings.size() != kAttributeCount)
        throw RetrievalError("queries", "embedding count mismatch");

    RetrievalResult result;
    result.character_id = character.character_id;
    std::set<std::string> seen;
    std::size_t qi = 0;
    for (AttributeKind kind : all_attribute_kinds()) {
        auto ranked =
            score_passages(query_embeddings[qi++], passages, passage_embeddings);
        if (ranked.size() > static_cast<std::size_t>(config.k))
            ranked.resize(static_cast<std::size_t>(config.k));
        for (const auto& sp : ranked) {
            if (seen.insert(sp.passage_id).second) {
                result.merged_passage_ids.push_back(sp.passage_id);
            }
        }
        result.per_attribute.emplace(kind, std::move(ranked));
    }
    return result;
}

}  // namespace svocal
