#pragma once

#include <set>
#include <string>
#include <vector>

#include "svocal/attributes.hpp"
#include "svocal/backends.hpp"
#include "svocal/corpus.hpp"
#include "svocal/retrieval.hpp"

namespace svocal {

// Prompt wording lives in a small versioned template so runs can swap it
// out and provenance can record which one produced a prediction.
struct PromptTemplate {
    std::string version;
    std::string system_text;
    // Placeholders: {name}, {aliases}, {passages}, {attribute_instructions}.
    std::string user_template;
};

struct InferencePrompt {
    std::string character_id;
    std::string system_text;
    std::string user_text;
    std::string template_version;
};

const PromptTemplate& default_prompt_template();

// Loads a template from a JSON file with keys version, system, user.
PromptTemplate load_prompt_template(const std::string& path);

// One request line per attribute, phrased as the retrieval questions plus
// the expected answer shape.
std::string attribute_instruction(AttributeKind kind, const std::string& name);

InferencePrompt build_prompt(const CharacterIdentity& identity,
                             const RetrievalResult& selection,
                             const std::vector<Passage>& passages,
                             const std::set<AttributeKind>& attributes,
                             const PromptTemplate& tmpl = default_prompt_template());

// Sends the prompt to the chat backend and returns its completion verbatim.
RawModelOutput run_inference(const InferencePrompt& prompt, ChatBackend& backend,
                             const GenerationConfig& config);

}  // namespace svocal
