#include "svocal/inference.hpp"

#include <map>
#include <sstream>

#include <json.hpp>

#include "svocal/errors.hpp"
#include "svocal/retrieval.hpp"
#include "svocal/util.hpp"

namespace svocal {

namespace {

constexpr const char* kSystemText =
    "You are a careful literary analyst. You answer questions about a "
    "fictional character using only the passages provided, and you reply "
    "with a single valid JSON object and nothing else.";

constexpr const char* kUserTemplate =
    "Character: {name}{aliases}\n"
    "\n"
    "Passages from the novel:\n"
    "{passages}\n"
    "\n"
    "Using only the passages above, answer the following questions about "
    "{name}:\n"
    "{attribute_instructions}\n"
    "\n"
    "Reply with a single JSON object with exactly these keys: age, gender, "
    "origin, residence, spoken_languages, type, occupation, "
    "physical_health. Use null for every attribute the passages do not "
    "answer. Do not add other keys, commentary, or markdown.";

}  // namespace

const PromptTemplate& default_prompt_template() {
    static const PromptTemplate tmpl{"prompt-v1", kSystemText, kUserTemplate};
    return tmpl;
}

PromptTemplate load_prompt_template(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(util::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError("prompt template " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc.contains("user"))
        throw LoadError("prompt template " + path +
                        " must be an object with version and user keys");
    PromptTemplate tmpl;
    tmpl.version = doc["version"].get<std::string>();
    tmpl.system_text = doc.value("system", std::string(kSystemText));
    tmpl.user_template = doc["user"].get<std::string>();
    for (const char* placeholder :
         {"{name}", "{passages}", "{attribute_instructions}"}) {
        if (!util::contains(tmpl.user_template, placeholder))
            throw LoadError("prompt template " + path + " is missing " +
                            placeholder);
    }
    return tmpl;
}

std::string attribute_instruction(AttributeKind kind, const std::string& name) {
    const std::string question = render_query(kind, name);
    switch (kind) {
        case AttributeKind::age:
            return "- age: " + question +
                   " Answer with one of: child, teenager, adult, senior.";
        case AttributeKind::gender:
            return "- gender: " + question +
                   " Answer with one of: male, female.";
        case AttributeKind::origin:
            return "- origin: " + question +
                   " Answer with a JSON array of strings (regions, countries, "
                   "cities).";
        case AttributeKind::residence:
            return "- residence: " + question +
                   " Answer with a JSON array of strings (regions, countries, "
                   "cities).";
        case AttributeKind::spoken_languages:
            return "- spoken_languages: " + question +
                   " Answer with a JSON array of language names.";
        case AttributeKind::type:
            return "- type: " + question +
                   " Answer with a single string, \"human\" or the kind of "
                   "non-human entity.";
        case AttributeKind::occupation:
            return "- occupation: " + question +
                   " Answer with a JSON array of strings.";
        case AttributeKind::physical_health:
            return "- physical_health: " + question +
                   " Answer with a short string describing their health.";
    }
    throw ContractError("unknown attribute kind");
}

InferencePrompt build_prompt(const CharacterIdentity& identity,
                             const RetrievalResult& selection,
                             const std::vector<Passage>& passages,
                             const std::set<AttributeKind>& attributes,
                             const PromptTemplate& tmpl) {
    if (attributes.empty())
        throw ContractError("build_prompt needs at least one attribute");

    std::map<std::string, const Passage*> by_id;
    for (const auto& p : passages) by_id.emplace(p.passage_id, &p);

    std::ostringstream passage_block;
    std::size_t number = 0;
    for (const auto& pid : selection.merged_passage_ids) {
        auto it = by_id.find(pid);
        if (it == by_id.end())
            throw ContractError("selected passage " + pid +
                                " is not in the passage store");
        passage_block << "[" << ++number << "] " << it->second->text << "\n";
    }
    std::string passage_text = passage_block.str();
    if (!passage_text.empty() && passage_text.back() == '\n')
        passage_text.pop_back();
    if (selection.merged_passage_ids.empty())
        passage_text = "No passages mentioning this character were found.";

    std::ostringstream instruction_block;
    bool first = true;
    for (AttributeKind kind : all_attribute_kinds()) {
        if (!attributes.count(kind)) continue;
        if (!first) instruction_block << "\n";
        instruction_block << attribute_instruction(kind, identity.name);
        first = false;
    }

    std::string alias_text;
    if (!identity.aliases.empty())
        alias_text = " (also known as: " + util::join(identity.aliases, ", ") + ")";

    std::string user_text = tmpl.user_template;
    user_text = util::replace_all(user_text, "{name}", identity.name);
    user_text = util::replace_all(user_text, "{aliases}", alias_text);
    user_text = util::replace_all(user_text, "{passages}", passage_text);
    user_text = util::replace_all(user_text, "{attribute_instructions}",
                                  instruction_block.str());

    InferencePrompt prompt;
    prompt.character_id = identity.character_id;
    prompt.system_text = tmpl.system_text;
    prompt.user_text = user_text;
    prompt.template_version = tmpl.version;
    return prompt;
}

RawModelOutput run_inference(const InferencePrompt& prompt, ChatBackend& backend,
                             const GenerationConfig& config) {
    try {
        return backend.complete(prompt.system_text, prompt.user_text, config);
    } catch (const TimeoutError&) {
        throw;
    } catch (const BackendError& e) {
        throw InferenceError(prompt.character_id, e.what());
    }
}

}  // namespace svocal
