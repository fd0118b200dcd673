#include "svocal/inference.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

#include "svocal/errors.hpp"
#include "svocal/util.hpp"
#include "test_helpers.hpp"

using namespace svocal;

namespace {

Passage make_passage(const std::string& id, const std::string& text) {
    Passage p;
    p.passage_id = id;
    p.book_id = "bk001";
    p.character_id = "ch0001";
    p.text = text;
    return p;
}

std::set<AttributeKind> all_attribute_set() {
    std::set<AttributeKind> attrs;
    for (auto kind : all_attribute_kinds()) attrs.insert(kind);
    return attrs;
}

class ScriptedChat : public ChatBackend {
public:
    std::string last_system;
    std::string last_user;
    int mode = 0;  // 0 reply, 1 backend error, 2 timeout

    RawModelOutput complete(const std::string& system_text,
                            const std::string& user_text,
                            const GenerationConfig&) override {
        last_system = system_text;
        last_user = user_text;
        if (mode == 1) throw BackendError("scripted backend failure");
        if (mode == 2) throw TimeoutError("scripted timeout");
        return {"{\"gender\": \"female\"}", "scripted-chat", 0.01};
    }

    std::string id() const override { return "scripted-chat"; }
};

}  // namespace

TEST_CASE("the default template carries every placeholder") {
    const auto& tmpl = default_prompt_template();
    CHECK(tmpl.version == "prompt-v1");
    CHECK(!tmpl.system_text.empty());
    for (const char* placeholder :
         {"{name}", "{aliases}", "{passages}", "{attribute_instructions}"}) {
        CHECK(util::contains(tmpl.user_template, placeholder));
    }
}

TEST_CASE("attribute instructions name the key and the answer shape") {
    const std::string name = "Mira Voss";
    auto age = attribute_instruction(AttributeKind::age, name);
    CHECK(util::starts_with(age, "- age: "));
    CHECK(util::contains(age, "child, teenager, adult, senior"));
    auto gender = attribute_instruction(AttributeKind::gender, name);
    CHECK(util::contains(gender, "male, female"));
    auto spoken = attribute_instruction(AttributeKind::spoken_languages, name);
    CHECK(util::starts_with(spoken, "- spoken_languages: "));
    CHECK(util::contains(spoken, "JSON array"));
    auto type = attribute_instruction(AttributeKind::type, name);
    CHECK(util::contains(type, "non-human"));
    for (auto kind : all_attribute_kinds()) {
        CHECK(util::contains(attribute_instruction(kind, name), name));
    }
}

TEST_CASE("prompts number passages in merged order") {
    CharacterIdentity mira{"ch0001", "Mira Voss", {"Mira"}};
    std::vector<Passage> passages = {
        make_passage("p1", "She wound the clock."),
        make_passage("p2", "The lantern hissed."),
        make_passage("p3", "Snow fell on Vienna."),
    };
    RetrievalResult selection;
    selection.character_id = "ch0001";
    selection.merged_passage_ids = {"p3", "p1"};

    auto prompt = build_prompt(mira, selection, passages, all_attribute_set());
    CHECK(prompt.character_id == "ch0001");
    CHECK(prompt.template_version == "prompt-v1");
    CHECK(util::contains(prompt.user_text, "[1] Snow fell on Vienna."));
    CHECK(util::contains(prompt.user_text, "[2] She wound the clock."));
    CHECK(!util::contains(prompt.user_text, "The lantern hissed."));
    CHECK(util::contains(prompt.user_text,
                         "Character: Mira Voss (also known as: Mira)"));
    CHECK(util::contains(prompt.user_text, "- age: "));
    CHECK(util::contains(prompt.user_text, "- physical_health: "));
    CHECK(!util::contains(prompt.user_text, "{name}"));
    CHECK(!util::contains(prompt.user_text, "{passages}"));
}

TEST_CASE("prompts without aliases omit the alias clause") {
    CharacterIdentity solo{"ch0002", "Whiskerjack", {}};
    RetrievalResult selection;
    selection.merged_passage_ids = {"p1"};
    auto prompt = build_prompt(solo, selection, {make_passage("p1", "A cat.")},
                               {AttributeKind::type});
    CHECK(util::contains(prompt.user_text, "Character: Whiskerjack\n"));
    CHECK(!util::contains(prompt.user_text, "also known as"));
    // Only the requested attribute appears.
    CHECK(util::contains(prompt.user_text, "- type: "));
    CHECK(!util::contains(prompt.user_text, "- age: "));
}

TEST_CASE("an empty selection states that no passages were found") {
    CharacterIdentity ghost{"ch0003", "Nobody", {}};
    RetrievalResult selection;
    auto prompt = build_prompt(ghost, selection, {}, {AttributeKind::gender});
    CHECK(util::contains(prompt.user_text,
                         "No passages mentioning this character were found."));
}

TEST_CASE("prompt building validates selection and attributes") {
    CharacterIdentity mira{"ch0001", "Mira Voss", {}};
    RetrievalResult selection;
    selection.merged_passage_ids = {"missing"};
    CHECK_THROWS_AS(
        build_prompt(mira, selection, {}, {AttributeKind::gender}),
        ContractError);
    RetrievalResult empty;
    CHECK_THROWS_AS(build_prompt(mira, empty, {}, {}), ContractError);
}

TEST_CASE("prompt templates load and validate from JSON") {
    auto dir = testutil::make_temp_dir("tmpl");
    auto write = [&](const char* name, const std::string& body) {
        auto path = (dir / name).string();
        util::write_file(path, body);
        return path;
    };

    auto good = load_prompt_template(write(
        "good.json",
        R"({"version": "prompt-v2", "system": "Answer tersely.",
            "user": "{name} {aliases} {passages} {attribute_instructions}"})"));
    CHECK(good.version == "prompt-v2");
    CHECK(good.system_text == "Answer tersely.");

    // A missing system key falls back to the default wording.
    auto nosys = load_prompt_template(write(
        "nosys.json",
        R"({"version": "v", "user": "{name} {passages} {attribute_instructions}"})"));
    CHECK(nosys.system_text == default_prompt_template().system_text);

    CHECK_THROWS_AS(load_prompt_template(write("bad.json", "{oops")), LoadError);
    CHECK_THROWS_AS(
        load_prompt_template(write("nover.json", R"({"user": "{name}"})")),
        LoadError);
    CHECK_THROWS_AS(
        load_prompt_template(write(
            "nohole.json", R"({"version": "v", "user": "{name} {passages}"})")),
        LoadError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("inference forwards the prompt and wraps backend failures") {
    CharacterIdentity mira{"ch0001", "Mira Voss", {}};
    RetrievalResult selection;
    selection.merged_passage_ids = {"p1"};
    auto prompt = build_prompt(mira, selection,
                               {make_passage("p1", "She smiled.")},
                               all_attribute_set());
    ScriptedChat chat;
    GenerationConfig gen;

    auto out = run_inference(prompt, chat, gen);
    CHECK(out.text == "{\"gender\": \"female\"}");
    CHECK(chat.last_system == prompt.system_text);
    CHECK(chat.last_user == prompt.user_text);

    chat.mode = 1;
    try {
        run_inference(prompt, chat, gen);
        FAIL("expected InferenceError");
    } catch (const InferenceError& e) {
        CHECK(e.character_id() == "ch0001");
        CHECK(std::string(e.what()).find("scripted backend failure") !=
              std::string::npos);
    }

    // Timeouts pass through untouched so callers can abort the whole run.
    chat.mode = 2;
    CHECK_THROWS_AS(run_inference(prompt, chat, gen), TimeoutError);
}
