#include "svocal/backends.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "svocal/attributes.hpp"
#include "svocal/errors.hpp"
#include "svocal/postprocess.hpp"
#include "svocal/util.hpp"
#include "test_helpers.hpp"

using namespace svocal;

TEST_CASE("mock embeddings are deterministic unit vectors") {
    auto a = make_mock_embedding_backend(7, 64);
    auto b = make_mock_embedding_backend(7, 64);
    auto va = a->embed("inst", {"the clockmaker", "the ship"});
    auto vb = b->embed("inst", {"the clockmaker", "the ship"});
    REQUIRE(va.size() == 2);
    CHECK(va == vb);
    CHECK(va[0].size() == 64);
    double norm = 0.0;
    for (double x : va[0]) norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a->id() == "mock-embedding");
}

TEST_CASE("mock embeddings depend on seed, instruction and text") {
    auto a = make_mock_embedding_backend(7, 32);
    auto b = make_mock_embedding_backend(8, 32);
    auto base = a->embed("inst", {"Prague"})[0];
    CHECK(a->embed("other inst", {"Prague"})[0] != base);
    CHECK(a->embed("inst", {"Vienna"})[0] != base);
    CHECK(b->embed("inst", {"Prague"})[0] != base);
    CHECK(a->embed("inst", {"Prague"})[0] == base);
}

TEST_CASE("mock embedding rejects a zero dimension") {
    CHECK_THROWS_AS(make_mock_embedding_backend(1, 0), ContractError);
}

TEST_CASE("cosine is an inner product with contract checks") {
    std::vector<double> a{1.0, 0.0};
    std::vector<double> b{0.0, 1.0};
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, b) == doctest::Approx(0.0));
    CHECK_THROWS_AS(cosine(a, {1.0}), ContractError);
    CHECK_THROWS_AS(cosine({}, {}), ContractError);
}

TEST_CASE("l2 normalize leaves a unit basis vector for zero input") {
    std::vector<double> v{0.0, 0.0, 0.0};
    l2_normalize(v);
    CHECK(v == std::vector<double>{1.0, 0.0, 0.0});
    std::vector<double> w{3.0, 4.0};
    l2_normalize(w);
    CHECK(w[0] == doctest::Approx(0.6));
    CHECK(w[1] == doctest::Approx(0.8));
}

TEST_CASE("mock chat picks the fixture occurring earliest in the prompt") {
    std::map<std::string, MockChatFixture> fixtures;
    fixtures["Mira Voss"] = {R"({"gender": "female"})", {}};
    fixtures["Tobias Crane"] = {R"({"gender": "male"})", {}};
    auto chat = make_mock_chat_backend(std::move(fixtures));
    GenerationConfig gen;
    auto out = chat->complete(
        "sys", "Character: Tobias Crane\nPassage: he greeted Mira Voss.", gen);
    CHECK(out.text == R"({"gender": "male"})");
    CHECK(out.model_id == "mock-chat");
    CHECK(chat->id() == "mock-chat");
}

TEST_CASE("mock chat breaks position ties toward the longer key") {
    std::map<std::string, MockChatFixture> fixtures;
    fixtures["Mira"] = {R"({"age": "child"})", {}};
    fixtures["Mira Voss"] = {R"({"age": "adult"})", {}};
    auto chat = make_mock_chat_backend(std::move(fixtures));
    GenerationConfig gen;
    auto out = chat->complete("sys", "Character: Mira Voss", gen);
    CHECK(out.text == R"({"age": "adult"})");
}

TEST_CASE("mock chat miss yields an all null reply by default") {
    auto chat = make_mock_chat_backend({});
    GenerationConfig gen;
    auto out = chat->complete("sys", "Character: Nobody", gen);
    auto doc = nlohmann::json::parse(out.text);
    REQUIRE(doc.is_object());
    CHECK(doc.size() == 8);
    for (auto kind : all_attribute_kinds()) {
        auto key = std::string(attribute_name(kind));
        REQUIRE(doc.contains(key));
        CHECK(doc[key].is_null());
    }
}

TEST_CASE("mock chat miss throws when configured to") {
    auto chat = make_mock_chat_backend({}, true);
    GenerationConfig gen;
    CHECK_THROWS_AS(chat->complete("sys", "Character: Nobody", gen),
                    BackendError);
}

TEST_CASE("mock chat wrappers damage the reply in repairable ways") {
    const std::string reply =
        R"({"origin": ["Paris", "Le Havre"], "spoken_languages": ["French"]})";
    GenerationConfig gen;

    auto run = [&](const std::vector<std::string>& wrappers) {
        std::map<std::string, MockChatFixture> fixtures;
        fixtures["Ada"] = {reply, wrappers};
        auto chat = make_mock_chat_backend(std::move(fixtures));
        return chat->complete("sys", "Character: Ada", gen).text;
    };

    auto think = run({"think"});
    CHECK(util::starts_with(think, "<think>"));
    CHECK(think.find(reply) != std::string::npos);

    auto fences = run({"fences"});
    CHECK(util::starts_with(fences, "```json"));

    auto unquoted = run({"unquote_items"});
    // Single alphabetic words lose their quotes; the two-word place keeps
    // them, as would null and friends.
    CHECK(unquoted.find("[Paris, \"Le Havre\"]") != std::string::npos);
    CHECK(unquoted.find("[French]") != std::string::npos);

    // Each wrapped form repairs back to the original object.
    for (const auto& damaged : {think, fences, unquoted}) {
        auto repaired = repair_json(damaged);
        CHECK(nlohmann::json::parse(repaired.text) ==
              nlohmann::json::parse(reply));
    }
}

TEST_CASE("mock chat rejects unknown wrappers") {
    std::map<std::string, MockChatFixture> fixtures;
    fixtures["Ada"] = {R"({"gender": "female"})", {"rot13"}};
    auto chat = make_mock_chat_backend(std::move(fixtures));
    GenerationConfig gen;
    CHECK_THROWS_AS(chat->complete("sys", "Character: Ada", gen), ContractError);
}

TEST_CASE("chat fixtures load from their file format") {
    auto fixtures =
        load_mock_chat_fixtures(testutil::fixture_path("mock_replies.json"));
    REQUIRE(fixtures.size() == 4);
    REQUIRE(fixtures.count("Mira Voss"));
    REQUIRE(fixtures.count("Ilsa Brandt"));

    // Object replies are stored as compact JSON.
    auto mira = nlohmann::json::parse(fixtures["Mira Voss"].reply);
    CHECK(mira["gender"] == "female");
    CHECK(fixtures["Mira Voss"].wrappers == std::vector<std::string>{"think"});

    // String replies pass through verbatim, however damaged.
    CHECK_THROWS(nlohmann::json::parse(fixtures["Ilsa Brandt"].reply));
    CHECK(fixtures["Ilsa Brandt"].reply.find("None") != std::string::npos);
}

TEST_CASE("chat fixture loading validates its input") {
    auto dir = testutil::make_temp_dir("mockfix");
    auto write = [&](const char* name, const std::string& body) {
        auto path = (dir / name).string();
        util::write_file(path, body);
        return path;
    };
    CHECK_THROWS_AS(load_mock_chat_fixtures(write("bad.json", "{oops")),
                    LoadError);
    CHECK_THROWS_AS(load_mock_chat_fixtures(write("arr.json", "[]")), LoadError);
    CHECK_THROWS_AS(
        load_mock_chat_fixtures(write("noreply.json", R"({"Ada": {}})")),
        LoadError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("paired mock backends share construction") {
    auto [embed, chat] = make_mock_backends(7);
    CHECK(embed->id() == "mock-embedding");
    CHECK(chat->id() == "mock-chat");
}
