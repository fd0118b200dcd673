#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "svocal/backends.hpp"
#include "svocal/corpus.hpp"
#include "svocal/dataset.hpp"
#include "svocal/errors.hpp"
#include "svocal/pipeline.hpp"
#include "svocal/util.hpp"
#include "test_helpers.hpp"

using namespace svocal;

namespace {

bool any_contains(const std::vector<std::string>& lines,
                  const std::string& needle) {
    return std::any_of(lines.begin(), lines.end(), [&](const std::string& s) {
        return s.find(needle) != std::string::npos;
    });
}

IngestResult ingest_fixture_corpus() {
    auto books = load_book_manifest(testutil::fixture_path("books.jsonl"));
    auto characters = load_gold(testutil::fixture_path("characters.jsonl"));
    return ingest_corpus(books, characters);
}

InferOptions fixture_infer_options() {
    InferOptions options;
    options.retrieval.k = 10;
    options.frozen_time = true;
    return options;
}

}  // namespace

TEST_CASE("compute_run_id is stable and covers config, inputs and seed") {
    std::map<std::string, std::string> config{{"model", "m1"}, {"k", "10"}};
    std::map<std::string, std::string> hashes{{"a.jsonl", "00ff"},
                                              {"b.txt", "1234"}};

    std::string base = compute_run_id(config, hashes, 7);
    CHECK(base == compute_run_id(config, hashes, 7));
    CHECK(base.size() == 16);
    CHECK(base.find_first_not_of("0123456789abcdef") == std::string::npos);

    auto config2 = config;
    config2["k"] = "11";
    CHECK(compute_run_id(config2, hashes, 7) != base);

    auto hashes2 = hashes;
    hashes2["b.txt"] = "1235";
    CHECK(compute_run_id(config, hashes2, 7) != base);

    CHECK(compute_run_id(config, hashes, 8) != base);
}

TEST_CASE("make_run_manifest hashes inputs and pins frozen timestamps") {
    auto dir = testutil::make_temp_dir("manifest");
    auto input = (dir / "gold.jsonl").string();
    util::write_file(input, "{\"character_id\": \"ch0001\"}\n");

    auto manifest = make_run_manifest(
        "infer", {{"model", "mock"}}, {input}, {"mock-embedding", "mock-chat"},
        42, true);

    CHECK(manifest.command == "infer");
    CHECK(manifest.seed == 42);
    CHECK(manifest.started_at == "1970-01-01T00:00:00Z");
    CHECK(manifest.backend_ids ==
          std::vector<std::string>{"mock-embedding", "mock-chat"});
    REQUIRE(manifest.input_hashes.count(input) == 1);
    CHECK(manifest.input_hashes.at(input) ==
          util::hex64(util::fnv1a64(util::read_file(input))));
    CHECK(manifest.run_id ==
          compute_run_id(manifest.config_snapshot, manifest.input_hashes, 42));

    util::write_file(input, "{\"character_id\": \"ch0002\"}\n");
    auto changed = make_run_manifest("infer", {{"model", "mock"}}, {input},
                                     {"mock-embedding", "mock-chat"}, 42, true);
    CHECK(changed.run_id != manifest.run_id);
}

TEST_CASE("make_run_manifest rejects unreadable input paths") {
    CHECK_THROWS_AS(make_run_manifest("infer", {}, {"/nonexistent/gold.jsonl"},
                                      {}, 1, true),
                    ContractError);
}

TEST_CASE("save_run_manifest writes a JSON document keyed by run_id") {
    auto dir = testutil::make_temp_dir("manifest_save");
    RunManifest manifest;
    manifest.run_id = "deadbeef00112233";
    manifest.command = "evaluate";
    manifest.config_snapshot = {{"model", "mock"}};
    manifest.input_hashes = {{"gold.jsonl", "aa"}};
    manifest.started_at = "1970-01-01T00:00:00Z";
    manifest.backend_ids = {"mock-embedding"};
    manifest.seed = 3;

    auto path = (dir / "run.json").string();
    save_run_manifest(path, manifest);
    auto doc = nlohmann::json::parse(util::read_file(path));
    CHECK(doc.at("run_id") == "deadbeef00112233");
    CHECK(doc.at("command") == "evaluate");
    CHECK(doc.at("seed") == 3);
    CHECK(doc.at("started_at") == "1970-01-01T00:00:00Z");
    CHECK(doc.at("config").at("model") == "mock");
    CHECK(doc.at("input_hashes").at("gold.jsonl") == "aa");
    CHECK(doc.at("backends")[0] == "mock-embedding");
}

TEST_CASE("ingest_corpus windows every fixture character and counts per book") {
    auto result = ingest_fixture_corpus();

    CHECK(result.errors.empty());
    REQUIRE(result.per_book_counts.count("bk_hollow") == 1);
    REQUIRE(result.per_book_counts.count("bk_voyage") == 1);
    CHECK(result.per_book_counts.at("bk_hollow") == 20);
    CHECK(result.per_book_counts.at("bk_voyage") == 15);
    CHECK(result.passages.size() == 35);

    std::map<std::string, std::size_t> per_character;
    for (const auto& p : result.passages) {
        per_character[p.character_id]++;
        CHECK(!p.text.empty());
        CHECK(p.end_word > p.start_word);
    }
    CHECK(per_character.at("ch0001") == 12);
    CHECK(per_character.at("ch0002") == 8);
    CHECK(per_character.at("ch0003") == 8);
    CHECK(per_character.at("ch0004") == 7);

    // bk_hollow carries Gutenberg-style markers, bk_voyage does not.
    CHECK(any_contains(result.warnings, "bk_voyage"));
    CHECK(any_contains(result.warnings, "no boilerplate markers found"));
    CHECK_FALSE(any_contains(result.warnings, "is never mentioned in"));
}

TEST_CASE("ingest_corpus validates the window size") {
    auto books = load_book_manifest(testutil::fixture_path("books.jsonl"));
    auto characters = load_gold(testutil::fixture_path("characters.jsonl"));
    CHECK_THROWS_AS(ingest_corpus(books, characters, 0), ContractError);
    CHECK_THROWS_AS(ingest_corpus(books, characters, -4), ContractError);
}

TEST_CASE("ingest_corpus collects per-book read failures instead of throwing") {
    std::vector<BookManifestEntry> books{
        {"bk_gone", "Lost Book", "/nonexistent/book.txt"}};
    std::vector<GoldRecord> characters;
    GoldRecord rec;
    rec.character_id = "ch0009";
    rec.book_id = "bk_gone";
    rec.name = "Nobody";
    characters.push_back(rec);

    auto result = ingest_corpus(books, characters);
    CHECK(result.passages.empty());
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].find("bk_gone") != std::string::npos);
}

TEST_CASE("ingest_corpus warns about unmentioned and orphaned characters") {
    auto books = load_book_manifest(testutil::fixture_path("books.jsonl"));
    auto characters = load_gold(testutil::fixture_path("characters.jsonl"));

    GoldRecord ghost;
    ghost.character_id = "ch0100";
    ghost.book_id = "bk_hollow";
    ghost.name = "Evangeline Thorpe";
    characters.push_back(ghost);

    GoldRecord orphan_a;
    orphan_a.character_id = "ch0101";
    orphan_a.book_id = "bk_missing";
    orphan_a.name = "Orphan One";
    characters.push_back(orphan_a);
    GoldRecord orphan_b = orphan_a;
    orphan_b.character_id = "ch0102";
    orphan_b.name = "Orphan Two";
    characters.push_back(orphan_b);

    auto result = ingest_corpus(books, characters);
    CHECK(result.passages.size() == 35);
    CHECK(any_contains(result.warnings,
                       "character ch0100 (Evangeline Thorpe) is never "
                       "mentioned in bk_hollow"));
    CHECK(any_contains(result.warnings,
                       "book bk_missing (2 characters) is not in the manifest"));
}

TEST_CASE("infer_characters produces predictions for the fixture corpus") {
    auto ingested = ingest_fixture_corpus();
    auto characters = load_gold(testutil::fixture_path("characters.jsonl"));
    auto fixtures =
        load_mock_chat_fixtures(testutil::fixture_path("mock_replies.json"));
    auto embedder = make_mock_embedding_backend(7);
    auto chat = make_mock_chat_backend(std::move(fixtures));

    std::ostringstream progress;
    auto outcome = infer_characters(characters, ingested.passages, *embedder,
                                    *chat, fixture_infer_options(), &progress);

    CHECK(outcome.stats.n_characters == 4);
    CHECK(outcome.stats.n_failed == 0);
    REQUIRE(outcome.predictions.size() == 4);

    const auto& mira = outcome.predictions[0];
    CHECK(mira.character_id == "ch0001");
    CHECK(mira.age == "adult");
    CHECK(mira.gender == "female");
    CHECK(mira.origin == std::vector<std::string>{"Prague"});
    CHECK(mira.residence == std::vector<std::string>{"Vienna"});
    CHECK(mira.spoken_languages == std::vector<std::string>{"Czech", "German"});
    CHECK(mira.type_value == "human");
    CHECK(mira.occupation == std::vector<std::string>{"clockmaker"});
    CHECK(mira.physical_health == "consumptive");
    CHECK(!mira.error.has_value());
    CHECK(mira.provenance.model_id == "mock-chat");
    CHECK(mira.provenance.template_version == "prompt-v1");
    CHECK(mira.provenance.timestamp == "1970-01-01T00:00:00Z");

    const auto& tobias = outcome.predictions[1];
    CHECK(tobias.character_id == "ch0002");
    CHECK(tobias.age == "senior");
    CHECK(tobias.occupation == std::vector<std::string>{"lamplighter"});

    const auto& ilsa = outcome.predictions[2];
    CHECK(ilsa.character_id == "ch0003");
    CHECK(ilsa.age == "teenager");
    CHECK(ilsa.origin == std::vector<std::string>{"Hamburg"});
    CHECK(ilsa.residence.empty());
    CHECK(ilsa.spoken_languages ==
          std::vector<std::string>{"German", "English"});
    CHECK(ilsa.occupation == std::vector<std::string>{"student"});
    CHECK(!ilsa.physical_health.has_value());

    const auto& cat = outcome.predictions[3];
    CHECK(cat.character_id == "ch0004");
    CHECK(!cat.age.has_value());
    CHECK(cat.gender == "male");
    CHECK(cat.origin.empty());
    CHECK(cat.residence == std::vector<std::string>{"Aurora"});
    CHECK(cat.type_value == "cat");
    CHECK(cat.occupation == std::vector<std::string>{"mouser"});
    CHECK(cat.physical_health == "healthy");

    // Every canned reply arrives damaged in a different way.
    CHECK(outcome.stats.n_repaired == 4);
    CHECK(outcome.stats.rule_counts.at("strip_think_tags") == 1);
    CHECK(outcome.stats.rule_counts.at("strip_code_fences") == 1);
    CHECK(outcome.stats.rule_counts.at("normalize_python_literals") == 1);
    CHECK(outcome.stats.rule_counts.at("quote_list_items") == 2);
    CHECK(outcome.stats.rule_counts.at("fix_brackets_and_commas") == 1);

    auto lines = progress.str();
    CHECK(lines.find("ch0001 Mira Voss: ok (repaired)") != std::string::npos);
    CHECK(lines.find("ch0004 Whiskerjack: ok (repaired)") != std::string::npos);
    CHECK(lines.find("failed") == std::string::npos);
}

TEST_CASE("infer_characters handles characters without passages") {
    std::vector<GoldRecord> characters;
    GoldRecord rec;
    rec.character_id = "ch0200";
    rec.book_id = "bk_none";
    rec.name = "Silent Figure";
    characters.push_back(rec);

    auto embedder = make_mock_embedding_backend(7);
    auto chat = make_mock_chat_backend({});

    auto outcome = infer_characters(characters, {}, *embedder, *chat,
                                    fixture_infer_options(), nullptr);
    CHECK(outcome.stats.n_failed == 0);
    REQUIRE(outcome.predictions.size() == 1);
    const auto& pred = outcome.predictions[0];
    CHECK(pred.character_id == "ch0200");
    CHECK(!pred.error.has_value());
    CHECK(!pred.age.has_value());
    CHECK(!pred.gender.has_value());
    CHECK(pred.origin.empty());
    CHECK(!prediction_has(pred, AttributeKind::type));
}

TEST_CASE("infer_characters records per-character failures as null predictions") {
    std::vector<GoldRecord> characters;
    GoldRecord rec;
    rec.character_id = "ch0300";
    rec.book_id = "bk_none";
    rec.name = "Unlisted Person";
    characters.push_back(rec);

    auto embedder = make_mock_embedding_backend(7);

    SUBCASE("backend miss") {
        auto chat = make_mock_chat_backend({}, true);
        std::ostringstream progress;
        auto outcome = infer_characters(characters, {}, *embedder, *chat,
                                        fixture_infer_options(), &progress);
        CHECK(outcome.stats.n_failed == 1);
        REQUIRE(outcome.predictions.size() == 1);
        const auto& pred = outcome.predictions[0];
        CHECK(pred.character_id == "ch0300");
        REQUIRE(pred.error.has_value());
        CHECK(pred.error->find("ch0300") != std::string::npos);
        CHECK(pred.error->find("no mock fixture matches the prompt") !=
              std::string::npos);
        CHECK(pred.provenance.model_id == "mock-chat");
        CHECK(pred.provenance.timestamp == "1970-01-01T00:00:00Z");
        CHECK(progress.str().find("ch0300 Unlisted Person: failed (") !=
              std::string::npos);
    }

    SUBCASE("unrepairable reply") {
        std::map<std::string, MockChatFixture> fixtures;
        fixtures["Unlisted Person"] = {"no structured answer here", {}};
        auto chat = make_mock_chat_backend(std::move(fixtures));
        auto outcome = infer_characters(characters, {}, *embedder, *chat,
                                        fixture_infer_options(), nullptr);
        CHECK(outcome.stats.n_failed == 1);
        REQUIRE(outcome.predictions[0].error.has_value());
        CHECK(outcome.predictions[0].error->find(
                  "text does not parse as JSON after all repair rules") !=
              std::string::npos);
        CHECK(outcome.stats.n_repaired == 0);
    }
}

TEST_CASE("infer_characters parallel execution matches the serial run") {
    auto ingested = ingest_fixture_corpus();
    auto characters = load_gold(testutil::fixture_path("characters.jsonl"));
    auto fixtures =
        load_mock_chat_fixtures(testutil::fixture_path("mock_replies.json"));

    auto options = fixture_infer_options();
    auto embedder_a = make_mock_embedding_backend(7);
    auto chat_a = make_mock_chat_backend(fixtures);
    auto serial = infer_characters(characters, ingested.passages, *embedder_a,
                                   *chat_a, options, nullptr);

    options.parallel = 4;
    auto embedder_b = make_mock_embedding_backend(7);
    auto chat_b = make_mock_chat_backend(fixtures);
    auto parallel = infer_characters(characters, ingested.passages,
                                     *embedder_b, *chat_b, options, nullptr);

    REQUIRE(serial.predictions.size() == parallel.predictions.size());
    for (std::size_t i = 0; i < serial.predictions.size(); ++i) {
        CHECK(prediction_to_json(serial.predictions[i]) ==
              prediction_to_json(parallel.predictions[i]));
    }
    CHECK(serial.stats.n_repaired == parallel.stats.n_repaired);
    CHECK(serial.stats.n_failed == parallel.stats.n_failed);
    CHECK(serial.stats.rule_counts == parallel.stats.rule_counts);
}
