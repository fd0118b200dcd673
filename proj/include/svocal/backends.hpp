#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace svocal {

struct BackendConfig {
    std::string base_url;
    std::string model_name;
    double timeout_seconds = 30.0;
    int max_parallel = 1;
    int retry_max_attempts = 2;      // retries after the first try
    double retry_backoff_seconds = 0.25;
    int batch_size = 16;
    std::string api_key_env = "SVOCAL_API_KEY";
};

struct GenerationConfig {
    double temperature = 0.0;
    int max_tokens = 1024;
    // Opaque passthrough parameters, recorded in provenance.
    std::map<std::string, std::string> extra;
};

struct RawModelOutput {
    std::string text;
    std::string model_id;
    double seconds = 0.0;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    // One unit vector per text, in input order; instruction conditions the
    // representation.
    virtual std::vector<std::vector<double>> embed(
        const std::string& instruction, const std::vector<std::string>& texts) = 0;
    virtual std::string id() const = 0;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual RawModelOutput complete(const std::string& system_text,
                                    const std::string& user_text,
                                    const GenerationConfig& config) = 0;
    virtual std::string id() const = 0;
};

void l2_normalize(std::vector<double>& v);
double cosine(const std::vector<double>& a, const std::vector<double>& b);

// ------------------------------------------------------------------
// Deterministic mocks.
// ------------------------------------------------------------------

struct MockChatFixture {
    std::string reply;
    // Applied in order; recognized: think, fences, unquote_items.
    std::vector<std::string> wrappers;
};

// Unit vector of fixed dim derived from a content hash of (instruction,
// text); bit-identical across runs and platforms for a fixed seed.
std::unique_ptr<EmbeddingBackend> make_mock_embedding_backend(
    std::uint64_t seed, std::size_t dim = 64);

// Serves canned replies; the fixture whose key (a character name) occurs
// earliest in the user prompt is chosen, longest key on position ties. A
// miss either throws or returns an all-null attributes object, per
// error_on_miss.
std::unique_ptr<ChatBackend> make_mock_chat_backend(
    std::map<std::string, MockChatFixture> fixtures, bool error_on_miss = false);

std::pair<std::unique_ptr<EmbeddingBackend>, std::unique_ptr<ChatBackend>>
make_mock_backends(std::uint64_t seed,
                   std::map<std::string, MockChatFixture> fixtures = {},
                   bool error_on_miss = false);

// Fixture file: JSON object mapping character name to {reply: object or
// string, wrappers: [..]}.
std::map<std::string, MockChatFixture> load_mock_chat_fixtures(
    const std::string& path);

// ------------------------------------------------------------------
// HTTP clients for embeddings/chat-completions services.
// ------------------------------------------------------------------

std::unique_ptr<EmbeddingBackend> make_http_embedding_backend(
    const BackendConfig& config);
std::unique_ptr<ChatBackend> make_http_chat_backend(const BackendConfig& config);

}  // namespace svocal
