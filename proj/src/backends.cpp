#include "svocal/backends.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <json.hpp>

#include "svocal/attributes.hpp"
#include "svocal/errors.hpp"
#include "svocal/util.hpp"

namespace svocal {

void l2_normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm <= 0.0) {
        if (!v.empty()) v[0] = 1.0;
        return;
    }
    for (double& x : v) x /= norm;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw ContractError("cosine needs equal-length non-empty vectors");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
}

namespace {

class MockEmbeddingBackend : public EmbeddingBackend {
public:
    MockEmbeddingBackend(std::uint64_t seed, std::size_t dim)
        : seed_(seed), dim_(dim) {}

    std::vector<std::vector<double>> embed(
        const std::string& instruction,
        const std::vector<std::string>& texts) override {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) {
            std::uint64_t h =
                util::fnv1a64(instruction + '\x1f' + text) ^ seed_;
            util::SplitMix64 rng(h);
            std::vector<double> v(dim_);
            for (double& x : v) x = rng.next_double() * 2.0 - 1.0;
            l2_normalize(v);
            out.push_back(std::move(v));
        }
        return out;
    }

    std::string id() const override { return "mock-embedding"; }

private:
    std::uint64_t seed_;
    std::size_t dim_;
};

std::string apply_think_wrapper(const std::string& reply) {
    return "<think>\nLet me scan the passages for clues about this "
           "character.\n</think>\n" +
           reply;
}

std::string apply_fences_wrapper(const std::string& reply) {
    return "```json\n" + reply + "\n```";
}

// Strips quotes from purely alphabetic single-word items inside arrays, the
// malformation the quote-repair rule undoes.
std::string apply_unquote_wrapper(const std::string& reply) {
    std::string out;
    out.reserve(reply.size());
    std::vector<char> stack;
    bool in_str = false;
    bool esc = false;
    std::size_t i = 0;
    while (i < reply.size()) {
        char c = reply[i];
        if (in_str) {
            out += c;
            if (esc) {
                esc = false;
            } else if (c == '\\') {
                esc = true;
            } else if (c == '"') {
                in_str = false;
            }
            ++i;
            continue;
        }
        if (c == '"' && !stack.empty() && stack.back() == '[') {
            std::size_t j = i + 1;
            while (j < reply.size() && reply[j] != '"' && reply[j] != '\\') ++j;
            if (j < reply.size() && reply[j] == '"') {
                std::string content = reply.substr(i + 1, j - i - 1);
                bool alpha = !content.empty() &&
                             std::all_of(content.begin(), content.end(), [](char ch) {
                                 return std::isalpha(static_cast<unsigned char>(ch));
                             });
                if (alpha && content != "null" && content != "true" &&
                    content != "false") {
                    out += content;
                    i = j + 1;
                    continue;
                }
            }
        }
        if (c == '"') {
            in_str = true;
        } else if (c == '{' || c == '[') {
            stack.push_back(c);
        } else if (c == '}' || c == ']') {
            if (!stack.empty()) stack.pop_back();
        }
        out += c;
        ++i;
    }
    return out;
}

std::string null_reply() {
    std::string out = "{";
    bool first = true;
    for (AttributeKind kind : all_attribute_kinds()) {
        if (!first) out += ", ";
        first = false;
        out += "\"" + std::string(attribute_name(kind)) + "\": null";
    }
    out += "}";
    return out;
}

class MockChatBackend : public ChatBackend {
public:
    MockChatBackend(std::map<std::string, MockChatFixture> fixtures,
                    bool error_on_miss)
        : fixtures_(std::move(fixtures)), error_on_miss_(error_on_miss) {}

    RawModelOutput complete(const std::string&, const std::string& user_text,
                            const GenerationConfig&) override {
        // Earliest match wins so the prompt's own subject line beats names
        // that only appear inside quoted passages; longer keys break ties.
        const MockChatFixture* best = nullptr;
        std::size_t best_pos = std::string::npos;
        std::size_t best_len = 0;
        for (const auto& [name, fixture] : fixtures_) {
            std::size_t pos = user_text.find(name);
            if (pos == std::string::npos) continue;
            if (pos < best_pos || (pos == best_pos && name.size() > best_len)) {
                best = &fixture;
                best_pos = pos;
                best_len = name.size();
            }
        }
        if (!best) {
            if (error_on_miss_)
                throw BackendError("no mock fixture matches the prompt");
            return {null_reply(), id(), 0.0};
        }
        std::string text = best->reply;
        for (const auto& wrapper : best->wrappers) {
            if (wrapper == "think") {
                text = apply_think_wrapper(text);
            } else if (wrapper == "fences") {
                text = apply_fences_wrapper(text);
            } else if (wrapper == "unquote_items") {
                text = apply_unquote_wrapper(text);
            } else {
                throw ContractError("unknown mock wrapper: " + wrapper);
            }
        }
        return {text, id(), 0.0};
    }

    std::string id() const override { return "mock-chat"; }

private:
    std::map<std::string, MockChatFixture> fixtures_;
    bool error_on_miss_;
};

}  // namespace

std::unique_ptr<EmbeddingBackend> make_mock_embedding_backend(std::uint64_t seed,
                                                              std::size_t dim) {
    if (dim == 0) throw ContractError("embedding dim must be positive");
    return std::make_unique<MockEmbeddingBackend>(seed, dim);
}

std::unique_ptr<ChatBackend> make_mock_chat_backend(
    std::map<std::string, MockChatFixture> fixtures, bool error_on_miss) {
    return std::make_unique<MockChatBackend>(std::move(fixtures), error_on_miss);
}

std::pair<std::unique_ptr<EmbeddingBackend>, std::unique_ptr<ChatBackend>>
make_mock_backends(std::uint64_t seed,
                   std::map<std::string, MockChatFixture> fixtures,
                   bool error_on_miss) {
    return {make_mock_embedding_backend(seed),
            make_mock_chat_backend(std::move(fixtures), error_on_miss)};
}

std::map<std::string, MockChatFixture> load_mock_chat_fixtures(
    const std::string& path) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(util::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(path + ": invalid fixture JSON (" + e.what() + ")");
    }
    if (!doc.is_object()) throw LoadError(path + ": fixture root must be an object");
    std::map<std::string, MockChatFixture> fixtures;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const auto& entry = it.value();
        if (!entry.is_object() || !entry.contains("reply"))
            throw LoadError(path + ": fixture '" + it.key() + "' needs a reply");
        MockChatFixture fixture;
        if (entry["reply"].is_string()) {
            fixture.reply = entry["reply"].get<std::string>();
        } else {
            fixture.reply = entry["reply"].dump();
        }
        if (entry.contains("wrappers")) {
            for (const auto& w : entry["wrappers"]) {
                fixture.wrappers.push_back(w.get<std::string>());
            }
        }
        fixtures[it.key()] = std::move(fixture);
    }
    return fixtures;
}

}  // namespace svocal
