#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "svocal/backends.hpp"
#include "svocal/errors.hpp"

namespace svocal {

namespace {

using nlohmann::json;

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix, possibly empty
};

ParsedUrl parse_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw ContractError("base_url must include a scheme: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.origin = base_url;
    } else {
        parsed.origin = base_url.substr(0, path_start);
        parsed.prefix = base_url.substr(path_start);
        while (!parsed.prefix.empty() && parsed.prefix.back() == '/') {
            parsed.prefix.pop_back();
        }
    }
    return parsed;
}

class HttpTransport {
public:
    explicit HttpTransport(const BackendConfig& config)
        : config_(config), url_(parse_base_url(config.base_url)) {
        if (!config_.api_key_env.empty()) {
            if (const char* key = std::getenv(config_.api_key_env.c_str())) {
                api_key_ = key;
            }
        }
    }

    // POSTs JSON with the retry policy: transport errors, 5xx and 429 are
    // retried with exponential backoff; other 4xx fail immediately.
    json post_json(const std::string& path, const json& body) {
        const int attempts = 1 + std::max(0, config_.retry_max_attempts);
        std::string last_error;
        bool timed_out = false;
        for (int attempt = 0; attempt < attempts; ++attempt) {
            if (attempt > 0) {
                auto delay = config_.retry_backoff_seconds *
                             std::pow(2.0, attempt - 1);
                std::this_thread::sleep_for(
                    std::chrono::duration<double>(delay));
            }
            httplib::Client client(url_.origin);
            client.set_connection_timeout(
                std::chrono::duration<double>(config_.timeout_seconds));
            client.set_read_timeout(
                std::chrono::duration<double>(config_.timeout_seconds));
            client.set_write_timeout(
                std::chrono::duration<double>(config_.timeout_seconds));
            httplib::Headers headers;
            if (!api_key_.empty()) {
                headers.emplace("Authorization", "Bearer " + api_key_);
            }
            auto start = std::chrono::steady_clock::now();
            auto res = client.Post(url_.prefix + path, headers, body.dump(),
                                   "application/json");
            double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
            if (!res) {
                auto err = res.error();
                if (err == httplib::Error::ConnectionTimeout ||
                    elapsed >= config_.timeout_seconds) {
                    timed_out = true;
                    last_error = "request timed out after " +
                                 std::to_string(elapsed) + "s";
                } else {
                    timed_out = false;
                    last_error = "transport error: " + httplib::to_string(err);
                }
                continue;
            }
            if (res->status >= 200 && res->status < 300) {
                try {
                    return json::parse(res->body);
                } catch (const json::parse_error& e) {
                    throw BackendError(std::string("malformed response JSON: ") +
                                       e.what());
                }
            }
            if (res->status == 429 || res->status >= 500) {
                timed_out = false;
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            throw BackendError("HTTP " + std::to_string(res->status) + " from " +
                               path + ": " + res->body);
        }
        if (timed_out) throw TimeoutError(last_error);
        throw BackendError("request to " + path + " failed after " +
                           std::to_string(attempts) + " attempt(s): " +
                           last_error);
    }

    const BackendConfig& config() const { return config_; }

private:
    BackendConfig config_;
    ParsedUrl url_;
    std::string api_key_;
};

class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HttpEmbeddingBackend(const BackendConfig& config)
        : transport_(config) {}

    std::vector<std::vector<double>> embed(
        const std::string& instruction,
        const std::vector<std::string>& texts) override {
        if (texts.empty()) throw ContractError("embed needs at least one text");
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        const int batch = std::max(1, transport_.config().batch_size);
        for (std::size_t begin = 0; begin < texts.size();
             begin += static_cast<std::size_t>(batch)) {
            std::size_t end =
                std::min(texts.size(), begin + static_cast<std::size_t>(batch));
            json input = json::array();
            for (std::size_t i = begin; i < end; ++i) {
                if (instruction.empty()) {
                    input.push_back(texts[i]);
                } else {
                    input.push_back("Instruct: " + instruction + "\nQuery: " +
                                    texts[i]);
                }
            }
            json body = {{"model", transport_.config().model_name},
                         {"input", input}};
            json response = transport_.post_json("/embeddings", body);
            if (!response.contains("data") || !response["data"].is_array() ||
                response["data"].size() != end - begin) {
                throw BackendError("embeddings response data missing or truncated");
            }
            std::vector<std::vector<double>> batch_vecs(end - begin);
            for (const auto& item : response["data"]) {
                if (!item.contains("embedding") || !item["embedding"].is_array())
                    throw BackendError("embeddings response item lacks embedding");
                std::size_t index = item.value("index", batch_vecs.size());
                if (index >= batch_vecs.size())
                    throw BackendError("embeddings response index out of range");
                batch_vecs[index] =
                    item["embedding"].get<std::vector<double>>();
            }
            for (auto& v : batch_vecs) {
                if (v.empty())
                    throw BackendError("embeddings response missing an index");
                {
                    std::lock_guard<std::mutex> lock(dim_mutex_);
                    if (dim_ == 0) dim_ = v.size();
                    if (v.size() != dim_)
                        throw BackendError("embedding dim changed mid-session");
                }
                l2_normalize(v);
                out.push_back(std::move(v));
            }
        }
        return out;
    }

    std::string id() const override {
        return transport_.config().model_name;
    }

private:
    HttpTransport transport_;
    std::mutex dim_mutex_;
    std::size_t dim_ = 0;
};

class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(const BackendConfig& config) : transport_(config) {}

    RawModelOutput complete(const std::string& system_text,
                            const std::string& user_text,
                            const GenerationConfig& gen) override {
        if (user_text.empty()) throw ContractError("user text must be non-empty");
        json messages = json::array();
        if (!system_text.empty()) {
            messages.push_back({{"role", "system"}, {"content", system_text}});
        }
        messages.push_back({{"role", "user"}, {"content", user_text}});
        json body = {{"model", transport_.config().model_name},
                     {"messages", messages},
                     {"temperature", gen.temperature},
                     {"max_tokens", gen.max_tokens}};
        for (const auto& [key, value] : gen.extra) body[key] = value;

        auto start = std::chrono::steady_clock::now();
        json response = transport_.post_json("/chat/completions", body);
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();

        if (!response.contains("choices") || !response["choices"].is_array() ||
            response["choices"].empty()) {
            throw BackendError("chat response has no choices");
        }
        const auto& first = response["choices"][0];
        if (!first.contains("message") || !first["message"].contains("content") ||
            !first["message"]["content"].is_string()) {
            throw BackendError("chat response choice lacks message content");
        }
        RawModelOutput out;
        out.text = first["message"]["content"].get<std::string>();
        out.model_id = response.value("model", transport_.config().model_name);
        out.seconds = elapsed;
        return out;
    }

    std::string id() const override { return transport_.config().model_name; }

private:
    HttpTransport transport_;
};

}  // namespace

std::unique_ptr<EmbeddingBackend> make_http_embedding_backend(
    const BackendConfig& config) {
    return std::make_unique<HttpEmbeddingBackend>(config);
}

std::unique_ptr<ChatBackend> make_http_chat_backend(const BackendConfig& config) {
    return std::make_unique<HttpChatBackend>(config);
}

}  // namespace svocal
