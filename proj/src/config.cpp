#include "svocal/config.hpp"

#include <filesystem>
#include <sstream>

#include "svocal/errors.hpp"
#include "svocal/util.hpp"

namespace svocal {

namespace {

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ContractError("config key " + key + " needs an integer, got '" +
                            value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ContractError("config key " + key + " needs a number, got '" +
                            value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        unsigned long long parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return static_cast<std::uint64_t>(parsed);
    } catch (const std::exception&) {
        throw ContractError("config key " + key +
                            " needs a non-negative integer, got '" + value +
                            "'");
    }
}

std::string format_double(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

void apply_config_entry(AppConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "embedding.base_url") {
        config.embedding.base_url = value;
    } else if (key == "embedding.model") {
        config.embedding.model_name = value;
    } else if (key == "embedding.timeout_seconds") {
        config.embedding.timeout_seconds = parse_double(key, value);
    } else if (key == "embedding.retry_max_attempts") {
        config.embedding.retry_max_attempts = parse_int(key, value);
    } else if (key == "embedding.retry_backoff_seconds") {
        config.embedding.retry_backoff_seconds = parse_double(key, value);
    } else if (key == "embedding.batch_size") {
        config.embedding.batch_size = parse_int(key, value);
    } else if (key == "embedding.api_key_env") {
        config.embedding.api_key_env = value;
    } else if (key == "chat.base_url") {
        config.chat.base_url = value;
    } else if (key == "chat.model") {
        config.chat.model_name = value;
    } else if (key == "chat.timeout_seconds") {
        config.chat.timeout_seconds = parse_double(key, value);
    } else if (key == "chat.retry_max_attempts") {
        config.chat.retry_max_attempts = parse_int(key, value);
    } else if (key == "chat.retry_backoff_seconds") {
        config.chat.retry_backoff_seconds = parse_double(key, value);
    } else if (key == "chat.api_key_env") {
        config.chat.api_key_env = value;
    } else if (key == "retrieval.k") {
        config.retrieval.k = parse_int(key, value);
    } else if (key == "retrieval.window_words") {
        config.retrieval.window_words = parse_int(key, value);
    } else if (key == "retrieval.general_instruction") {
        config.retrieval.general_instruction = value;
    } else if (key == "retrieval.query_prefix") {
        config.retrieval.query_prefix = value;
    } else if (key == "retrieval.passage_prefix") {
        config.retrieval.passage_prefix = value;
    } else if (key == "generation.temperature") {
        config.generation.temperature = parse_double(key, value);
    } else if (key == "generation.max_tokens") {
        config.generation.max_tokens = parse_int(key, value);
    } else if (util::starts_with(key, "generation.extra.")) {
        config.generation.extra[key.substr(std::string("generation.extra.")
                                               .size())] = value;
    } else if (key == "prompt_template") {
        config.prompt_template_path = value;
    } else if (key == "mock_fixtures") {
        config.mock_fixtures_path = value;
    } else if (key == "mock_embedding_dim") {
        config.mock_embedding_dim = parse_int(key, value);
    } else if (key == "seed") {
        config.seed = parse_u64(key, value);
    } else if (key == "parallel") {
        config.parallel = parse_int(key, value);
    } else {
        throw ContractError("unknown config key: " + key);
    }
}

AppConfig load_config(const std::string& path) {
    AppConfig config;
    const std::string text = util::read_file(path);
    std::size_t line_no = 0;
    for (const auto& raw_line : util::split_lines(text)) {
        ++line_no;
        std::string line = util::trim(raw_line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ContractError(path + ":" + std::to_string(line_no) +
                                ": expected key = value");
        std::string key = util::trim(line.substr(0, eq));
        std::string value = util::trim(line.substr(eq + 1));
        if (key.empty())
            throw ContractError(path + ":" + std::to_string(line_no) +
                                ": empty key");
        try {
            apply_config_entry(config, key, value);
        } catch (const ContractError& e) {
            throw ContractError(path + ":" + std::to_string(line_no) + ": " +
                                e.what());
        }
    }
    // Path-valued keys resolve against the config file's directory.
    auto resolve = [&](std::string& p) {
        if (p.empty()) return;
        std::filesystem::path fp(p);
        if (fp.is_relative()) {
            p = (std::filesystem::path(path).parent_path() / fp).string();
        }
    };
    resolve(config.prompt_template_path);
    resolve(config.mock_fixtures_path);
    return config;
}

std::map<std::string, std::string> config_snapshot(const AppConfig& config) {
    std::map<std::string, std::string> snap;
    snap["embedding.base_url"] = config.embedding.base_url;
    snap["embedding.model"] = config.embedding.model_name;
    snap["embedding.timeout_seconds"] =
        format_double(config.embedding.timeout_seconds);
    snap["embedding.retry_max_attempts"] =
        std::to_string(config.embedding.retry_max_attempts);
    snap["embedding.retry_backoff_seconds"] =
        format_double(config.embedding.retry_backoff_seconds);
    snap["embedding.batch_size"] = std::to_string(config.embedding.batch_size);
    snap["embedding.api_key_env"] = config.embedding.api_key_env;
    snap["chat.base_url"] = config.chat.base_url;
    snap["chat.model"] = config.chat.model_name;
    snap["chat.timeout_seconds"] = format_double(config.chat.timeout_seconds);
    snap["chat.retry_max_attempts"] =
        std::to_string(config.chat.retry_max_attempts);
    snap["chat.retry_backoff_seconds"] =
        format_double(config.chat.retry_backoff_seconds);
    snap["chat.api_key_env"] = config.chat.api_key_env;
    snap["retrieval.k"] = std::to_string(config.retrieval.k);
    snap["retrieval.window_words"] =
        std::to_string(config.retrieval.window_words);
    snap["retrieval.general_instruction"] = config.retrieval.general_instruction;
    snap["retrieval.query_prefix"] = config.retrieval.query_prefix;
    snap["retrieval.passage_prefix"] = config.retrieval.passage_prefix;
    snap["generation.temperature"] = format_double(config.generation.temperature);
    snap["generation.max_tokens"] = std::to_string(config.generation.max_tokens);
    for (const auto& [key, value] : config.generation.extra) {
        snap["generation.extra." + key] = value;
    }
    snap["prompt_template"] = config.prompt_template_path;
    snap["mock_fixtures"] = config.mock_fixtures_path;
    snap["mock_embedding_dim"] = std::to_string(config.mock_embedding_dim);
    snap["seed"] = std::to_string(config.seed);
    snap["parallel"] = std::to_string(config.parallel);
    return snap;
}

}  // namespace svocal
