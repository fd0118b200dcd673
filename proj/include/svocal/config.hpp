#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "svocal/backends.hpp"
#include "svocal/retrieval.hpp"

namespace svocal {

// Everything a run needs, loadable from a flat key=value file.
struct AppConfig {
    BackendConfig embedding;
    BackendConfig chat;
    RetrievalConfig retrieval;
    GenerationConfig generation;
    std::string prompt_template_path;  // empty = built-in template
    std::string mock_fixtures_path;    // canned chat replies for --mock
    int mock_embedding_dim = 64;
    std::uint64_t seed = 0;
    int parallel = 1;
};

// Lines of "key = value"; blank lines and lines starting with # are
// ignored. Unknown keys are rejected so typos fail loudly. Relative
// prompt_template and mock_fixtures paths resolve against the config
// file's directory.
AppConfig load_config(const std::string& path);

// Applies one key to the config; shared by the file loader and CLI
// overrides. Throws on unknown keys or unparsable values.
void apply_config_entry(AppConfig& config, const std::string& key,
                        const std::string& value);

// Flat view of every setting, used for run manifests and run ids.
std::map<std::string, std::string> config_snapshot(const AppConfig& config);

}  // namespace svocal
