#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "svocal/errors.hpp"
#include "svocal/util.hpp"

namespace svocal {

// Parses a JSON Lines file; blank lines are skipped. Parse failures carry the
// 1-based line number.
inline std::vector<nlohmann::ordered_json> read_jsonl(const std::string& path) {
    std::vector<nlohmann::ordered_json> out;
    std::string content = util::read_file(path);
    auto lines = util::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (util::trim(lines[i]).empty()) continue;
        try {
            out.push_back(nlohmann::ordered_json::parse(lines[i]));
        } catch (const nlohmann::json::parse_error& e) {
            throw LoadError(path + ":" + std::to_string(i + 1) +
                            ": invalid JSON line (" + e.what() + ")");
        }
    }
    return out;
}

inline void write_jsonl(const std::string& path,
                        const std::vector<nlohmann::ordered_json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    util::write_file(path, out);
}

// Data files written by a run start with a header record naming the run;
// loaders of specific record types skip it.
inline bool is_run_header(const nlohmann::ordered_json& line) {
    if (!line.is_object() || !line.contains("run_id")) return false;
    for (const auto& [key, value] : line.items()) {
        if (key != "run_id" && key != "kind") return false;
    }
    return true;
}

inline nlohmann::ordered_json make_run_header(const std::string& run_id,
                                              const std::string& kind) {
    nlohmann::ordered_json header;
    header["run_id"] = run_id;
    header["kind"] = kind;
    return header;
}

}  // namespace svocal
