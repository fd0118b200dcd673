#include "svocal/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <set>

#include <json.hpp>

#include "svocal/errors.hpp"
#include "svocal/jsonl.hpp"
#include "svocal/util.hpp"

namespace svocal {

namespace {

bool is_gutenberg_marker(const std::string& line, const char* which) {
    std::string t = util::trim(line);
    if (!util::starts_with(t, "***")) return false;
    return util::contains(t, which) && util::contains(t, "PROJECT GUTENBERG");
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

BookText normalize_text(const std::string& raw, const std::string& book_id,
                        const std::string& title, bool strip_boilerplate,
                        std::vector<std::string>* warnings) {
    std::string body = raw;
    if (strip_boilerplate) {
        auto lines = util::split_lines(raw);
        std::size_t start_line = 0;
        std::size_t end_line = lines.size();
        bool found_start = false, found_end = false;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (!found_start && is_gutenberg_marker(lines[i], "START OF")) {
                start_line = i + 1;
                found_start = true;
            } else if (found_start && is_gutenberg_marker(lines[i], "END OF")) {
                end_line = i;
                found_end = true;
                break;
            }
        }
        if (found_start) {
            std::vector<std::string> kept(lines.begin() + start_line,
                                          lines.begin() + end_line);
            body = util::join(kept, "\n");
            if (!found_end && warnings) {
                warnings->push_back(book_id + ": start marker found but no end marker");
            }
        } else if (warnings) {
            warnings->push_back(book_id +
                                ": no boilerplate markers found, keeping full text");
        }
    }

    BookText book;
    book.book_id = book_id;
    book.title = title;
    book.raw_length = raw.size();
    book.words = util::split_whitespace(body);
    if (book.words.empty()) {
        throw IngestionError("book '" + book_id + "' is empty after normalization");
    }
    return book;
}

std::vector<Mention> locate_mentions(const BookText& book,
                                     const CharacterIdentity& identity) {
    if (identity.name.empty()) throw ContractError("character name must be non-empty");

    // Join once; token k starts at offsets[k] in the joined text.
    std::string joined;
    std::vector<std::size_t> offsets;
    offsets.reserve(book.words.size());
    for (std::size_t i = 0; i < book.words.size(); ++i) {
        if (i) joined += ' ';
        offsets.push_back(joined.size());
        joined += book.words[i];
    }

    std::vector<std::string> needles;
    needles.push_back(util::join(util::split_whitespace(identity.name), " "));
    for (const auto& alias : identity.aliases) {
        std::string n = util::join(util::split_whitespace(alias), " ");
        if (!n.empty()) needles.push_back(n);
    }

    std::map<std::size_t, Mention> by_index;
    for (const auto& needle : needles) {
        if (needle.empty()) continue;
        std::size_t pos = 0;
        while ((pos = joined.find(needle, pos)) != std::string::npos) {
            bool left_ok = pos == 0 || !is_word_char(joined[pos - 1]);
            std::size_t end = pos + needle.size();
            bool right_ok = end >= joined.size() || !is_word_char(joined[end]);
            if (left_ok && right_ok) {
                auto it = std::upper_bound(offsets.begin(), offsets.end(), pos);
                std::size_t word_index =
                    static_cast<std::size_t>(it - offsets.begin()) - 1;
                by_index.emplace(word_index, Mention{word_index, needle});
            }
            ++pos;
        }
    }

    std::vector<Mention> mentions;
    mentions.reserve(by_index.size());
    for (auto& [idx, mention] : by_index) mentions.push_back(std::move(mention));
    return mentions;
}

std::vector<Passage> extract_windows(const BookText& book,
                                     const CharacterIdentity& identity,
                                     const std::vector<Mention>& mentions,
                                     std::size_t window_words) {
    if (window_words < 1) throw ContractError("window_words must be >= 1");

    const long long len = static_cast<long long>(book.words.size());
    const long long w = static_cast<long long>(window_words);
    std::vector<Passage> passages;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& mention : mentions) {
        long long m = static_cast<long long>(mention.word_index);
        long long start = std::max(0LL, m - w / 2);
        long long end = std::min(len, m - w / 2 + w);
        auto span = std::make_pair(static_cast<std::size_t>(start),
                                   static_cast<std::size_t>(end));
        if (!seen.insert(span).second) continue;

        Passage p;
        p.book_id = book.book_id;
        p.character_id = identity.character_id;
        p.start_word = span.first;
        p.end_word = span.second;
        p.passage_id = book.book_id + ":" + identity.character_id + ":" +
                       std::to_string(p.start_word) + "-" +
                       std::to_string(p.end_word);
        std::vector<std::string> slice(book.words.begin() + start,
                                       book.words.begin() + end);
        p.text = util::join(slice, " ");
        passages.push_back(std::move(p));
    }
    return passages;
}

std::vector<BookManifestEntry> load_book_manifest(const std::string& path) {
    auto rows = read_jsonl(path);
    std::vector<BookManifestEntry> entries;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (!row.is_object() || !row.contains("book_id") || !row.contains("path") ||
            !row["book_id"].is_string() || !row["path"].is_string()) {
            throw LoadError(path + ":" + std::to_string(i + 1) +
                            ": manifest rows need string book_id and path");
        }
        BookManifestEntry entry;
        entry.book_id = row["book_id"].get<std::string>();
        entry.title = row.value("title", std::string{});
        entry.path = row["path"].get<std::string>();
        std::filesystem::path p(entry.path);
        if (p.is_relative()) {
            entry.path =
                (std::filesystem::path(path).parent_path() / p).string();
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

void save_passages(const std::string& path, const std::vector<Passage>& passages) {
    std::vector<nlohmann::ordered_json> rows;
    rows.reserve(passages.size());
    for (const auto& p : passages) {
        nlohmann::ordered_json row;
        row["passage_id"] = p.passage_id;
        row["book_id"] = p.book_id;
        row["character_id"] = p.character_id;
        row["start_word"] = p.start_word;
        row["end_word"] = p.end_word;
        row["text"] = p.text;
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

std::vector<Passage> load_passages(const std::string& path) {
    auto rows = read_jsonl(path);
    std::vector<Passage> passages;
    passages.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (is_run_header(row)) continue;
        try {
            Passage p;
            p.passage_id = row.at("passage_id").get<std::string>();
            p.book_id = row.at("book_id").get<std::string>();
            p.character_id = row.at("character_id").get<std::string>();
            p.start_word = row.at("start_word").get<std::size_t>();
            p.end_word = row.at("end_word").get<std::size_t>();
            p.text = row.at("text").get<std::string>();
            passages.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw LoadError(path + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return passages;
}

}  // namespace svocal
