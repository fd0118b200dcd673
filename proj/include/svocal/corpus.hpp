#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace svocal {

struct BookText {
    std::string book_id;
    std::string title;
    std::vector<std::string> words;
    std::size_t raw_length = 0;
};

struct CharacterIdentity {
    std::string character_id;
    std::string name;
    std::vector<std::string> aliases;
};

struct Mention {
    std::size_t word_index = 0;
    std::string surface;
};

struct Passage {
    std::string passage_id;
    std::string book_id;
    std::string character_id;
    std::size_t start_word = 0;
    std::size_t end_word = 0;  // exclusive
    std::string text;
};

struct BookManifestEntry {
    std::string book_id;
    std::string title;
    std::string path;
};

// Collapses whitespace runs and tokenizes. When strip_boilerplate is set,
// text outside the standard Gutenberg *** START/END marker lines is
// dropped; missing markers keep the full text and add a warning.
BookText normalize_text(const std::string& raw, const std::string& book_id,
                        const std::string& title, bool strip_boilerplate,
                        std::vector<std::string>* warnings = nullptr);

// Word-boundary, case-sensitive occurrences of the name or an alias.
// Boundary = non-alphanumeric or text edge, so hyphens delimit matches.
// Results sorted by word index and deduplicated per word index.
std::vector<Mention> locate_mentions(const BookText& book,
                                     const CharacterIdentity& identity);

// Window of window_words tokens starting floor(window_words/2) before the
// mention, clipped at the text edges; exact-duplicate spans collapse.
std::vector<Passage> extract_windows(const BookText& book,
                                     const CharacterIdentity& identity,
                                     const std::vector<Mention>& mentions,
                                     std::size_t window_words = 200);

// Manifest: JSON Lines with book_id, title, path. Relative paths resolve
// against the manifest's directory.
std::vector<BookManifestEntry> load_book_manifest(const std::string& path);

void save_passages(const std::string& path, const std::vector<Passage>& passages);
std::vector<Passage> load_passages(const std::string& path);

}  // namespace svocal
