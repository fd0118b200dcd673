#include "svocal/postprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <optional>
#include <set>

#include <json.hpp>

#include "svocal/jsonl.hpp"
#include "svocal/util.hpp"

namespace svocal {

namespace {

using nlohmann::ordered_json;

// ------------------------------------------------------------------
// Text scanning. Repairs must not touch the inside of double-quoted
// string literals, so every rule works from a per-character map of
// string membership and innermost container.
// ------------------------------------------------------------------

struct Scan {
    // Inside a double-quoted literal, quotes included.
    std::vector<char> in_string;
    // Innermost open container ('{', '[', or 0). Characters inside a
    // string inherit the container holding the string.
    std::vector<char> ctx;
};

Scan scan_text(const std::string& s) {
    Scan scan;
    scan.in_string.assign(s.size(), 0);
    scan.ctx.assign(s.size(), 0);
    std::vector<char> stack;
    bool in_str = false;
    bool escaped = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        scan.ctx[i] = stack.empty() ? 0 : stack.back();
        if (in_str) {
            scan.in_string[i] = 1;
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_str = false;
            }
            continue;
        }
        if (c == '"') {
            scan.in_string[i] = 1;
            in_str = true;
        } else if (c == '{' || c == '[') {
            stack.push_back(c);
        } else if (c == '}') {
            if (!stack.empty() && stack.back() == '{') stack.pop_back();
        } else if (c == ']') {
            if (!stack.empty() && stack.back() == '[') stack.pop_back();
        }
    }
    return scan;
}

struct StringLit {
    std::size_t start;  // opening quote
    std::size_t end;    // one past closing quote
    std::string content;
    char ctx;
};

std::vector<StringLit> string_literals(const std::string& s, const Scan& scan) {
    std::vector<StringLit> lits;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '"' || !scan.in_string[i]) {
            ++i;
            continue;
        }
        StringLit lit;
        lit.start = i;
        lit.ctx = scan.ctx[i];
        ++i;
        bool esc = false;
        while (i < s.size()) {
            if (esc) {
                lit.content += s[i];
                esc = false;
            } else if (s[i] == '\\') {
                lit.content += s[i];
                esc = true;
            } else if (s[i] == '"') {
                break;
            } else {
                lit.content += s[i];
            }
            ++i;
        }
        std::size_t end = i < s.size() ? i + 1 : i;
        lit.end = end;
        lits.push_back(std::move(lit));
        i = end;
    }
    return lits;
}

std::size_t skip_ws(const std::string& s, std::size_t i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return i;
}

// Position of the previous non-whitespace character before i, or npos.
std::size_t prev_significant(const std::string& s, std::size_t i) {
    while (i > 0) {
        --i;
        if (!std::isspace(static_cast<unsigned char>(s[i]))) return i;
    }
    return std::string::npos;
}

bool is_number_token(const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = 0;
    if (t[i] == '-' || t[i] == '+') ++i;
    bool digits = false, dot = false, exp = false;
    for (; i < t.size(); ++i) {
        char c = t[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = true;
        } else if (c == '.' && !dot && !exp) {
            dot = true;
        } else if ((c == 'e' || c == 'E') && digits && !exp) {
            exp = true;
            if (i + 1 < t.size() && (t[i + 1] == '-' || t[i + 1] == '+')) ++i;
        } else {
            return false;
        }
    }
    return digits;
}

bool is_json_keyword(const std::string& t) {
    return t == "null" || t == "true" || t == "false";
}

std::string quote_string(const std::string& raw) {
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

bool is_structural(char c) {
    return c == '{' || c == '}' || c == '[' || c == ']' || c == ',' || c == ':';
}

// ------------------------------------------------------------------
// Rule 1: remove reasoning segments.
// ------------------------------------------------------------------
std::string strip_think_tags(const std::string& s) {
    std::string out = s;
    while (true) {
        auto open = out.find("<think>");
        if (open == std::string::npos) break;
        auto close = out.find("</think>", open);
        if (close == std::string::npos) break;
        out.erase(open, close + 8 - open);
    }
    // A close tag with no opener: everything before it is the trace.
    auto orphan = out.rfind("</think>");
    if (orphan != std::string::npos) out.erase(0, orphan + 8);
    return out;
}

// ------------------------------------------------------------------
// Rule 2: strip Markdown code fences.
// ------------------------------------------------------------------
std::string strip_code_fences(const std::string& s) {
    auto lines = util::split_lines(s);
    bool any_fence = false;
    std::vector<std::string> kept;
    for (const auto& line : lines) {
        if (util::starts_with(util::trim(line), "```")) {
            any_fence = true;
            continue;
        }
        kept.push_back(line);
    }
    if (any_fence) return util::join(kept, "\n");

    std::string t = util::trim(s);
    if (util::starts_with(t, "```")) {
        t.erase(0, 3);
        std::size_t i = 0;
        while (i < t.size() && std::isalnum(static_cast<unsigned char>(t[i]))) ++i;
        t.erase(0, i);
        if (t.size() >= 3 && t.compare(t.size() - 3, 3, "```") == 0) {
            t.erase(t.size() - 3);
        }
        return t;
    }
    return s;
}

// ------------------------------------------------------------------
// Rule 3: select the final JSON-looking block.
// ------------------------------------------------------------------
std::string select_final_block(const std::string& s) {
    Scan scan = scan_text(s);
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (scan.in_string[i]) continue;
        if (s[i] == '{') {
            stack.push_back(i);
        } else if (s[i] == '}' && !stack.empty()) {
            std::size_t open = stack.back();
            stack.pop_back();
            if (stack.empty()) spans.emplace_back(open, i + 1);
        }
    }
    if (!spans.empty()) {
        auto [a, b] = spans.back();
        return s.substr(a, b - a);
    }
    // No balanced block: fall back to the last unclosed top-level brace
    // and let bracket repair close it.
    if (!stack.empty()) return s.substr(stack.front());
    return s;
}

// ------------------------------------------------------------------
// Rule 4: bare Python-style literals.
// ------------------------------------------------------------------
std::string normalize_python_literals(const std::string& s) {
    static const std::pair<const char*, const char*> subs[] = {
        {"None", "null"}, {"True", "true"}, {"False", "false"}};
    std::string out = s;
    Scan scan = scan_text(out);
    auto word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    for (const auto& [from, to] : subs) {
        const std::size_t len = std::strlen(from);
        std::size_t pos = 0;
        while ((pos = out.find(from, pos)) != std::string::npos) {
            bool boundary_left = pos == 0 || !word_char(out[pos - 1]);
            bool boundary_right =
                pos + len >= out.size() || !word_char(out[pos + len]);
            // Replacements are same-length, so the scan stays valid.
            if (!scan.in_string[pos] && boundary_left && boundary_right) {
                out.replace(pos, len, to);
            }
            pos += len;
        }
    }
    return out;
}

// ------------------------------------------------------------------
// Rule 5: quote unquoted list items; single-quoted items inside arrays
// become double-quoted.
// ------------------------------------------------------------------
std::string quote_list_items(const std::string& s) {
    std::string out = s;

    // Single-quoted items first, so the bare-run pass below does not see
    // their quotes.
    {
        Scan scan = scan_text(out);
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> reps;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i] != '\'' || scan.in_string[i] || scan.ctx[i] != '[') continue;
            std::size_t p = prev_significant(out, i);
            if (p == std::string::npos || (out[p] != '[' && out[p] != ',')) continue;
            std::size_t j = i + 1;
            while (j < out.size() && out[j] != '\'') ++j;
            if (j >= out.size()) continue;
            std::size_t after = skip_ws(out, j + 1);
            if (after < out.size() && out[after] != ',' && out[after] != ']') continue;
            reps.emplace_back(i, j + 1,
                              quote_string(out.substr(i + 1, j - i - 1)));
            i = j;
        }
        for (auto it = reps.rbegin(); it != reps.rend(); ++it) {
            out.replace(std::get<0>(*it), std::get<1>(*it) - std::get<0>(*it),
                        std::get<2>(*it));
        }
    }

    // Bare runs between separators inside arrays.
    {
        Scan scan = scan_text(out);
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> reps;
        std::size_t i = 0;
        while (i < out.size()) {
            char c = out[i];
            if (scan.in_string[i] || scan.ctx[i] != '[' || is_structural(c) ||
                std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < out.size() && !scan.in_string[j] && !is_structural(out[j])) {
                ++j;
            }
            std::string run = out.substr(i, j - i);
            std::string trimmed = util::trim(run);
            if (!trimmed.empty() && !is_number_token(trimmed) &&
                !is_json_keyword(trimmed)) {
                std::size_t lead = run.find_first_not_of(" \t\r\n");
                std::size_t tail = run.find_last_not_of(" \t\r\n");
                reps.emplace_back(i + lead, i + tail + 1, quote_string(trimmed));
            }
            i = j;
        }
        for (auto it = reps.rbegin(); it != reps.rend(); ++it) {
            out.replace(std::get<0>(*it), std::get<1>(*it) - std::get<0>(*it),
                        std::get<2>(*it));
        }
    }
    return out;
}

// ------------------------------------------------------------------
// Rule 6: trailing/duplicate commas and bracket balance.
// ------------------------------------------------------------------
std::string remove_comma_artifacts(std::string out) {
    bool changed = true;
    while (changed) {
        changed = false;
        Scan scan = scan_text(out);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i] != ',' || scan.in_string[i]) continue;
            std::size_t next = skip_ws(out, i + 1);
            bool drop = next >= out.size() || out[next] == ']' ||
                        out[next] == '}' || out[next] == ',';
            if (!drop) {
                std::size_t p = prev_significant(out, i);
                drop = p == std::string::npos || out[p] == '[' || out[p] == '{' ||
                       out[p] == ',';
            }
            if (drop) {
                out.erase(i, 1);
                changed = true;
                break;
            }
        }
    }
    return out;
}

std::string balance_brackets(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 4);
    std::vector<char> stack;
    bool in_str = false;
    bool escaped = false;
    for (char c : s) {
        if (in_str) {
            out += c;
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_str = false;
            }
            continue;
        }
        if (c == '"') {
            in_str = true;
        } else if (c == '{' || c == '[') {
            stack.push_back(c);
        } else if (c == '}' || c == ']') {
            char want = c == '}' ? '{' : '[';
            if (!stack.empty() && stack.back() == want) {
                stack.pop_back();
            } else {
                continue;  // unmatched closer dropped
            }
        }
        out += c;
    }
    if (in_str) out += '"';
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        out += *it == '{' ? '}' : ']';
    }
    return out;
}

std::string fix_brackets_and_commas(const std::string& s) {
    // Balancing may expose a new trailing comma, hence the second pass.
    std::string out = remove_comma_artifacts(s);
    out = balance_brackets(out);
    return remove_comma_artifacts(out);
}

// ------------------------------------------------------------------
// Rule 7: insert commas between adjacent values.
// ------------------------------------------------------------------
std::string insert_missing_commas(const std::string& s) {
    Scan scan = scan_text(s);
    auto lits = string_literals(s, scan);
    std::map<std::size_t, std::size_t> lit_end;
    for (const auto& l : lits) lit_end[l.start] = l.end;

    enum Tok { NONE, VALUE_END, COLON, COMMA, OPEN };
    Tok last = NONE;
    std::vector<std::size_t> inserts;
    auto bare_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
               c == '.' || c == '+' || c == '-';
    };
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (auto it = lit_end.find(i); it != lit_end.end()) {
            if (last == VALUE_END && scan.ctx[i] != 0) inserts.push_back(i);
            last = VALUE_END;
            i = it->second;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '{' || c == '[') {
            if (last == VALUE_END && scan.ctx[i] != 0) inserts.push_back(i);
            last = OPEN;
            ++i;
            continue;
        }
        if (c == '}' || c == ']') {
            last = VALUE_END;
            ++i;
            continue;
        }
        if (c == ':') {
            last = COLON;
            ++i;
            continue;
        }
        if (c == ',') {
            last = COMMA;
            ++i;
            continue;
        }
        if (bare_char(c)) {
            if (last == VALUE_END && scan.ctx[i] != 0) inserts.push_back(i);
            std::size_t j = i;
            while (j < s.size() && !scan.in_string[j] && bare_char(s[j])) ++j;
            last = VALUE_END;
            i = j;
            continue;
        }
        ++i;  // other characters leave the token state alone
    }

    std::string out = s;
    for (auto it = inserts.rbegin(); it != inserts.rend(); ++it) {
        out.insert(*it, ",");
    }
    return out;
}

// ------------------------------------------------------------------
// Rules 8 and 9: drop unwanted string items from arrays.
// ------------------------------------------------------------------
template <typename Pred>
std::string drop_array_items(std::string out, Pred junk) {
    while (true) {
        Scan scan = scan_text(out);
        auto lits = string_literals(out, scan);
        bool dropped = false;
        for (const auto& l : lits) {
            if (l.ctx != '[' || !junk(l.content)) continue;
            std::size_t a = l.start;
            std::size_t b = l.end;
            std::size_t k = skip_ws(out, b);
            if (k < out.size() && out[k] == ',') {
                b = k + 1;
                if (b < out.size() && out[b] == ' ') ++b;
            } else {
                std::size_t p = prev_significant(out, a);
                if (p != std::string::npos && out[p] == ',') a = p;
            }
            out.erase(a, b - a);
            dropped = true;
            break;
        }
        if (!dropped) return out;
    }
}

std::string drop_malformed_list_items(const std::string& s) {
    return drop_array_items(s, [](const std::string& content) {
        std::string t = util::trim(content);
        if (t.empty()) return true;
        return t.find_first_not_of("[](){}\"'`\\") == std::string::npos;
    });
}

std::string drop_null_placeholders(const std::string& s) {
    return drop_array_items(s, [](const std::string& content) {
        return util::to_lower(util::trim(content)) == "null";
    });
}

// ------------------------------------------------------------------
// Rule 10: flatten key-value maps under list-valued keys.
// ------------------------------------------------------------------

const std::set<std::string>& flattenable_keys() {
    static const std::set<std::string> keys = {"origin", "residence",
                                               "occupation", "spoken_languages"};
    return keys;
}

struct Token {
    std::size_t start;
    std::size_t end;
    char kind;  // '"', '\'', or 'b' for bare
};

std::optional<Token> read_scalar_token(const std::string& s, std::size_t pos) {
    if (pos >= s.size()) return std::nullopt;
    char c = s[pos];
    if (c == '"' || c == '\'') {
        std::size_t j = pos + 1;
        bool esc = false;
        while (j < s.size()) {
            if (esc) {
                esc = false;
            } else if (c == '"' && s[j] == '\\') {
                esc = true;
            } else if (s[j] == c) {
                return Token{pos, j + 1, c};
            }
            ++j;
        }
        return std::nullopt;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        std::size_t j = pos;
        while (j < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
                s[j] == '-' || s[j] == '.')) {
            ++j;
        }
        return Token{pos, j, 'b'};
    }
    return std::nullopt;
}

std::string token_content(const std::string& s, const Token& t) {
    if (t.kind == 'b') return s.substr(t.start, t.end - t.start);
    return s.substr(t.start + 1, t.end - t.start - 2);
}

// Balanced {..} or [..] span starting at pos; npos when unterminated.
std::size_t find_matching(const std::string& s, std::size_t pos) {
    char open = s[pos];
    char close = open == '{' ? '}' : ']';
    int depth = 0;
    bool in_str = false;
    bool esc = false;
    for (std::size_t i = pos; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (esc) {
                esc = false;
            } else if (c == '\\') {
                esc = true;
            } else if (c == '"') {
                in_str = false;
            }
            continue;
        }
        if (c == '"') {
            in_str = true;
        } else if (c == open) {
            ++depth;
        } else if (c == close) {
            --depth;
            if (depth == 0) return i;
        }
    }
    return std::string::npos;
}

std::string normalize_value_text(const std::string& raw) {
    std::string t = util::trim(raw);
    if (t.empty()) return "\"\"";
    if (t.front() == '"' || t.front() == '{' || t.front() == '[') return t;
    if (t.size() >= 2 && t.front() == '\'' && t.back() == '\'') {
        return quote_string(t.substr(1, t.size() - 2));
    }
    if (is_number_token(t) || is_json_keyword(t)) return t;
    return quote_string(t);
}

struct ValueSpan {
    std::size_t start;
    std::size_t end;
};

std::optional<ValueSpan> read_value_span(const std::string& s, std::size_t pos) {
    if (pos >= s.size()) return std::nullopt;
    char c = s[pos];
    if (c == '{' || c == '[') {
        std::size_t close = find_matching(s, pos);
        if (close == std::string::npos) return std::nullopt;
        return ValueSpan{pos, close + 1};
    }
    if (c == '"' || c == '\'') {
        auto tok = read_scalar_token(s, pos);
        if (!tok) return std::nullopt;
        return ValueSpan{tok->start, tok->end};
    }
    // Bare value: up to the next separator.
    std::size_t j = pos;
    while (j < s.size() && s[j] != ',' && s[j] != '}' && s[j] != ']' &&
           s[j] != ':') {
        ++j;
    }
    std::size_t end = j;
    while (end > pos && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    if (end == pos) return std::nullopt;
    return ValueSpan{pos, end};
}

// Splits the inside of a braced map into entry values.
std::vector<std::string> braced_map_values(const std::string& s,
                                           std::size_t begin, std::size_t end) {
    std::vector<std::string> values;
    std::vector<std::pair<std::size_t, std::size_t>> entries;
    int depth = 0;
    bool in_str = false;
    bool esc = false;
    std::size_t entry_start = begin;
    for (std::size_t i = begin; i < end; ++i) {
        char c = s[i];
        if (in_str) {
            if (esc) {
                esc = false;
            } else if (c == '\\') {
                esc = true;
            } else if (c == '"') {
                in_str = false;
            }
            continue;
        }
        if (c == '"') {
            in_str = true;
        } else if (c == '{' || c == '[') {
            ++depth;
        } else if (c == '}' || c == ']') {
            --depth;
        } else if (c == ',' && depth == 0) {
            entries.emplace_back(entry_start, i);
            entry_start = i + 1;
        }
    }
    entries.emplace_back(entry_start, end);

    for (auto [a, b] : entries) {
        std::string entry = s.substr(a, b - a);
        // Value is the part after the first top-level colon, or the whole
        // entry when no key is present.
        int d = 0;
        bool str = false;
        bool e2 = false;
        std::size_t colon = std::string::npos;
        for (std::size_t i = 0; i < entry.size(); ++i) {
            char c = entry[i];
            if (str) {
                if (e2) {
                    e2 = false;
                } else if (c == '\\') {
                    e2 = true;
                } else if (c == '"') {
                    str = false;
                }
                continue;
            }
            if (c == '"') {
                str = true;
            } else if (c == '{' || c == '[') {
                ++d;
            } else if (c == '}' || c == ']') {
                --d;
            } else if (c == ':' && d == 0) {
                colon = i;
                break;
            }
        }
        std::string value = colon == std::string::npos
                                ? entry
                                : entry.substr(colon + 1);
        if (util::trim(value).empty()) continue;
        values.push_back(normalize_value_text(value));
    }
    return values;
}

std::string flatten_keyed_values(const std::string& s) {
    std::string out = s;
    bool changed = true;
    while (changed) {
        changed = false;
        Scan scan = scan_text(out);
        auto lits = string_literals(out, scan);
        for (const auto& l : lits) {
            if (l.ctx != '{' || !flattenable_keys().count(l.content)) continue;
            std::size_t c = skip_ws(out, l.end);
            if (c >= out.size() || out[c] != ':') continue;
            std::size_t v = skip_ws(out, c + 1);
            if (v >= out.size()) continue;

            if (out[v] == '{') {
                std::size_t close = find_matching(out, v);
                if (close == std::string::npos) continue;
                auto values = braced_map_values(out, v + 1, close);
                std::string repl = "[" + util::join(values, ", ") + "]";
                out.replace(v, close + 1 - v, repl);
                changed = true;
                break;
            }

            // Unbraced chain: "key": 'k1': v1, "k2": v2, ... flattened to
            // the value list. The chain ends at a closing bracket or at a
            // key that is itself an attribute.
            auto first = read_scalar_token(out, v);
            if (!first) continue;
            std::size_t after = skip_ws(out, first->end);
            if (after >= out.size() || out[after] != ':') continue;

            std::vector<std::string> values;
            std::size_t pos = v;
            std::size_t chain_end = v;
            while (true) {
                auto key = read_scalar_token(out, pos);
                if (!key) break;
                std::size_t colon = skip_ws(out, key->end);
                if (colon >= out.size() || out[colon] != ':') break;
                std::size_t vs = skip_ws(out, colon + 1);
                auto val = read_value_span(out, vs);
                if (!val) break;
                values.push_back(
                    normalize_value_text(out.substr(val->start, val->end - val->start)));
                chain_end = val->end;
                std::size_t next = skip_ws(out, val->end);
                if (next >= out.size() || out[next] != ',') break;
                std::size_t ks = skip_ws(out, next + 1);
                auto k2 = read_scalar_token(out, ks);
                if (!k2) break;
                std::size_t c2 = skip_ws(out, k2->end);
                if (c2 >= out.size() || out[c2] != ':') break;
                if (attribute_from_name(token_content(out, *k2))) break;
                pos = ks;
            }
            if (values.empty() || chain_end == v) continue;
            std::string repl = "[" + util::join(values, ", ") + "]";
            out.replace(v, chain_end - v, repl);
            changed = true;
            break;
        }
    }
    return out;
}

using RuleFn = std::string (*)(const std::string&);

struct Rule {
    const char* name;
    RuleFn fn;
};

const Rule kRules[] = {
    {"strip_think_tags", strip_think_tags},
    {"strip_code_fences", strip_code_fences},
    {"select_final_block", select_final_block},
    {"normalize_python_literals", normalize_python_literals},
    {"quote_list_items", quote_list_items},
    {"fix_brackets_and_commas", fix_brackets_and_commas},
    {"insert_missing_commas", insert_missing_commas},
    {"drop_malformed_list_items", drop_malformed_list_items},
    {"drop_null_placeholders", drop_null_placeholders},
    {"flatten_keyed_values", flatten_keyed_values},
};

}  // namespace

bool RepairLog::any_applied() const {
    for (const auto& step : steps) {
        if (step.applied) return true;
    }
    return false;
}

bool RepairLog::applied(const std::string& rule) const {
    for (const auto& step : steps) {
        if (step.rule == rule) return step.applied;
    }
    return false;
}

const std::vector<std::string>& repair_rule_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& rule : kRules) v.emplace_back(rule.name);
        return v;
    }();
    return names;
}

RepairResult repair_json(const std::string& raw) {
    RepairResult result;
    std::string text = util::trim(raw);
    for (const auto& rule : kRules) {
        std::string next = util::trim(rule.fn(text));
        result.log.steps.push_back({rule.name, next != text});
        text = std::move(next);
    }
    result.text = text;
    try {
        (void)nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        throw RepairError("text does not parse as JSON after all repair rules",
                          result.log);
    }
    return result;
}

namespace {

std::optional<std::string> read_scalar_key(const ordered_json& doc,
                                           const char* key) {
    if (!doc.contains(key) || !doc[key].is_string()) return std::nullopt;
    std::string v = util::trim(doc[key].get<std::string>());
    if (v.empty()) return std::nullopt;
    return v;
}

void collect_strings(const ordered_json& value, std::vector<std::string>& out) {
    if (value.is_string()) {
        out.push_back(value.get<std::string>());
    } else if (value.is_array()) {
        for (const auto& item : value) collect_strings(item, out);
    } else if (value.is_object()) {
        for (auto it = value.begin(); it != value.end(); ++it) {
            collect_strings(it.value(), out);
        }
    }
    // numbers, booleans and nulls are skipped
}

std::vector<std::string> read_list_key(const ordered_json& doc, const char* key) {
    std::vector<std::string> raw;
    if (doc.contains(key)) collect_strings(doc[key], raw);
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& item : raw) {
        std::string t = util::trim(item);
        if (t.empty()) continue;
        if (seen.insert(util::to_lower(t)).second) out.push_back(t);
    }
    return out;
}

}  // namespace

CharacterPrediction parse_prediction(const std::string& json_text,
                                     const std::string& character_id) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("prediction is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top-level JSON must be an object");

    CharacterPrediction pred;
    pred.character_id = character_id;
    if (auto age = read_scalar_key(doc, "age")) {
        std::string folded = util::to_lower(*age);
        if (age_ordinal(folded)) pred.age = folded;
    }
    pred.gender = read_scalar_key(doc, "gender");
    pred.origin = read_list_key(doc, "origin");
    pred.residence = read_list_key(doc, "residence");
    pred.spoken_languages = read_list_key(doc, "spoken_languages");
    pred.type_value = read_scalar_key(doc, "type");
    pred.occupation = read_list_key(doc, "occupation");
    pred.physical_health = read_scalar_key(doc, "physical_health");
    return pred;
}

bool prediction_has(const CharacterPrediction& pred, AttributeKind kind) {
    switch (kind) {
        case AttributeKind::age: return pred.age.has_value();
        case AttributeKind::gender: return pred.gender.has_value();
        case AttributeKind::origin: return !pred.origin.empty();
        case AttributeKind::residence: return !pred.residence.empty();
        case AttributeKind::spoken_languages: return !pred.spoken_languages.empty();
        case AttributeKind::type: return pred.type_value.has_value();
        case AttributeKind::occupation: return !pred.occupation.empty();
        case AttributeKind::physical_health: return pred.physical_health.has_value();
    }
    return false;
}

std::vector<std::string> prediction_values(const CharacterPrediction& pred,
                                           AttributeKind kind) {
    switch (kind) {
        case AttributeKind::origin: return pred.origin;
        case AttributeKind::residence: return pred.residence;
        case AttributeKind::spoken_languages: return pred.spoken_languages;
        case AttributeKind::occupation: return pred.occupation;
        default: {
            auto s = prediction_scalar(pred, kind);
            if (s) return {*s};
            return {};
        }
    }
}

std::optional<std::string> prediction_scalar(const CharacterPrediction& pred,
                                             AttributeKind kind) {
    switch (kind) {
        case AttributeKind::age: return pred.age;
        case AttributeKind::gender: return pred.gender;
        case AttributeKind::type: return pred.type_value;
        case AttributeKind::physical_health: return pred.physical_health;
        default: return std::nullopt;
    }
}

std::string prediction_to_json(const CharacterPrediction& pred) {
    ordered_json obj;
    obj["character_id"] = pred.character_id;
    auto scalar = [](const std::optional<std::string>& v) {
        return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    obj["age"] = scalar(pred.age);
    obj["gender"] = scalar(pred.gender);
    obj["origin"] = pred.origin;
    obj["residence"] = pred.residence;
    obj["spoken_languages"] = pred.spoken_languages;
    obj["type"] = scalar(pred.type_value);
    obj["occupation"] = pred.occupation;
    obj["physical_health"] = scalar(pred.physical_health);
    ordered_json prov;
    prov["model_id"] = pred.provenance.model_id;
    prov["template_version"] = pred.provenance.template_version;
    prov["timestamp"] = pred.provenance.timestamp;
    prov["run_id"] = pred.provenance.run_id;
    obj["provenance"] = prov;
    obj["error"] = scalar(pred.error);
    return obj.dump();
}

CharacterPrediction prediction_from_json(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(std::string("invalid prediction JSON: ") + e.what());
    }
    if (!doc.is_object()) throw LoadError("prediction must be a JSON object");
    std::string character_id;
    if (doc.contains("character_id") && doc["character_id"].is_string()) {
        character_id = doc["character_id"].get<std::string>();
    }
    CharacterPrediction pred = parse_prediction(json_text, character_id);
    if (doc.contains("provenance") && doc["provenance"].is_object()) {
        const auto& prov = doc["provenance"];
        pred.provenance.model_id = prov.value("model_id", std::string{});
        pred.provenance.template_version =
            prov.value("template_version", std::string{});
        pred.provenance.timestamp = prov.value("timestamp", std::string{});
        pred.provenance.run_id = prov.value("run_id", std::string{});
    }
    if (doc.contains("error") && doc["error"].is_string()) {
        pred.error = doc["error"].get<std::string>();
    }
    return pred;
}

std::vector<CharacterPrediction> load_predictions(const std::string& path) {
    std::string content = util::read_file(path);
    std::vector<CharacterPrediction> preds;
    auto lines = util::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (util::trim(lines[i]).empty()) continue;
        try {
            auto probe = ordered_json::parse(lines[i]);
            if (is_run_header(probe)) continue;
            preds.push_back(prediction_from_json(lines[i]));
        } catch (const nlohmann::json::parse_error& e) {
            throw LoadError(path + ":" + std::to_string(i + 1) + ": " + e.what());
        } catch (const Error& e) {
            throw LoadError(path + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return preds;
}

void save_predictions(const std::string& path,
                      const std::vector<CharacterPrediction>& preds) {
    std::string out;
    for (const auto& pred : preds) {
        out += prediction_to_json(pred);
        out += '\n';
    }
    util::write_file(path, out);
}

}  // namespace svocal
