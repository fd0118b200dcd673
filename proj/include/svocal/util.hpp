#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svocal::util {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Splits on runs of whitespace; never returns empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);
bool contains(std::string_view haystack, std::string_view needle);

// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// FNV-1a over bytes. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// splitmix64: tiny deterministic generator used where std distributions
// would be implementation-defined.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    // Uniform in [0, bound) via rejection-free multiply-shift; bound > 0.
    std::uint64_t next_below(std::uint64_t bound);
    // Uniform double in [0, 1).
    double next_double();

private:
    std::uint64_t state_;
};

// Portable Fisher-Yates (std::shuffle ordering is implementation-defined).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// ISO-8601 UTC timestamp of now, or the fixed epoch string when frozen
// (deterministic runs write identical bytes across invocations).
std::string timestamp_utc(bool frozen);

}  // namespace svocal::util
