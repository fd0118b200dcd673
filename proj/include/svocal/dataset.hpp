#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svocal/attributes.hpp"
#include "svocal/prediction.hpp"

namespace svocal {

struct GoldRecord {
    std::string character_id;
    std::string book_id;
    std::string name;
    std::vector<std::string> aliases;
    std::optional<std::string> age;
    std::optional<std::string> gender;
    std::vector<std::string> origin;
    std::vector<std::string> residence;
    std::vector<std::string> spoken_languages;
    std::string type_value;
    std::vector<std::string> occupation;
    std::optional<std::string> physical_health;
};

struct AttributeCoverage {
    std::size_t filled = 0;
    std::size_t total = 0;
    double fraction = 0.0;
};

struct CoverageReport {
    std::map<AttributeKind, AttributeCoverage> per_attribute;
};

bool gold_has(const GoldRecord& rec, AttributeKind kind);
std::vector<std::string> gold_values(const GoldRecord& rec, AttributeKind kind);
std::optional<std::string> gold_scalar(const GoldRecord& rec, AttributeKind kind);

// JSON Lines, one record per line, keys: character_id, book_id, name,
// aliases, then the eight attribute keys. Schema violations report the line.
std::vector<GoldRecord> load_gold(const std::string& path);
void save_gold(const std::string& path, const std::vector<GoldRecord>& records);

// Trims items, deduplicates lists case-insensitively keeping the first
// occurrence, and canonicalizes language names.
GoldRecord normalize_values(GoldRecord record);

// Canonical spelling for a language name; falls back to word title-casing
// when the name is not in the shipped table.
std::string canonical_language(std::string_view name);

// Most frequent non-missing value per attribute, ties broken
// lexicographically; list attributes use the most frequent single item.
struct MajorityValues {
    std::map<AttributeKind, std::optional<std::string>> values;
};
MajorityValues majority_values(const std::vector<GoldRecord>& records);
// One prediction per record, all carrying the same majority values.
std::vector<CharacterPrediction> majority_baseline(
    const std::vector<GoldRecord>& records);

CoverageReport coverage_stats(const std::vector<GoldRecord>& records);

// Converts a checkout of the published character data (JSON array or JSON
// Lines per book, loosely keyed) into the gold schema above.
std::vector<GoldRecord> convert_external_dataset(const std::string& dir);

}  // namespace svocal
