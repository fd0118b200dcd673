#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace svocal {

enum class AttributeKind {
    age,
    gender,
    origin,
    residence,
    spoken_languages,
    type,
    occupation,
    physical_health,
};

inline constexpr int kAttributeCount = 8;

const std::array<AttributeKind, kAttributeCount>& all_attribute_kinds();

// Stable lower_snake serialization name ("spoken_languages" etc).
std::string_view attribute_name(AttributeKind kind);
std::optional<AttributeKind> attribute_from_name(std::string_view name);

// origin, residence, spoken_languages and occupation hold multiple values;
// the rest are single strings.
bool is_list_attribute(AttributeKind kind);

// Age categories in ordinal order: child < teenager < adult < senior.
const std::array<std::string, 4>& age_categories();
std::optional<int> age_ordinal(std::string_view category);

// Year buckets: 0-12 child, 13-17 teenager, 18-59 adult, 60+ senior.
std::string age_from_years(int years);

// 1.0 on the diagonal, 0.8 for adjacent categories, 0.0 otherwise.
double age_weight(std::string_view gold_category, std::string_view pred_category);

}  // namespace svocal
