#include "svocal/attributes.hpp"

#include <cmath>
#include <stdexcept>

#include "svocal/errors.hpp"

namespace svocal {

const std::array<AttributeKind, kAttributeCount>& all_attribute_kinds() {
    static const std::array<AttributeKind, kAttributeCount> kinds = {
        AttributeKind::age,
        AttributeKind::gender,
        AttributeKind::origin,
        AttributeKind::residence,
        AttributeKind::spoken_languages,
        AttributeKind::type,
        AttributeKind::occupation,
        AttributeKind::physical_health,
    };
    return kinds;
}

std::string_view attribute_name(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::age: return "age";
        case AttributeKind::gender: return "gender";
        case AttributeKind::origin: return "origin";
        case AttributeKind::residence: return "residence";
        case AttributeKind::spoken_languages: return "spoken_languages";
        case AttributeKind::type: return "type";
        case AttributeKind::occupation: return "occupation";
        case AttributeKind::physical_health: return "physical_health";
    }
    throw ContractError("unknown attribute kind");
}

std::optional<AttributeKind> attribute_from_name(std::string_view name) {
    for (AttributeKind kind : all_attribute_kinds()) {
        if (attribute_name(kind) == name) return kind;
    }
    return std::nullopt;
}

bool is_list_attribute(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::origin:
        case AttributeKind::residence:
        case AttributeKind::spoken_languages:
        case AttributeKind::occupation:
            return true;
        default:
            return false;
    }
}

const std::array<std::string, 4>& age_categories() {
    static const std::array<std::string, 4> cats = {"child", "teenager", "adult",
                                                    "senior"};
    return cats;
}

std::optional<int> age_ordinal(std::string_view category) {
    const auto& cats = age_categories();
    for (int i = 0; i < static_cast<int>(cats.size()); ++i) {
        if (cats[i] == category) return i;
    }
    return std::nullopt;
}

std::string age_from_years(int years) {
    if (years < 0) throw ContractError("age in years must be non-negative");
    if (years <= 12) return "child";
    if (years <= 17) return "teenager";
    if (years <= 59) return "adult";
    return "senior";
}

double age_weight(std::string_view gold_category, std::string_view pred_category) {
    auto g = age_ordinal(gold_category);
    auto p = age_ordinal(pred_category);
    if (!g || !p) return 0.0;
    int d = std::abs(*g - *p);
    if (d == 0) return 1.0;
    if (d == 1) return 0.8;
    return 0.0;
}

}  // namespace svocal
