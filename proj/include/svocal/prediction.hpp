#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svocal/attributes.hpp"

namespace svocal {

struct Provenance {
    std::string model_id;
    std::string template_version;
    std::string timestamp;
    std::string run_id;
};

struct CharacterPrediction {
    std::string character_id;
    std::optional<std::string> age;
    std::optional<std::string> gender;
    std::vector<std::string> origin;
    std::vector<std::string> residence;
    std::vector<std::string> spoken_languages;
    std::optional<std::string> type_value;
    std::vector<std::string> occupation;
    std::optional<std::string> physical_health;
    Provenance provenance;
    std::optional<std::string> error;
};

bool prediction_has(const CharacterPrediction& pred, AttributeKind kind);
// Scalar attributes come back as singleton lists.
std::vector<std::string> prediction_values(const CharacterPrediction& pred,
                                           AttributeKind kind);
std::optional<std::string> prediction_scalar(const CharacterPrediction& pred,
                                             AttributeKind kind);

// Stable key order: character_id, the eight attributes in enum order, then
// provenance and error.
std::string prediction_to_json(const CharacterPrediction& pred);
CharacterPrediction prediction_from_json(const std::string& json_text);

std::vector<CharacterPrediction> load_predictions(const std::string& path);
void save_predictions(const std::string& path,
                      const std::vector<CharacterPrediction>& preds);

}  // namespace svocal
