#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "svocal/attributes.hpp"
#include "svocal/backends.hpp"
#include "svocal/dataset.hpp"
#include "svocal/isotonic.hpp"
#include "svocal/metrics.hpp"
#include "svocal/prediction.hpp"

namespace svocal {

// Results for one attribute. Which fields are filled depends on the
// attribute family: closed classes carry F1 reports, open classes carry
// similarity scores (and calibrated values when a calibration was given).
struct AttributeResult {
    AttributeKind kind = AttributeKind::age;
    std::size_t n = 0;             // joined instances with gold present
    std::size_t missing_pred = 0;  // of those, instances with no prediction
    std::optional<F1Report> weighted;
    std::optional<F1Report> soft;
    std::optional<F1Report> micro;
    std::vector<SimilarityScore> similarities;
    std::optional<double> mean_cosine;  // over instances with a prediction
    std::vector<double> has_values;     // aligned with similarities
    std::optional<double> mean_has;     // missing predictions count as 0
};

struct EvaluationReport {
    std::size_t n_gold = 0;
    std::size_t n_predictions = 0;
    std::size_t n_joined = 0;
    std::vector<std::string> unmatched_gold;
    std::vector<std::string> unmatched_predictions;
    std::map<AttributeKind, AttributeResult> attributes;
};

// Embeds both sides with the attribute's instruction and returns their
// cosine. Lists are serialized with ", " in stored order. An empty pred
// yields the missing-score sentinel without calling the backend.
SimilarityScore open_class_similarity(AttributeKind kind,
                                      const std::string& character_id,
                                      const std::vector<std::string>& gold,
                                      const std::vector<std::string>& pred,
                                      EmbeddingBackend& backend);

// Stage 1: weighted F1 over human/non-human (a prediction counts as human
// only when it case-folds to "human"). Stage 2: similarity scores for the
// instances whose gold type is non-human; a "human" prediction there scores
// a cosine of 0. Stage 2 is skipped when backend is null.
struct TypeEvaluation {
    F1Report stage1;
    std::vector<SimilarityScore> stage2;
};
TypeEvaluation evaluate_type_two_stage(
    const std::vector<std::string>& character_ids,
    const std::vector<std::string>& gold,
    const std::vector<std::optional<std::string>>& pred,
    EmbeddingBackend* backend);

// Joins gold and predictions on character_id and computes every applicable
// metric. Instances whose gold value is missing are excluded per attribute.
// backend may be null (open-class similarity skipped); calibrations may be
// null (raw cosines only).
EvaluationReport evaluate_predictions(
    const std::vector<GoldRecord>& gold,
    const std::vector<CharacterPrediction>& predictions,
    EmbeddingBackend* backend = nullptr,
    const std::map<AttributeKind, HasCalibration>* calibrations = nullptr);

// run_id, when non-empty, is embedded in every produced artifact.
nlohmann::ordered_json report_to_json(const EvaluationReport& report,
                                      const std::string& run_id = "");
std::string report_to_markdown(const EvaluationReport& report,
                               const std::string& run_id = "");

// One line per similarity score: character_id, attribute, gold, pred,
// cosine, and has when calibrated.
void save_similarity_scores(const std::string& path,
                            const EvaluationReport& report,
                            const std::string& run_id = "");

// Per-instance CSV, one row per (character, attribute) with gold present.
// Two reports with the same joined instances produce a paired file.
std::string scores_to_csv(const EvaluationReport& report,
                          const std::string& run_id = "");
std::string paired_scores_to_csv(const EvaluationReport& a,
                                 const EvaluationReport& b,
                                 const std::string& run_id = "");

}  // namespace svocal
