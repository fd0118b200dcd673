#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "svocal/attributes.hpp"

namespace svocal {

// Cosine value reported when the prediction is missing; calibration maps it
// to 0 exactly.
inline constexpr double kMissingScore = -1.0;

struct SimilarityScore {
    AttributeKind kind = AttributeKind::origin;
    std::string character_id;
    double cosine = 0.0;
    std::string gold_text;
    std::string pred_text;
};

struct HasCalibration {
    AttributeKind kind = AttributeKind::origin;
    std::string instruction;
    // x strictly increasing, y non-decreasing, y in [0, 1].
    std::vector<std::pair<double, double>> breakpoints;
    std::size_t fitted_on = 0;
};

// Least-squares non-decreasing fit by pool-adjacent-violators. Points with
// equal x are averaged first; one breakpoint is emitted per distinct x so
// that every fitted value is recovered exactly by interpolation.
HasCalibration fit_isotonic(AttributeKind kind,
                            const std::vector<std::pair<double, double>>& pairs);

// Piecewise-linear interpolation between breakpoints, clamped to the fitted
// range outside it. The missing-prediction sentinel maps to 0.
double apply_calibration_value(const HasCalibration& cal, double score);
std::pair<std::vector<double>, double> apply_calibration(
    const HasCalibration& cal, const std::vector<SimilarityScore>& scores);

// Embedding instruction used when comparing gold and predicted values of an
// open-class attribute.
std::string default_similarity_instruction(AttributeKind kind);

// Calibration file: one JSON object keyed by attribute name, each entry
// {instruction, breakpoints: [[x, y], ...], fitted_on}. A non-empty run_id
// is stored alongside the entries.
void save_calibrations(const std::string& path,
                       const std::vector<HasCalibration>& cals,
                       const std::string& run_id = "");
std::vector<HasCalibration> load_calibrations(const std::string& path);

}  // namespace svocal
