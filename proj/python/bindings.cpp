#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svocal/agreement.hpp"
#include "svocal/attributes.hpp"
#include "svocal/dataset.hpp"
#include "svocal/isotonic.hpp"
#include "svocal/metrics.hpp"
#include "svocal/postprocess.hpp"
#include "svocal/prediction.hpp"

namespace py = pybind11;
using namespace svocal;

namespace {

AttributeKind kind_from(const std::string& name) {
    auto kind = attribute_from_name(name);
    if (!kind) throw py::value_error("unknown attribute '" + name + "'");
    return *kind;
}

}  // namespace

PYBIND11_MODULE(_svocal, m) {
    m.doc() =
        "Core routines for inferring and scoring character attributes: JSON "
        "repair, F1 variants, agreement statistics and isotonic calibration.";

    m.def("attribute_names", [] {
        std::vector<std::string> names;
        for (AttributeKind kind : all_attribute_kinds())
            names.emplace_back(attribute_name(kind));
        return names;
    });

    m.def("age_categories", [] {
        const auto& cats = age_categories();
        return std::vector<std::string>(cats.begin(), cats.end());
    });
    m.def("age_from_years", &age_from_years, py::arg("years"));

    m.def(
        "canonical_language",
        [](const std::string& name) { return canonical_language(name); },
        py::arg("name"));

    m.def(
        "repair_json",
        [](const std::string& text) {
            RepairResult result = repair_json(text);
            std::vector<std::string> applied;
            for (const auto& step : result.log.steps) {
                if (step.applied) applied.push_back(step.rule);
            }
            return py::make_tuple(result.text, applied);
        },
        py::arg("text"),
        "Repairs almost-JSON model output; returns (clean_text, "
        "applied_rules).");

    m.def(
        "parse_prediction",
        [](const std::string& json_text, const std::string& character_id) {
            return prediction_to_json(
                parse_prediction(json_text, character_id));
        },
        py::arg("json_text"), py::arg("character_id"),
        "Coerces a repaired reply into the prediction schema, returned as "
        "JSON.");

    m.def(
        "weighted_f1",
        [](const std::vector<std::string>& gold,
           const std::vector<std::optional<std::string>>& pred) {
            return weighted_f1(gold, pred).aggregate;
        },
        py::arg("gold"), py::arg("pred"));

    m.def(
        "soft_f1_age",
        [](const std::vector<std::string>& gold,
           const std::vector<std::optional<std::string>>& pred) {
            return soft_f1(gold, pred, WeightMatrix::age()).aggregate;
        },
        py::arg("gold"), py::arg("pred"),
        "Weighted F1 with 0.8 credit for adjacent age categories.");

    m.def(
        "micro_f1",
        [](const std::vector<std::vector<std::string>>& gold_sets,
           const std::vector<std::vector<std::string>>& pred_sets) {
            return micro_f1_multilabel(gold_sets, pred_sets).aggregate;
        },
        py::arg("gold"), py::arg("pred"));

    m.def(
        "cohen_kappa",
        [](const std::vector<std::string>& a, const std::vector<std::string>& b,
           bool age_weights) {
            if (!age_weights) return cohen_kappa(a, b);
            WeightMatrix weights = WeightMatrix::age();
            return cohen_kappa(a, b, &weights);
        },
        py::arg("a"), py::arg("b"), py::arg("age_weights") = false);

    m.def("krippendorff_alpha_interval", &krippendorff_alpha_interval,
          py::arg("grid"),
          "Interval-distance alpha over an items x annotators grid; missing "
          "cells are None.");

    m.def(
        "spearman_rho",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            CorrelationReport r = spearman_rho(x, y);
            return py::make_tuple(r.rho, r.p_value);
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "fit_isotonic",
        [](const std::vector<std::pair<double, double>>& pairs,
           const std::string& attribute) {
            return fit_isotonic(kind_from(attribute), pairs).breakpoints;
        },
        py::arg("pairs"), py::arg("attribute") = "origin",
        "Non-decreasing least-squares fit; returns (x, y) breakpoints.");

    m.def(
        "apply_isotonic",
        [](const std::vector<std::pair<double, double>>& breakpoints,
           double value, const std::string& attribute) {
            HasCalibration cal;
            cal.kind = kind_from(attribute);
            cal.breakpoints = breakpoints;
            return apply_calibration_value(cal, value);
        },
        py::arg("breakpoints"), py::arg("value"),
        py::arg("attribute") = "origin");

    m.def("missing_score", [] { return kMissingScore; },
          "Sentinel cosine reported when a prediction is missing.");
}
