#include "svocal/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "svocal/errors.hpp"
#include "svocal/jsonl.hpp"
#include "svocal/util.hpp"

namespace svocal {

HasCalibration fit_isotonic(AttributeKind kind,
                            const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw ContractError("isotonic fit needs at least one pair");
    for (const auto& [x, y] : pairs) {
        (void)x;
        if (y < 0.0 || y > 1.0)
            throw ContractError("human scores must lie in [0, 1]");
    }

    std::vector<std::pair<double, double>> sorted = pairs;
    std::sort(sorted.begin(), sorted.end());

    // Average equal-x points, tracking multiplicities as weights.
    std::vector<double> xs, ys, ws;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            sum += sorted[j].second;
            ++j;
        }
        xs.push_back(sorted[i].first);
        ys.push_back(sum / static_cast<double>(j - i));
        ws.push_back(static_cast<double>(j - i));
        i = j;
    }

    // Pool adjacent violators: blocks carry (weighted mean, weight, extent).
    std::vector<double> mean, weight;
    std::vector<std::size_t> count;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mean.push_back(ys[k]);
        weight.push_back(ws[k]);
        count.push_back(1);
        while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
            double w = weight[weight.size() - 2] + weight.back();
            double m = (mean[mean.size() - 2] * weight[weight.size() - 2] +
                        mean.back() * weight.back()) /
                       w;
            mean.pop_back();
            weight.pop_back();
            std::size_t c = count.back();
            count.pop_back();
            mean.back() = m;
            weight.back() = w;
            count.back() += c;
        }
    }

    HasCalibration cal;
    cal.kind = kind;
    cal.instruction = default_similarity_instruction(kind);
    cal.fitted_on = pairs.size();
    std::size_t pos = 0;
    for (std::size_t b = 0; b < mean.size(); ++b) {
        for (std::size_t k = 0; k < count[b]; ++k) {
            cal.breakpoints.emplace_back(xs[pos++], mean[b]);
        }
    }
    return cal;
}

double apply_calibration_value(const HasCalibration& cal, double score) {
    if (cal.breakpoints.empty()) throw ContractError("calibration has no breakpoints");
    if (score == kMissingScore) return 0.0;
    const auto& bp = cal.breakpoints;
    if (score <= bp.front().first) return bp.front().second;
    if (score >= bp.back().first) return bp.back().second;
    for (std::size_t i = 1; i < bp.size(); ++i) {
        if (score <= bp[i].first) {
            double x0 = bp[i - 1].first, y0 = bp[i - 1].second;
            double x1 = bp[i].first, y1 = bp[i].second;
            if (score == x1) return y1;
            double t = (score - x0) / (x1 - x0);
            return y0 + t * (y1 - y0);
        }
    }
    return bp.back().second;
}

std::pair<std::vector<double>, double> apply_calibration(
    const HasCalibration& cal, const std::vector<SimilarityScore>& scores) {
    std::vector<double> values;
    values.reserve(scores.size());
    double sum = 0.0;
    for (const auto& s : scores) {
        if (s.kind != cal.kind)
            throw ContractError("calibration fitted for a different attribute");
        double v = apply_calibration_value(cal, s.cosine);
        values.push_back(v);
        sum += v;
    }
    double mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    return {values, mean};
}

std::string default_similarity_instruction(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::origin:
            return "Represent the geographic origin of a person for semantic "
                   "comparison.";
        case AttributeKind::residence:
            return "Represent the place of residence of a person for semantic "
                   "comparison.";
        case AttributeKind::occupation:
            return "Represent the occupation of a person for semantic comparison.";
        case AttributeKind::physical_health:
            return "Represent the health condition of a person for semantic "
                   "comparison.";
        case AttributeKind::type:
            return "Represent the type of entity a character is for semantic "
                   "comparison.";
        case AttributeKind::spoken_languages:
            return "Represent the languages spoken by a person for semantic "
                   "comparison.";
        case AttributeKind::age:
            return "Represent the age category of a person for semantic "
                   "comparison.";
        case AttributeKind::gender:
            return "Represent the gender of a person for semantic comparison.";
    }
    throw ContractError("unknown attribute kind");
}

void save_calibrations(const std::string& path,
                       const std::vector<HasCalibration>& cals,
                       const std::string& run_id) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    if (!run_id.empty()) doc["run_id"] = run_id;
    for (const auto& cal : cals) {
        nlohmann::ordered_json entry;
        entry["instruction"] = cal.instruction;
        auto bps = nlohmann::ordered_json::array();
        for (const auto& [x, y] : cal.breakpoints) {
            bps.push_back(nlohmann::ordered_json::array({x, y}));
        }
        entry["breakpoints"] = bps;
        entry["fitted_on"] = cal.fitted_on;
        doc[std::string(attribute_name(cal.kind))] = entry;
    }
    util::write_file(path, doc.dump(2) + "\n");
}

std::vector<HasCalibration> load_calibrations(const std::string& path) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(util::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(path + ": invalid calibration JSON (" + e.what() + ")");
    }
    if (!doc.is_object()) throw LoadError(path + ": calibration root must be an object");
    std::vector<HasCalibration> cals;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() == "run_id") continue;
        auto kind = attribute_from_name(it.key());
        if (!kind) throw LoadError(path + ": unknown attribute " + it.key());
        HasCalibration cal;
        cal.kind = *kind;
        const auto& entry = it.value();
        cal.instruction = entry.value("instruction", std::string{});
        cal.fitted_on = entry.value("fitted_on", std::size_t{0});
        if (!entry.contains("breakpoints") || !entry["breakpoints"].is_array())
            throw LoadError(path + ": breakpoints missing for " + it.key());
        double prev_x = -std::numeric_limits<double>::infinity();
        double prev_y = -std::numeric_limits<double>::infinity();
        for (const auto& bp : entry["breakpoints"]) {
            if (!bp.is_array() || bp.size() != 2)
                throw LoadError(path + ": breakpoint must be [x, y]");
            double x = bp[0].get<double>();
            double y = bp[1].get<double>();
            if (x <= prev_x)
                throw LoadError(path + ": breakpoint x values must increase");
            if (y < prev_y)
                throw LoadError(path + ": breakpoint y values must not decrease");
            prev_x = x;
            prev_y = y;
            cal.breakpoints.emplace_back(x, y);
        }
        if (cal.breakpoints.empty())
            throw LoadError(path + ": empty breakpoints for " + it.key());
        cals.push_back(std::move(cal));
    }
    return cals;
}

}  // namespace svocal
