#include "svocal/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "svocal/errors.hpp"
#include "svocal/jsonl.hpp"
#include "svocal/util.hpp"

namespace svocal {

namespace {

using nlohmann::ordered_json;

std::string serialize_values(const std::vector<std::string>& values) {
    return util::join(values, ", ");
}

std::vector<std::string> canonical_languages(
    const std::vector<std::string>& values) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& v : values) {
        std::string canon = canonical_language(v);
        if (canon.empty()) continue;
        if (seen.insert(util::to_lower(canon)).second) out.push_back(canon);
    }
    return out;
}

bool is_human_text(const std::string& text) {
    return util::to_lower(util::trim(text)) == "human";
}

const HasCalibration* find_calibration(
    const std::map<AttributeKind, HasCalibration>* calibrations,
    AttributeKind kind) {
    if (!calibrations) return nullptr;
    auto it = calibrations->find(kind);
    return it == calibrations->end() ? nullptr : &it->second;
}

void finish_similarity_stats(AttributeResult& result,
                             const HasCalibration* calibration) {
    double sum = 0.0;
    std::size_t scored = 0;
    for (const auto& s : result.similarities) {
        if (s.cosine == kMissingScore && s.pred_text.empty()) continue;
        sum += s.cosine;
        ++scored;
    }
    if (scored > 0) result.mean_cosine = sum / static_cast<double>(scored);
    if (calibration && !result.similarities.empty()) {
        auto [values, mean] = apply_calibration(*calibration, result.similarities);
        result.has_values = std::move(values);
        result.mean_has = mean;
    }
}

ordered_json f1_to_json(const F1Report& report) {
    ordered_json per_class = ordered_json::object();
    for (const auto& [label, score] : report.per_class) {
        per_class[label] = {{"precision", score.precision},
                            {"recall", score.recall},
                            {"f1", score.f1},
                            {"support", score.support}};
    }
    return {{"aggregate", report.aggregate},
            {"mode", report.mode},
            {"per_class", per_class}};
}

std::string format_value(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << v;
    return out.str();
}

void append_csv_field(std::string& row, const std::string& value) {
    bool needs_quotes = value.find_first_of(",\"\n") != std::string::npos;
    if (!row.empty()) row += ',';
    if (!needs_quotes) {
        row += value;
        return;
    }
    row += '"';
    for (char c : value) {
        if (c == '"') row += '"';
        row += c;
    }
    row += '"';
}

struct InstanceRow {
    std::string character_id;
    AttributeKind kind;
    std::string gold;
    std::string pred;
    double cosine;
    std::optional<double> has;
};

std::vector<InstanceRow> collect_rows(const EvaluationReport& report) {
    std::vector<InstanceRow> rows;
    for (const auto& [kind, result] : report.attributes) {
        for (std::size_t i = 0; i < result.similarities.size(); ++i) {
            const auto& s = result.similarities[i];
            InstanceRow row{s.character_id, kind, s.gold_text, s.pred_text,
                            s.cosine, std::nullopt};
            if (i < result.has_values.size()) row.has = result.has_values[i];
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

SimilarityScore open_class_similarity(AttributeKind kind,
                                      const std::string& character_id,
                                      const std::vector<std::string>& gold,
                                      const std::vector<std::string>& pred,
                                      EmbeddingBackend& backend) {
    if (gold.empty())
        throw ContractError("open_class_similarity needs a gold value for " +
                            character_id);
    SimilarityScore score;
    score.kind = kind;
    score.character_id = character_id;
    score.gold_text = serialize_values(gold);
    if (pred.empty()) {
        score.cosine = kMissingScore;
        return score;
    }
    score.pred_text = serialize_values(pred);
    auto embeddings = backend.embed(default_similarity_instruction(kind),
                                    {score.gold_text, score.pred_text});
    score.cosine = cosine(embeddings[0], embeddings[1]);
    return score;
}

TypeEvaluation evaluate_type_two_stage(
    const std::vector<std::string>& character_ids,
    const std::vector<std::string>& gold,
    const std::vector<std::optional<std::string>>& pred,
    EmbeddingBackend* backend) {
    if (gold.size() != pred.size() || gold.size() != character_ids.size())
        throw ContractError("type evaluation inputs differ in length");
    if (gold.empty()) throw ContractError("type evaluation needs instances");

    std::vector<std::string> gold_bin;
    std::vector<std::optional<std::string>> pred_bin;
    gold_bin.reserve(gold.size());
    pred_bin.reserve(pred.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        gold_bin.push_back(is_human_text(gold[i]) ? "human" : "non-human");
        if (!pred[i]) {
            pred_bin.push_back(std::nullopt);
        } else {
            pred_bin.push_back(is_human_text(*pred[i]) ? "human" : "non-human");
        }
    }

    TypeEvaluation out;
    out.stage1 = weighted_f1(gold_bin, pred_bin);
    if (!backend) return out;

    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold_bin[i] == "human") continue;
        if (pred[i] && is_human_text(*pred[i])) {
            SimilarityScore score;
            score.kind = AttributeKind::type;
            score.character_id = character_ids[i];
            score.gold_text = gold[i];
            score.pred_text = *pred[i];
            score.cosine = 0.0;
            out.stage2.push_back(std::move(score));
            continue;
        }
        std::vector<std::string> pred_values;
        if (pred[i]) pred_values.push_back(*pred[i]);
        out.stage2.push_back(open_class_similarity(
            AttributeKind::type, character_ids[i], {gold[i]}, pred_values,
            *backend));
    }
    return out;
}

EvaluationReport evaluate_predictions(
    const std::vector<GoldRecord>& gold,
    const std::vector<CharacterPrediction>& predictions,
    EmbeddingBackend* backend,
    const std::map<AttributeKind, HasCalibration>* calibrations) {
    EvaluationReport report;
    report.n_gold = gold.size();
    report.n_predictions = predictions.size();

    std::map<std::string, const CharacterPrediction*> by_id;
    for (const auto& p : predictions) by_id.emplace(p.character_id, &p);

    std::vector<const GoldRecord*> joined_gold;
    std::vector<const CharacterPrediction*> joined_pred;
    std::set<std::string> matched;
    for (const auto& rec : gold) {
        auto it = by_id.find(rec.character_id);
        if (it == by_id.end()) {
            report.unmatched_gold.push_back(rec.character_id);
            continue;
        }
        matched.insert(rec.character_id);
        joined_gold.push_back(&rec);
        joined_pred.push_back(it->second);
    }
    for (const auto& [id, p] : by_id) {
        if (!matched.count(id)) report.unmatched_predictions.push_back(id);
    }
    report.n_joined = joined_gold.size();
    if (report.n_joined == 0)
        throw ContractError(
            "gold and predictions share no character_id; nothing to evaluate");

    for (AttributeKind kind : all_attribute_kinds()) {
        AttributeResult result;
        result.kind = kind;
        const HasCalibration* calibration = find_calibration(calibrations, kind);

        if (kind == AttributeKind::age || kind == AttributeKind::gender) {
            std::vector<std::string> g;
            std::vector<std::optional<std::string>> p;
            for (std::size_t i = 0; i < joined_gold.size(); ++i) {
                auto gv = gold_scalar(*joined_gold[i], kind);
                if (!gv) continue;
                g.push_back(util::to_lower(*gv));
                auto pv = prediction_scalar(*joined_pred[i], kind);
                if (pv) {
                    p.emplace_back(util::to_lower(*pv));
                } else {
                    p.emplace_back(std::nullopt);
                    ++result.missing_pred;
                }
            }
            result.n = g.size();
            if (!g.empty()) {
                result.weighted = weighted_f1(g, p);
                if (kind == AttributeKind::age)
                    result.soft = soft_f1(g, p, WeightMatrix::age());
            }
        } else if (kind == AttributeKind::type) {
            std::vector<std::string> ids;
            std::vector<std::string> g;
            std::vector<std::optional<std::string>> p;
            for (std::size_t i = 0; i < joined_gold.size(); ++i) {
                auto gv = gold_scalar(*joined_gold[i], kind);
                if (!gv || gv->empty()) continue;
                ids.push_back(joined_gold[i]->character_id);
                g.push_back(*gv);
                auto pv = prediction_scalar(*joined_pred[i], kind);
                if (pv) {
                    p.emplace_back(*pv);
                } else {
                    p.emplace_back(std::nullopt);
                    ++result.missing_pred;
                }
            }
            result.n = g.size();
            if (!g.empty()) {
                auto type_eval = evaluate_type_two_stage(ids, g, p, backend);
                result.weighted = std::move(type_eval.stage1);
                result.similarities = std::move(type_eval.stage2);
                finish_similarity_stats(result, calibration);
            }
        } else if (kind == AttributeKind::spoken_languages) {
            std::vector<std::vector<std::string>> g;
            std::vector<std::vector<std::string>> p;
            for (std::size_t i = 0; i < joined_gold.size(); ++i) {
                auto gv = gold_values(*joined_gold[i], kind);
                if (gv.empty()) continue;
                g.push_back(canonical_languages(gv));
                auto pv = prediction_values(*joined_pred[i], kind);
                if (pv.empty()) ++result.missing_pred;
                p.push_back(canonical_languages(pv));
            }
            result.n = g.size();
            if (!g.empty()) result.micro = micro_f1_multilabel(g, p);
        } else {
            for (std::size_t i = 0; i < joined_gold.size(); ++i) {
                auto gv = gold_values(*joined_gold[i], kind);
                if (gv.empty()) continue;
                ++result.n;
                auto pv = prediction_values(*joined_pred[i], kind);
                if (pv.empty()) ++result.missing_pred;
                if (backend) {
                    result.similarities.push_back(open_class_similarity(
                        kind, joined_gold[i]->character_id, gv, pv, *backend));
                }
            }
            finish_similarity_stats(result, calibration);
        }

        report.attributes.emplace(kind, std::move(result));
    }
    return report;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report,
                                      const std::string& run_id) {
    ordered_json attributes = ordered_json::object();
    for (AttributeKind kind : all_attribute_kinds()) {
        auto it = report.attributes.find(kind);
        if (it == report.attributes.end()) continue;
        const auto& result = it->second;
        ordered_json entry;
        entry["n"] = result.n;
        entry["missing_pred"] = result.missing_pred;
        if (result.weighted) entry["weighted_f1"] = f1_to_json(*result.weighted);
        if (result.soft) entry["soft_f1"] = f1_to_json(*result.soft);
        if (result.micro) entry["micro_f1"] = f1_to_json(*result.micro);
        if (!result.similarities.empty())
            entry["n_scored"] = result.similarities.size();
        if (result.mean_cosine) entry["mean_cosine"] = *result.mean_cosine;
        if (result.mean_has) entry["mean_has"] = *result.mean_has;
        attributes[std::string(attribute_name(kind))] = std::move(entry);
    }
    ordered_json doc;
    if (!run_id.empty()) doc["run_id"] = run_id;
    doc["n_gold"] = report.n_gold;
    doc["n_predictions"] = report.n_predictions;
    doc["n_joined"] = report.n_joined;
    doc["unmatched_gold"] = report.unmatched_gold;
    doc["unmatched_predictions"] = report.unmatched_predictions;
    doc["attributes"] = std::move(attributes);
    return doc;
}

std::string report_to_markdown(const EvaluationReport& report,
                               const std::string& run_id) {
    std::ostringstream out;
    out << "# Evaluation report\n\n";
    if (!run_id.empty()) out << "Run: `" << run_id << "`\n\n";
    out << "Joined " << report.n_joined << " of " << report.n_gold
        << " gold characters against " << report.n_predictions
        << " predictions.\n";
    if (!report.unmatched_gold.empty())
        out << "Gold characters without a prediction: "
            << report.unmatched_gold.size() << ".\n";
    if (!report.unmatched_predictions.empty())
        out << "Predictions without a gold character: "
            << report.unmatched_predictions.size() << ".\n";
    out << "\n| Attribute | Metric | Value | N |\n";
    out << "|---|---|---:|---:|\n";
    for (AttributeKind kind : all_attribute_kinds()) {
        auto it = report.attributes.find(kind);
        if (it == report.attributes.end()) continue;
        const auto& result = it->second;
        const std::string name(attribute_name(kind));
        if (result.weighted) {
            std::string label = kind == AttributeKind::type
                                    ? "weighted F1 (human / non-human)"
                                    : "weighted F1";
            out << "| " << name << " | " << label << " | "
                << format_value(result.weighted->aggregate) << " | " << result.n
                << " |\n";
        }
        if (result.soft)
            out << "| " << name << " | soft F1 | "
                << format_value(result.soft->aggregate) << " | " << result.n
                << " |\n";
        if (result.micro)
            out << "| " << name << " | micro F1 | "
                << format_value(result.micro->aggregate) << " | " << result.n
                << " |\n";
        if (result.mean_cosine)
            out << "| " << name << " | mean cosine | "
                << format_value(*result.mean_cosine) << " | "
                << result.similarities.size() << " |\n";
        if (result.mean_has)
            out << "| " << name << " | mean HAS | "
                << format_value(*result.mean_has) << " | "
                << result.similarities.size() << " |\n";
    }
    return out.str();
}

void save_similarity_scores(const std::string& path,
                            const EvaluationReport& report,
                            const std::string& run_id) {
    std::vector<ordered_json> rows;
    if (!run_id.empty()) rows.push_back(make_run_header(run_id, "similarity_scores"));
    for (const auto& row : collect_rows(report)) {
        ordered_json line;
        line["character_id"] = row.character_id;
        line["attribute"] = std::string(attribute_name(row.kind));
        line["gold"] = row.gold;
        if (row.pred.empty() && row.cosine == kMissingScore) {
            line["pred"] = nullptr;
        } else {
            line["pred"] = row.pred;
        }
        line["cosine"] = row.cosine;
        if (row.has) line["has"] = *row.has;
        rows.push_back(std::move(line));
    }
    write_jsonl(path, rows);
}

std::string scores_to_csv(const EvaluationReport& report,
                          const std::string& run_id) {
    std::string out = "run_id,character_id,attribute,gold,pred,cosine,has\n";
    for (const auto& row : collect_rows(report)) {
        std::string line;
        append_csv_field(line, run_id);
        append_csv_field(line, row.character_id);
        append_csv_field(line, std::string(attribute_name(row.kind)));
        append_csv_field(line, row.gold);
        append_csv_field(line, row.pred);
        append_csv_field(line, format_value(row.cosine));
        append_csv_field(line, row.has ? format_value(*row.has) : "");
        out += line;
        out += '\n';
    }
    return out;
}

std::string paired_scores_to_csv(const EvaluationReport& a,
                                 const EvaluationReport& b,
                                 const std::string& run_id) {
    std::map<std::pair<std::string, AttributeKind>, InstanceRow> b_rows;
    for (auto& row : collect_rows(b)) {
        b_rows.emplace(std::make_pair(row.character_id, row.kind), row);
    }
    std::string out =
        "run_id,character_id,attribute,gold,pred_a,cosine_a,has_a,pred_b,"
        "cosine_b,has_b\n";
    for (const auto& row : collect_rows(a)) {
        auto it = b_rows.find({row.character_id, row.kind});
        if (it == b_rows.end()) continue;
        const auto& other = it->second;
        std::string line;
        append_csv_field(line, run_id);
        append_csv_field(line, row.character_id);
        append_csv_field(line, std::string(attribute_name(row.kind)));
        append_csv_field(line, row.gold);
        append_csv_field(line, row.pred);
        append_csv_field(line, format_value(row.cosine));
        append_csv_field(line, row.has ? format_value(*row.has) : "");
        append_csv_field(line, other.pred);
        append_csv_field(line, format_value(other.cosine));
        append_csv_field(line, other.has ? format_value(*other.has) : "");
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace svocal
