#include "svocal/metrics.hpp"

#include <algorithm>

#include "svocal/attributes.hpp"
#include "svocal/errors.hpp"

namespace svocal {

namespace {

double safe_f1(double p, double r) {
    if (p + r <= 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

std::vector<std::string> resolve_pred(
    const std::vector<std::optional<std::string>>& pred) {
    std::vector<std::string> out;
    out.reserve(pred.size());
    for (const auto& p : pred) out.push_back(p ? *p : kNoneClass);
    return out;
}

}  // namespace

WeightMatrix WeightMatrix::identity() { return WeightMatrix{}; }

WeightMatrix WeightMatrix::age() {
    WeightMatrix m;
    const auto& cats = age_categories();
    m.set_classes({cats.begin(), cats.end()});
    for (std::size_t i = 0; i + 1 < cats.size(); ++i) {
        m.set_weight(cats[i], cats[i + 1], 0.8);
    }
    return m;
}

void WeightMatrix::set_classes(std::vector<std::string> classes) {
    classes_ = std::move(classes);
}

void WeightMatrix::set_weight(const std::string& a, const std::string& b,
                              double w) {
    weights_[{a, b}] = w;
    weights_[{b, a}] = w;
}

double WeightMatrix::weight(const std::string& a, const std::string& b) const {
    if (a == b) return 1.0;
    auto it = weights_.find({a, b});
    if (it != weights_.end()) return it->second;
    return 0.0;
}

bool WeightMatrix::accepts(const std::string& label) const {
    if (classes_.empty()) return true;
    return std::find(classes_.begin(), classes_.end(), label) != classes_.end();
}

F1Report weighted_f1(const std::vector<std::string>& gold,
                     const std::vector<std::optional<std::string>>& pred,
                     const std::vector<std::string>& extra_classes) {
    if (gold.size() != pred.size())
        throw ContractError("gold and pred lengths differ");
    if (gold.empty()) throw ContractError("empty label sequences");

    std::vector<std::string> preds = resolve_pred(pred);
    std::set<std::string> classes(gold.begin(), gold.end());
    classes.insert(preds.begin(), preds.end());
    classes.insert(extra_classes.begin(), extra_classes.end());

    F1Report report;
    report.mode = "weighted";
    double weighted_sum = 0.0;
    for (const auto& cls : classes) {
        std::size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            bool g = gold[i] == cls;
            bool p = preds[i] == cls;
            if (g) ++support;
            if (g && p) ++tp;
            if (!g && p) ++fp;
            if (g && !p) ++fn;
        }
        ClassScore score;
        score.support = support;
        score.precision = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
        score.recall = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
        score.f1 = safe_f1(score.precision, score.recall);
        weighted_sum += score.f1 * static_cast<double>(support);
        report.per_class[cls] = score;
    }
    report.aggregate = weighted_sum / static_cast<double>(gold.size());
    return report;
}

F1Report soft_f1(const std::vector<std::string>& gold,
                 const std::vector<std::optional<std::string>>& pred,
                 const WeightMatrix& weights) {
    if (gold.size() != pred.size())
        throw ContractError("gold and pred lengths differ");
    if (gold.empty()) throw ContractError("empty label sequences");

    for (const auto& g : gold) {
        if (!weights.accepts(g)) throw ContractError("unknown gold label: " + g);
    }
    for (const auto& p : pred) {
        if (p && !weights.accepts(*p))
            throw ContractError("unknown predicted label: " + *p);
    }

    std::vector<std::string> preds = resolve_pred(pred);
    std::set<std::string> classes(gold.begin(), gold.end());
    classes.insert(preds.begin(), preds.end());

    std::map<std::string, double> recall_num, precision_num;
    std::map<std::string, std::size_t> support, pred_count;
    for (const auto& cls : classes) {
        recall_num[cls] = precision_num[cls] = 0.0;
        support[cls] = pred_count[cls] = 0;
    }
    for (std::size_t i = 0; i < gold.size(); ++i) {
        double credit = pred[i] ? weights.weight(gold[i], preds[i]) : 0.0;
        recall_num[gold[i]] += credit;
        precision_num[preds[i]] += credit;
        ++support[gold[i]];
        ++pred_count[preds[i]];
    }

    F1Report report;
    report.mode = "soft-weighted";
    double weighted_sum = 0.0;
    for (const auto& cls : classes) {
        ClassScore score;
        score.support = support[cls];
        score.recall = support[cls]
                           ? recall_num[cls] / static_cast<double>(support[cls])
                           : 0.0;
        if (pred_count[cls] > 0) {
            score.precision =
                precision_num[cls] / static_cast<double>(pred_count[cls]);
            score.f1 = safe_f1(score.precision, score.recall);
        } else {
            score.precision = 0.0;
            score.f1 = score.recall;
        }
        weighted_sum += score.f1 * static_cast<double>(score.support);
        report.per_class[cls] = score;
    }
    report.aggregate = weighted_sum / static_cast<double>(gold.size());
    return report;
}

F1Report micro_f1_multilabel(
    const std::vector<std::vector<std::string>>& gold_sets,
    const std::vector<std::vector<std::string>>& pred_sets) {
    if (gold_sets.size() != pred_sets.size())
        throw ContractError("gold and pred lengths differ");

    std::size_t tp = 0, fp = 0, fn = 0;
    std::map<std::string, ClassScore> per_label;
    for (std::size_t i = 0; i < gold_sets.size(); ++i) {
        std::set<std::string> g(gold_sets[i].begin(), gold_sets[i].end());
        std::set<std::string> p(pred_sets[i].begin(), pred_sets[i].end());
        for (const auto& label : g) {
            ++per_label[label].support;
            if (p.count(label)) {
                ++tp;
            } else {
                ++fn;
            }
        }
        for (const auto& label : p) {
            if (!g.count(label)) {
                ++fp;
                per_label[label];
            }
        }
    }

    F1Report report;
    report.mode = "micro";
    report.per_class = std::move(per_label);
    double denom = 2.0 * tp + fp + fn;
    report.aggregate = denom > 0.0 ? 2.0 * tp / denom : 0.0;
    return report;
}

}  // namespace svocal
