#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace svocal {

// Class predicted when a prediction is missing; always scores zero credit.
inline constexpr const char* kNoneClass = "none";

struct ClassScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct F1Report {
    std::map<std::string, ClassScore> per_class;
    double aggregate = 0.0;
    std::string mode;  // weighted, micro, soft-weighted
};

// Symmetric class-distance weights. weight(a, a) is always 1.0; pairs never
// set default to 0.0. An empty class set means any label is accepted.
class WeightMatrix {
public:
    static WeightMatrix identity();
    // child/teenager/adult/senior with 0.8 for adjacent categories.
    static WeightMatrix age();

    void set_classes(std::vector<std::string> classes);
    void set_weight(const std::string& a, const std::string& b, double w);

    double weight(const std::string& a, const std::string& b) const;
    bool accepts(const std::string& label) const;
    const std::vector<std::string>& classes() const { return classes_; }

private:
    std::vector<std::string> classes_;
    std::map<std::pair<std::string, std::string>, double> weights_;
};

// Support-weighted mean of per-class one-vs-rest F1. Missing predictions
// count as the "none" class. extra_classes extends the reported class set.
F1Report weighted_f1(const std::vector<std::string>& gold,
                     const std::vector<std::optional<std::string>>& pred,
                     const std::vector<std::string>& extra_classes = {});

// Fractional true positives: each instance contributes weight(gold, pred) to
// the gold class recall numerator and the pred class precision numerator. A
// class nobody predicted has undefined precision and falls back to F1 =
// recall, which reduces to the standard score under identity weights.
F1Report soft_f1(const std::vector<std::string>& gold,
                 const std::vector<std::optional<std::string>>& pred,
                 const WeightMatrix& weights);

// Global TP/FP/FN over (instance, label) pairs.
F1Report micro_f1_multilabel(const std::vector<std::vector<std::string>>& gold_sets,
                             const std::vector<std::vector<std::string>>& pred_sets);

}  // namespace svocal
