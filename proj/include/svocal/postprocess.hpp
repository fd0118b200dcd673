#pragma once

#include <string>
#include <vector>

#include "svocal/errors.hpp"
#include "svocal/prediction.hpp"

namespace svocal {

struct RepairStep {
    std::string rule;
    bool applied = false;
};

// One entry per pipeline rule, in the fixed order the rules run.
struct RepairLog {
    std::vector<RepairStep> steps;
    bool any_applied() const;
    bool applied(const std::string& rule) const;
};

struct RepairResult {
    std::string text;
    RepairLog log;
};

class RepairError : public Error {
public:
    RepairError(const std::string& message, RepairLog log)
        : Error(message), log_(std::move(log)) {}
    const RepairLog& log() const { return log_; }

private:
    RepairLog log_;
};

// Rule identifiers in pipeline order.
const std::vector<std::string>& repair_rule_names();

// Runs the fixed rule pipeline over raw model output until the text parses
// as JSON; throws RepairError (carrying the log) when it still does not.
RepairResult repair_json(const std::string& raw);

// Coerces parsed JSON into a typed prediction. Unknown keys are ignored,
// scalar fields receiving non-strings become null, list fields accept
// scalars as singletons and have nested structures flattened.
CharacterPrediction parse_prediction(const std::string& json_text,
                                     const std::string& character_id);

}  // namespace svocal
