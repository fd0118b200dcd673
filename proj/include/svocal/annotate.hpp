#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svocal/attributes.hpp"
#include "svocal/dataset.hpp"

namespace svocal {

// One human judgment of a prediction against its gold value.
struct JudgmentRecord {
    std::string character_id;
    AttributeKind kind = AttributeKind::origin;
    std::string gold;
    std::string pred;
    double score = 0.0;
    std::string annotator_id;
};

// One human age annotation; missing age means the annotator left it blank.
struct AgeAnnotation {
    std::string character_id;
    std::optional<std::string> age;
    std::string annotator_id;
};

// The discrete score values an annotator may assign for this attribute.
// Only open-class attributes have a scale.
const std::vector<double>& judgment_scale(AttributeKind kind);

// One interpretation line per scale value, shown during annotation.
const std::vector<std::string>& judgment_scale_help(AttributeKind kind);

bool is_valid_judgment_score(AttributeKind kind, double score);

// Judgments file: JSON Lines {character_id, attribute, gold, pred, score,
// annotator_id}.
std::vector<JudgmentRecord> load_judgments(const std::string& path);
void append_judgment(const std::string& path, const JudgmentRecord& record);

// Age annotations file: JSON Lines {character_id, age, annotator_id}.
std::vector<AgeAnnotation> load_age_annotations(const std::string& path);
void append_age_annotation(const std::string& path, const AgeAnnotation& record);

// A gold/pred pair awaiting judgment, read from a similarity scores file.
struct JudgmentItem {
    std::string character_id;
    AttributeKind kind = AttributeKind::origin;
    std::string gold;
    std::string pred;
};
std::vector<JudgmentItem> load_judgment_items(const std::string& path);

// Interactive loops. Each decision is appended to out_path immediately, and
// items already present there (same character and attribute for this task)
// are skipped, so an interrupted session resumes where it stopped. Entering
// "q" ends the session early. Returns the number of newly written records.
std::size_t annotate_judgments(const std::vector<JudgmentItem>& items,
                               const std::string& annotator_id,
                               const std::string& out_path, std::istream& in,
                               std::ostream& out);

std::size_t annotate_age(const std::vector<GoldRecord>& characters,
                         const std::string& annotator_id,
                         const std::string& out_path, std::istream& in,
                         std::ostream& out);

// Shows every (character, attribute) where the two judgment files disagree
// and asks for a resolved score; agreeing items are copied through.
std::size_t adjudicate_judgments(const std::string& path_a,
                                 const std::string& path_b,
                                 const std::string& annotator_id,
                                 const std::string& out_path, std::istream& in,
                                 std::ostream& out);

}  // namespace svocal
