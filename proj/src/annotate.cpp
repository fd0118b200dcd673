#include "svocal/annotate.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "svocal/errors.hpp"
#include "svocal/jsonl.hpp"
#include "svocal/util.hpp"

namespace svocal {

namespace {

using nlohmann::ordered_json;

constexpr double kScoreTolerance = 1e-9;

const std::vector<double> kFiveLevelScale = {0.0, 0.25, 0.5, 0.75, 1.0};
const std::vector<double> kFourLevelScale = {0.0, 0.33, 0.66, 1.0};

const std::vector<std::string> kPlaceHelp = {
    "0.0: completely wrong (unrelated, or wrong continent)",
    "0.25: partially related at a high level (correct continent, wrong country)",
    "0.5: partially correct at a lower level (correct country, wrong region) "
    "or correct but missing places",
    "0.75: correct but less specific than the gold, or overly specific and "
    "not fully verifiable",
    "1.0: fully correct, synonyms and very close cities included",
};

const std::vector<std::string> kHealthHelp = {
    "0.0: not related, or wrong good/poor status",
    "0.33: vague, but correctly identifies good/poor health",
    "0.66: correct but less specific than gold",
    "1.0: fully correct or synonymous",
};

const std::vector<std::string> kOccupationHelp = {
    "0.0: completely wrong occupation",
    "0.25: same general domain but incorrect",
    "0.5: partially correct but lacks some unrelated occupations",
    "0.75: same domain but less precise, or correct plus an unrelated extra",
    "1.0: correct or synonym, may be more precise than gold",
};

const std::vector<std::string> kTypeHelp = {
    "0.0: completely wrong, or human/non-human confusion",
    "0.33: wrong entity but correct human/non-human distinction",
    "0.66: more general than gold",
    "1.0: correct or synonym",
};

void write_line(const std::string& path, const ordered_json& line) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot open " + path + " for appending");
    out << line.dump() << "\n";
}

AttributeKind parse_attribute(const ordered_json& line, const std::string& path) {
    if (!line.contains("attribute") || !line["attribute"].is_string())
        throw LoadError(path + ": line is missing the attribute key");
    auto kind = attribute_from_name(line["attribute"].get<std::string>());
    if (!kind)
        throw LoadError(path + ": unknown attribute '" +
                        line["attribute"].get<std::string>() + "'");
    return *kind;
}

std::string read_string(const ordered_json& line, const char* key) {
    if (!line.contains(key)) return "";
    if (line[key].is_null()) return "";
    if (!line[key].is_string()) return line[key].dump();
    return line[key].get<std::string>();
}

// Returns the entered score, or nullopt when the annotator quits.
std::optional<double> prompt_score(AttributeKind kind, std::istream& in,
                                   std::ostream& out) {
    const auto& scale = judgment_scale(kind);
    while (true) {
        out << "score";
        out << " (";
        for (std::size_t i = 0; i < scale.size(); ++i) {
            if (i) out << ", ";
            out << scale[i];
        }
        out << ", q to stop): " << std::flush;
        std::string entry;
        if (!std::getline(in, entry)) return std::nullopt;
        entry = util::trim(entry);
        if (entry == "q" || entry == "Q") return std::nullopt;
        try {
            std::size_t used = 0;
            double value = std::stod(entry, &used);
            if (used == entry.size() && is_valid_judgment_score(kind, value)) {
                for (double allowed : scale) {
                    if (std::fabs(allowed - value) <= kScoreTolerance)
                        return allowed;
                }
            }
        } catch (const std::exception&) {
        }
        out << "not on the scale for " << attribute_name(kind)
            << ", try again\n";
    }
}

bool file_exists(const std::string& path) {
    std::ifstream probe(path);
    return probe.good();
}

}  // namespace

const std::vector<double>& judgment_scale(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::origin:
        case AttributeKind::residence:
        case AttributeKind::occupation:
            return kFiveLevelScale;
        case AttributeKind::physical_health:
        case AttributeKind::type:
            return kFourLevelScale;
        default:
            throw ContractError(std::string(attribute_name(kind)) +
                                " has no judgment scale");
    }
}

const std::vector<std::string>& judgment_scale_help(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::origin:
        case AttributeKind::residence:
            return kPlaceHelp;
        case AttributeKind::occupation:
            return kOccupationHelp;
        case AttributeKind::physical_health:
            return kHealthHelp;
        case AttributeKind::type:
            return kTypeHelp;
        default:
            throw ContractError(std::string(attribute_name(kind)) +
                                " has no judgment scale");
    }
}

bool is_valid_judgment_score(AttributeKind kind, double score) {
    for (double allowed : judgment_scale(kind)) {
        if (std::fabs(allowed - score) <= kScoreTolerance) return true;
    }
    return false;
}

std::vector<JudgmentRecord> load_judgments(const std::string& path) {
    std::vector<JudgmentRecord> records;
    for (const auto& line : read_jsonl(path)) {
        JudgmentRecord rec;
        rec.character_id = read_string(line, "character_id");
        rec.kind = parse_attribute(line, path);
        rec.gold = read_string(line, "gold");
        rec.pred = read_string(line, "pred");
        if (!line.contains("score") || !line["score"].is_number())
            throw LoadError(path + ": judgment for " + rec.character_id +
                            " is missing a numeric score");
        rec.score = line["score"].get<double>();
        rec.annotator_id = read_string(line, "annotator_id");
        if (rec.character_id.empty())
            throw LoadError(path + ": judgment with empty character_id");
        if (!is_valid_judgment_score(rec.kind, rec.score))
            throw LoadError(path + ": score " + std::to_string(rec.score) +
                            " is not on the " +
                            std::string(attribute_name(rec.kind)) + " scale");
        records.push_back(std::move(rec));
    }
    return records;
}

void append_judgment(const std::string& path, const JudgmentRecord& record) {
    ordered_json line;
    line["character_id"] = record.character_id;
    line["attribute"] = std::string(attribute_name(record.kind));
    line["gold"] = record.gold;
    line["pred"] = record.pred;
    line["score"] = record.score;
    line["annotator_id"] = record.annotator_id;
    write_line(path, line);
}

std::vector<AgeAnnotation> load_age_annotations(const std::string& path) {
    std::vector<AgeAnnotation> records;
    for (const auto& line : read_jsonl(path)) {
        AgeAnnotation rec;
        rec.character_id = read_string(line, "character_id");
        if (rec.character_id.empty())
            throw LoadError(path + ": annotation with empty character_id");
        if (line.contains("age") && line["age"].is_string()) {
            std::string age = line["age"].get<std::string>();
            if (!age_ordinal(age))
                throw LoadError(path + ": unknown age category '" + age + "'");
            rec.age = age;
        }
        rec.annotator_id = read_string(line, "annotator_id");
        records.push_back(std::move(rec));
    }
    return records;
}

void append_age_annotation(const std::string& path, const AgeAnnotation& record) {
    ordered_json line;
    line["character_id"] = record.character_id;
    if (record.age) {
        line["age"] = *record.age;
    } else {
        line["age"] = nullptr;
    }
    line["annotator_id"] = record.annotator_id;
    write_line(path, line);
}

std::vector<JudgmentItem> load_judgment_items(const std::string& path) {
    std::vector<JudgmentItem> items;
    for (const auto& line : read_jsonl(path)) {
        if (is_run_header(line)) continue;
        JudgmentItem item;
        item.character_id = read_string(line, "character_id");
        item.kind = parse_attribute(line, path);
        item.gold = read_string(line, "gold");
        item.pred = read_string(line, "pred");
        if (item.character_id.empty())
            throw LoadError(path + ": item with empty character_id");
        items.push_back(std::move(item));
    }
    return items;
}

std::size_t annotate_judgments(const std::vector<JudgmentItem>& items,
                               const std::string& annotator_id,
                               const std::string& out_path, std::istream& in,
                               std::ostream& out) {
    std::set<std::pair<std::string, AttributeKind>> done;
    if (file_exists(out_path)) {
        for (const auto& rec : load_judgments(out_path)) {
            done.emplace(rec.character_id, rec.kind);
        }
    }
    std::size_t written = 0;
    for (const auto& item : items) {
        if (done.count({item.character_id, item.kind})) continue;
        out << "\n" << item.character_id << " / " << attribute_name(item.kind)
            << "\n";
        out << "  gold: " << item.gold << "\n";
        out << "  pred: " << (item.pred.empty() ? "(missing)" : item.pred)
            << "\n";
        for (const auto& help : judgment_scale_help(item.kind)) {
            out << "  " << help << "\n";
        }
        auto score = prompt_score(item.kind, in, out);
        if (!score) {
            out << "stopping; " << written << " new judgments saved to "
                << out_path << "\n";
            return written;
        }
        JudgmentRecord rec{item.character_id, item.kind, item.gold,
                           item.pred,         *score,    annotator_id};
        append_judgment(out_path, rec);
        done.emplace(item.character_id, item.kind);
        ++written;
    }
    out << "\ndone; " << written << " new judgments saved to " << out_path
        << "\n";
    return written;
}

std::size_t annotate_age(const std::vector<GoldRecord>& characters,
                         const std::string& annotator_id,
                         const std::string& out_path, std::istream& in,
                         std::ostream& out) {
    std::set<std::string> done;
    if (file_exists(out_path)) {
        for (const auto& rec : load_age_annotations(out_path)) {
            done.insert(rec.character_id);
        }
    }
    std::size_t written = 0;
    for (const auto& rec : characters) {
        if (done.count(rec.character_id)) continue;
        out << "\n" << rec.character_id << ": " << rec.name;
        if (!rec.aliases.empty())
            out << " (also known as: " << util::join(rec.aliases, ", ") << ")";
        out << "\n";
        out << "  categories: child (0-12), teenager (13-17), adult (18-59), "
               "senior (60+)\n";
        out << "  press enter to leave blank, q to stop\n";
        std::optional<std::string> chosen;
        bool quit = false;
        while (true) {
            out << "age: " << std::flush;
            std::string entry;
            if (!std::getline(in, entry)) {
                quit = true;
                break;
            }
            entry = util::to_lower(util::trim(entry));
            if (entry == "q") {
                quit = true;
                break;
            }
            if (entry.empty()) break;
            if (age_ordinal(entry)) {
                chosen = entry;
                break;
            }
            out << "unknown category, try again\n";
        }
        if (quit) {
            out << "stopping; " << written << " new annotations saved to "
                << out_path << "\n";
            return written;
        }
        append_age_annotation(out_path,
                              {rec.character_id, chosen, annotator_id});
        done.insert(rec.character_id);
        ++written;
    }
    out << "\ndone; " << written << " new annotations saved to " << out_path
        << "\n";
    return written;
}

std::size_t adjudicate_judgments(const std::string& path_a,
                                 const std::string& path_b,
                                 const std::string& annotator_id,
                                 const std::string& out_path, std::istream& in,
                                 std::ostream& out) {
    auto a_records = load_judgments(path_a);
    auto b_records = load_judgments(path_b);
    std::map<std::pair<std::string, AttributeKind>, JudgmentRecord> b_index;
    for (const auto& rec : b_records) {
        b_index.emplace(std::make_pair(rec.character_id, rec.kind), rec);
    }
    std::set<std::pair<std::string, AttributeKind>> done;
    if (file_exists(out_path)) {
        for (const auto& rec : load_judgments(out_path)) {
            done.emplace(rec.character_id, rec.kind);
        }
    }
    std::size_t written = 0;
    for (const auto& rec : a_records) {
        auto key = std::make_pair(rec.character_id, rec.kind);
        if (done.count(key)) continue;
        auto other = b_index.find(key);
        if (other == b_index.end()) continue;
        JudgmentRecord resolved = rec;
        resolved.annotator_id = annotator_id;
        if (std::fabs(rec.score - other->second.score) <= kScoreTolerance) {
            append_judgment(out_path, resolved);
            done.insert(key);
            ++written;
            continue;
        }
        out << "\n" << rec.character_id << " / " << attribute_name(rec.kind)
            << "\n";
        out << "  gold: " << rec.gold << "\n";
        out << "  pred: " << (rec.pred.empty() ? "(missing)" : rec.pred)
            << "\n";
        out << "  " << rec.annotator_id << " scored " << rec.score << ", "
            << other->second.annotator_id << " scored " << other->second.score
            << "\n";
        for (const auto& help : judgment_scale_help(rec.kind)) {
            out << "  " << help << "\n";
        }
        auto score = prompt_score(rec.kind, in, out);
        if (!score) {
            out << "stopping; " << written << " resolved judgments saved to "
                << out_path << "\n";
            return written;
        }
        resolved.score = *score;
        append_judgment(out_path, resolved);
        done.insert(key);
        ++written;
    }
    out << "\ndone; " << written << " resolved judgments saved to " << out_path
        << "\n";
    return written;
}

}  // namespace svocal
