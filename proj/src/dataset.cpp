#include "svocal/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "svocal/errors.hpp"
#include "svocal/jsonl.hpp"
#include "svocal/util.hpp"

namespace svocal {

namespace {

using nlohmann::ordered_json;

std::vector<std::string> dedup_case_insensitive(const std::vector<std::string>& in) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& item : in) {
        std::string trimmed = util::trim(item);
        if (trimmed.empty()) continue;
        std::string key = util::to_lower(trimmed);
        if (seen.insert(key).second) out.push_back(trimmed);
    }
    return out;
}

std::optional<std::string> opt_string_field(const ordered_json& obj,
                                            const char* key,
                                            std::vector<std::string>& errors) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    if (!obj[key].is_string()) {
        errors.push_back(std::string(key) + " must be a string or null");
        return std::nullopt;
    }
    std::string v = util::trim(obj[key].get<std::string>());
    if (v.empty()) return std::nullopt;
    return v;
}

std::vector<std::string> list_field(const ordered_json& obj, const char* key,
                                    std::vector<std::string>& errors) {
    std::vector<std::string> out;
    if (!obj.contains(key) || obj[key].is_null()) return out;
    if (!obj[key].is_array()) {
        errors.push_back(std::string(key) + " must be an array");
        return out;
    }
    for (const auto& item : obj[key]) {
        if (!item.is_string()) {
            errors.push_back(std::string(key) + " items must be strings");
            continue;
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

GoldRecord record_from_json(const ordered_json& obj,
                            std::vector<std::string>& errors) {
    GoldRecord rec;
    if (!obj.is_object()) {
        errors.push_back("record must be a JSON object");
        return rec;
    }
    auto cid = opt_string_field(obj, "character_id", errors);
    auto bid = opt_string_field(obj, "book_id", errors);
    auto name = opt_string_field(obj, "name", errors);
    if (!cid) errors.push_back("character_id is required");
    if (!bid) errors.push_back("book_id is required");
    if (!name) errors.push_back("name is required");
    rec.character_id = cid.value_or("");
    rec.book_id = bid.value_or("");
    rec.name = name.value_or("");
    rec.aliases = dedup_case_insensitive(list_field(obj, "aliases", errors));
    rec.aliases.erase(
        std::remove_if(rec.aliases.begin(), rec.aliases.end(),
                       [&](const std::string& a) { return a == rec.name; }),
        rec.aliases.end());

    rec.age = opt_string_field(obj, "age", errors);
    if (rec.age && !age_ordinal(*rec.age)) {
        errors.push_back("age must be one of child, teenager, adult, senior");
        rec.age.reset();
    }
    rec.gender = opt_string_field(obj, "gender", errors);
    if (rec.gender && *rec.gender != "male" && *rec.gender != "female") {
        errors.push_back("gender must be male or female");
        rec.gender.reset();
    }
    rec.origin = list_field(obj, "origin", errors);
    rec.residence = list_field(obj, "residence", errors);
    rec.spoken_languages = list_field(obj, "spoken_languages", errors);
    auto type_value = opt_string_field(obj, "type", errors);
    if (!type_value) errors.push_back("type is required");
    rec.type_value = type_value.value_or("");
    rec.occupation = list_field(obj, "occupation", errors);
    rec.physical_health = opt_string_field(obj, "physical_health", errors);
    return rec;
}

ordered_json record_to_json(const GoldRecord& rec) {
    ordered_json obj;
    obj["character_id"] = rec.character_id;
    obj["book_id"] = rec.book_id;
    obj["name"] = rec.name;
    obj["aliases"] = rec.aliases;
    if (rec.age) obj["age"] = *rec.age; else obj["age"] = nullptr;
    if (rec.gender) obj["gender"] = *rec.gender; else obj["gender"] = nullptr;
    obj["origin"] = rec.origin;
    obj["residence"] = rec.residence;
    obj["spoken_languages"] = rec.spoken_languages;
    obj["type"] = rec.type_value;
    obj["occupation"] = rec.occupation;
    if (rec.physical_health) obj["physical_health"] = *rec.physical_health;
    else obj["physical_health"] = nullptr;
    return obj;
}

const std::unordered_map<std::string, std::string>& language_table() {
    static const std::unordered_map<std::string, std::string> table = {
        {"english", "English"},   {"french", "French"},
        {"german", "German"},     {"spanish", "Spanish"},
        {"italian", "Italian"},   {"russian", "Russian"},
        {"portuguese", "Portuguese"}, {"dutch", "Dutch"},
        {"latin", "Latin"},       {"greek", "Greek"},
        {"arabic", "Arabic"},     {"chinese", "Chinese"},
        {"japanese", "Japanese"}, {"hindi", "Hindi"},
        {"hebrew", "Hebrew"},     {"danish", "Danish"},
        {"swedish", "Swedish"},   {"norwegian", "Norwegian"},
        {"polish", "Polish"},     {"turkish", "Turkish"},
        {"persian", "Persian"},   {"irish", "Irish"},
        {"welsh", "Welsh"},       {"gaelic", "Gaelic"},
        {"yiddish", "Yiddish"},   {"sanskrit", "Sanskrit"},
        {"urdu", "Urdu"},         {"bengali", "Bengali"},
        {"korean", "Korean"},     {"icelandic", "Icelandic"},
        {"finnish", "Finnish"},   {"hungarian", "Hungarian"},
        {"czech", "Czech"},       {"romanian", "Romanian"},
        {"ukrainian", "Ukrainian"}, {"swahili", "Swahili"},
        {"malay", "Malay"},       {"thai", "Thai"},
        {"vietnamese", "Vietnamese"}, {"old norse", "Old Norse"},
        {"old english", "Old English"}, {"middle english", "Middle English"},
        {"ancient greek", "Ancient Greek"}, {"scots", "Scots"},
        {"cornish", "Cornish"},   {"breton", "Breton"},
        {"flemish", "Flemish"},   {"provencal", "Provencal"},
        {"catalan", "Catalan"},   {"basque", "Basque"},
        {"romani", "Romani"},     {"esperanto", "Esperanto"},
        {"mandarin", "Mandarin"}, {"cantonese", "Cantonese"},
    };
    return table;
}

std::string title_case_words(std::string_view name) {
    std::string out(name);
    bool at_word_start = true;
    for (char& c : out) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            at_word_start = true;
        } else {
            if (at_word_start) c = static_cast<char>(std::toupper(uc));
            at_word_start = false;
        }
    }
    return out;
}

}  // namespace

bool gold_has(const GoldRecord& rec, AttributeKind kind) {
    switch (kind) {
        case AttributeKind::age: return rec.age.has_value();
        case AttributeKind::gender: return rec.gender.has_value();
        case AttributeKind::origin: return !rec.origin.empty();
        case AttributeKind::residence: return !rec.residence.empty();
        case AttributeKind::spoken_languages: return !rec.spoken_languages.empty();
        case AttributeKind::type: return !rec.type_value.empty();
        case AttributeKind::occupation: return !rec.occupation.empty();
        case AttributeKind::physical_health: return rec.physical_health.has_value();
    }
    return false;
}

std::vector<std::string> gold_values(const GoldRecord& rec, AttributeKind kind) {
    switch (kind) {
        case AttributeKind::origin: return rec.origin;
        case AttributeKind::residence: return rec.residence;
        case AttributeKind::spoken_languages: return rec.spoken_languages;
        case AttributeKind::occupation: return rec.occupation;
        default: {
            auto s = gold_scalar(rec, kind);
            if (s) return {*s};
            return {};
        }
    }
}

std::optional<std::string> gold_scalar(const GoldRecord& rec, AttributeKind kind) {
    switch (kind) {
        case AttributeKind::age: return rec.age;
        case AttributeKind::gender: return rec.gender;
        case AttributeKind::type:
            if (rec.type_value.empty()) return std::nullopt;
            return rec.type_value;
        case AttributeKind::physical_health: return rec.physical_health;
        default: return std::nullopt;
    }
}

std::vector<GoldRecord> load_gold(const std::string& path) {
    auto rows = read_jsonl(path);
    std::vector<GoldRecord> records;
    std::vector<std::string> all_errors;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::string> errors;
        GoldRecord rec = record_from_json(rows[i], errors);
        if (errors.empty()) {
            records.push_back(std::move(rec));
        } else {
            for (const auto& e : errors) {
                all_errors.push_back("line " + std::to_string(i + 1) + ": " + e);
            }
        }
    }
    if (!all_errors.empty()) {
        std::string msg = path + ": " + std::to_string(all_errors.size()) +
                          " schema violation(s)";
        std::size_t shown = std::min<std::size_t>(all_errors.size(), 20);
        for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + all_errors[i];
        if (shown < all_errors.size()) msg += "\n  ...";
        throw LoadError(msg);
    }
    return records;
}

void save_gold(const std::string& path, const std::vector<GoldRecord>& records) {
    std::vector<ordered_json> rows;
    rows.reserve(records.size());
    for (const auto& rec : records) rows.push_back(record_to_json(rec));
    write_jsonl(path, rows);
}

std::string canonical_language(std::string_view name) {
    std::string trimmed = util::trim(name);
    auto it = language_table().find(util::to_lower(trimmed));
    if (it != language_table().end()) return it->second;
    return title_case_words(trimmed);
}

GoldRecord normalize_values(GoldRecord record) {
    record.name = util::trim(record.name);
    for (auto& a : record.aliases) a = util::trim(a);
    record.aliases = dedup_case_insensitive(record.aliases);
    record.origin = dedup_case_insensitive(record.origin);
    record.residence = dedup_case_insensitive(record.residence);
    record.occupation = dedup_case_insensitive(record.occupation);
    for (auto& lang : record.spoken_languages) lang = canonical_language(lang);
    record.spoken_languages = dedup_case_insensitive(record.spoken_languages);
    record.type_value = util::trim(record.type_value);
    if (record.age) record.age = util::trim(*record.age);
    if (record.gender) record.gender = util::trim(*record.gender);
    if (record.physical_health)
        record.physical_health = util::trim(*record.physical_health);
    return record;
}

MajorityValues majority_values(const std::vector<GoldRecord>& records) {
    if (records.empty()) throw ContractError("majority baseline needs records");
    MajorityValues out;
    for (AttributeKind kind : all_attribute_kinds()) {
        std::map<std::string, std::size_t> counts;
        for (const auto& rec : records) {
            if (!gold_has(rec, kind)) continue;
            for (const auto& v : gold_values(rec, kind)) ++counts[v];
        }
        std::optional<std::string> best;
        std::size_t best_count = 0;
        for (const auto& [value, count] : counts) {
            if (count > best_count) {
                best = value;
                best_count = count;
            }
        }
        out.values[kind] = best;
    }
    return out;
}

std::vector<CharacterPrediction> majority_baseline(
    const std::vector<GoldRecord>& records) {
    MajorityValues majority = majority_values(records);
    std::vector<CharacterPrediction> preds;
    preds.reserve(records.size());
    for (const auto& rec : records) {
        CharacterPrediction p;
        p.character_id = rec.character_id;
        p.age = majority.values.at(AttributeKind::age);
        p.gender = majority.values.at(AttributeKind::gender);
        if (auto v = majority.values.at(AttributeKind::origin)) p.origin = {*v};
        if (auto v = majority.values.at(AttributeKind::residence)) p.residence = {*v};
        if (auto v = majority.values.at(AttributeKind::spoken_languages))
            p.spoken_languages = {*v};
        p.type_value = majority.values.at(AttributeKind::type);
        if (auto v = majority.values.at(AttributeKind::occupation)) p.occupation = {*v};
        p.physical_health = majority.values.at(AttributeKind::physical_health);
        p.provenance.model_id = "majority-baseline";
        p.provenance.template_version = "baseline-v1";
        p.provenance.timestamp = util::timestamp_utc(true);
        preds.push_back(std::move(p));
    }
    return preds;
}

CoverageReport coverage_stats(const std::vector<GoldRecord>& records) {
    CoverageReport report;
    for (AttributeKind kind : all_attribute_kinds()) {
        AttributeCoverage cov;
        cov.total = records.size();
        for (const auto& rec : records) {
            if (gold_has(rec, kind)) ++cov.filled;
        }
        cov.fraction = cov.total == 0
                           ? 0.0
                           : static_cast<double>(cov.filled) /
                                 static_cast<double>(cov.total);
        report.per_attribute[kind] = cov;
    }
    return report;
}

namespace {

std::string canon_key(std::string key) {
    key = util::to_lower(util::trim(key));
    for (char& c : key) {
        if (c == ' ' || c == '-') c = '_';
    }
    return key;
}

std::vector<std::string> loose_list(const ordered_json& value) {
    std::vector<std::string> out;
    if (value.is_string()) {
        out.push_back(value.get<std::string>());
    } else if (value.is_array()) {
        for (const auto& item : value) {
            if (item.is_string()) out.push_back(item.get<std::string>());
        }
    }
    return out;
}

void apply_loose_field(GoldRecord& rec, const std::string& key,
                       const ordered_json& value) {
    if (value.is_null()) return;
    if (key == "character_id" || key == "id") {
        if (value.is_string()) rec.character_id = value.get<std::string>();
    } else if (key == "book_id" || key == "book") {
        if (value.is_string()) rec.book_id = value.get<std::string>();
    } else if (key == "name" || key == "character" || key == "character_name") {
        if (value.is_string()) rec.name = value.get<std::string>();
    } else if (key == "aliases" || key == "also_known_as" || key == "alias" ||
               key == "given_name" || key == "given_names") {
        auto items = loose_list(value);
        rec.aliases.insert(rec.aliases.end(), items.begin(), items.end());
    } else if (key == "age") {
        if (value.is_number()) {
            rec.age = age_from_years(value.get<int>());
        } else if (value.is_string()) {
            std::string v = util::to_lower(util::trim(value.get<std::string>()));
            if (age_ordinal(v)) rec.age = v;
        }
    } else if (key == "gender" || key == "sex") {
        if (value.is_string()) {
            std::string v = util::to_lower(util::trim(value.get<std::string>()));
            if (v == "male" || v == "female") rec.gender = v;
        }
    } else if (key == "origin") {
        rec.origin = loose_list(value);
    } else if (key == "residence") {
        rec.residence = loose_list(value);
    } else if (key == "spoken_languages" || key == "languages" ||
               key == "language") {
        rec.spoken_languages = loose_list(value);
    } else if (key == "type" || key == "type_value") {
        if (value.is_string()) rec.type_value = value.get<std::string>();
    } else if (key == "occupation" || key == "occupations") {
        rec.occupation = loose_list(value);
    } else if (key == "physical_health" || key == "health") {
        if (value.is_string()) rec.physical_health = value.get<std::string>();
    }
}

GoldRecord loose_record(const ordered_json& obj) {
    GoldRecord rec;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string key = canon_key(it.key());
        if (key == "attributes" || key == "properties") {
            if (it.value().is_object()) {
                for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                    apply_loose_field(rec, canon_key(jt.key()), jt.value());
                }
            }
            continue;
        }
        apply_loose_field(rec, key, it.value());
    }
    return rec;
}

}  // namespace

std::vector<GoldRecord> convert_external_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw LoadError("not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".json" || ext == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw LoadError("no .json or .jsonl files under " + dir);

    std::vector<GoldRecord> records;
    for (const auto& path : files) {
        std::vector<ordered_json> rows;
        if (path.extension() == ".jsonl") {
            rows = read_jsonl(path.string());
        } else {
            ordered_json doc;
            try {
                doc = ordered_json::parse(util::read_file(path.string()));
            } catch (const nlohmann::json::parse_error& e) {
                throw LoadError(path.string() + ": invalid JSON (" + e.what() + ")");
            }
            if (doc.is_array()) {
                for (auto& item : doc) rows.push_back(item);
            } else {
                rows.push_back(doc);
            }
        }
        for (const auto& row : rows) {
            if (!row.is_object()) continue;
            GoldRecord rec = loose_record(row);
            if (rec.book_id.empty()) rec.book_id = path.stem().string();
            records.push_back(std::move(rec));
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].character_id.empty()) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "ch%04zu", i + 1);
            records[i].character_id = buf;
        }
        records[i] = normalize_values(std::move(records[i]));
    }
    return records;
}

}  // namespace svocal
