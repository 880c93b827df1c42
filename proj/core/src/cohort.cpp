#include "equitop/cohort.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "equitop/errors.hpp"
#include "equitop/strings.hpp"

namespace equitop {

namespace {

std::string row_key(const PredictionRecord& r) {
    return r.entity_id + "\x1f" + r.as_of_date.to_string() + "\x1f" + r.model_id;
}

}  // namespace

PredictionSet PredictionSet::from_records(std::vector<PredictionRecord> records,
                                          std::string attribute_name,
                                          const std::string& source) {
    if (records.empty()) {
        throw ValidationError(source + ": prediction set has no records", 0);
    }
    PredictionSet out;
    out.attribute_name_ = std::move(attribute_name);
    out.cohort_date_ = records.front().as_of_date;

    std::unordered_set<std::string> keys;
    keys.reserve(records.size());
    // entity -> (label, group) consistency across model rows
    std::unordered_map<std::string, std::pair<int, std::string>> entities;
    entities.reserve(records.size());

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string where = source + ": record " + std::to_string(i + 1);
        if (r.entity_id.empty()) throw ValidationError(where + ": empty entity_id", i + 1);
        if (!(r.score >= 0.0 && r.score <= 1.0)) {
            throw ValidationError(where + ": score " + format_double(r.score) + " outside [0,1]", i + 1);
        }
        if (r.label != 0 && r.label != 1) {
            throw ValidationError(where + ": label must be 0 or 1", i + 1);
        }
        if (r.group.empty()) throw ValidationError(where + ": empty group value", i + 1);
        if (r.as_of_date != out.cohort_date_) {
            throw ValidationError(where + ": as_of_date " + r.as_of_date.to_string() +
                                      " differs from cohort date " + out.cohort_date_.to_string(),
                                  i + 1);
        }
        if (!keys.insert(row_key(r)).second) {
            throw UniquenessError(source + ": duplicate (entity_id, as_of_date, model_id) = (" +
                                  r.entity_id + ", " + r.as_of_date.to_string() + ", " +
                                  r.model_id + ")");
        }
        auto [it, inserted] = entities.emplace(r.entity_id, std::make_pair(r.label, r.group));
        if (!inserted && (it->second.first != r.label || it->second.second != r.group)) {
            throw ValidationError(where + ": entity " + r.entity_id +
                                      " has inconsistent label or group across model rows",
                                  i + 1);
        }
        out.model_ids_.insert(r.model_id);
        out.groups_.insert(r.group);
    }
    out.entity_count_ = entities.size();
    out.records_ = std::move(records);
    return out;
}

std::vector<const PredictionRecord*> PredictionSet::for_model(const std::string& model_id) const {
    if (!model_ids_.contains(model_id)) {
        throw LookupError("unknown model_id: " + model_id);
    }
    std::vector<const PredictionRecord*> out;
    for (const auto& r : records_) {
        if (r.model_id == model_id) out.push_back(&r);
    }
    return out;
}

PredictionSet parse_predictions(const std::filesystem::path& file_path,
                                const std::string& attribute_name) {
    std::ifstream in(file_path);
    if (!in) {
        throw InputError("cannot open predictions file: " + file_path.string());
    }
    const std::string source = file_path.filename().string();

    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError(source + ": empty file (missing header)", "entity_id");
    }
    const auto header = split_csv_line(line);
    auto column = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw SchemaError(source + ": missing column \"" + name + "\"", name);
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t col_entity = column("entity_id");
    const std::size_t col_date = column("as_of_date");
    const std::size_t col_model = column("model_id");
    const std::size_t col_score = column("score");
    const std::size_t col_label = column("label");
    const std::size_t col_group = column(attribute_name);

    std::vector<PredictionRecord> records;
    std::size_t line_no = 1;  // header
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ValidationError(source + " line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()),
                                  line_no);
        }
        PredictionRecord r;
        r.entity_id = fields[col_entity];
        if (r.entity_id.empty()) {
            throw ValidationError(source + " line " + std::to_string(line_no) + ": empty entity_id",
                                  line_no);
        }
        const auto date = Date::parse(fields[col_date]);
        if (!date) {
            throw ValidationError(source + " line " + std::to_string(line_no) +
                                      ": bad as_of_date \"" + fields[col_date] + "\"",
                                  line_no);
        }
        r.as_of_date = *date;
        r.model_id = fields[col_model];
        const auto score = parse_double(fields[col_score]);
        if (!score || !(*score >= 0.0 && *score <= 1.0)) {
            throw ValidationError(source + " line " + std::to_string(line_no) + ": score \"" +
                                      fields[col_score] + "\" outside [0,1]",
                                  line_no);
        }
        r.score = *score;
        if (fields[col_label] == "0") {
            r.label = 0;
        } else if (fields[col_label] == "1") {
            r.label = 1;
        } else {
            throw ValidationError(source + " line " + std::to_string(line_no) + ": label \"" +
                                      fields[col_label] + "\" must be 0 or 1",
                                  line_no);
        }
        r.group = fields[col_group];
        if (r.group.empty()) {
            throw ValidationError(source + " line " + std::to_string(line_no) +
                                      ": missing group value",
                                  line_no);
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) {
        throw ValidationError(source + ": no data rows", line_no);
    }
    return PredictionSet::from_records(std::move(records), attribute_name, source);
}

void write_predictions(const PredictionSet& preds, const std::filesystem::path& file_path) {
    std::ofstream out(file_path, std::ios::binary);
    if (!out) {
        throw InputError("cannot open output file: " + file_path.string());
    }
    out << "entity_id,as_of_date,model_id,score,label," << preds.attribute_name() << "\n";
    for (const auto& r : preds.records()) {
        out << r.entity_id << ',' << r.as_of_date.to_string() << ',' << r.model_id << ','
            << format_double(r.score) << ',' << r.label << ',' << r.group << "\n";
    }
    if (!out) {
        throw InputError("failed writing " + file_path.string());
    }
}

GroupStats compute_group_stats(const PredictionSet& preds) {
    // Counts are over entities; in a multi-model set each entity appears once
    // per model with identical label and group (enforced at construction), so
    // one model's rows suffice.
    const std::string& first_model = *preds.model_ids().begin();
    GroupStats stats;
    for (const auto& r : preds.records()) {
        if (r.model_id != first_model) continue;
        auto& g = stats.by_group[r.group];
        g.size += 1;
        g.positives += static_cast<std::size_t>(r.label);
        stats.total += 1;
        stats.total_positives += static_cast<std::size_t>(r.label);
    }
    if (stats.total == 0) {
        throw DomainError("compute_group_stats: empty prediction set");
    }
    for (auto& [name, g] : stats.by_group) {
        g.pi = static_cast<double>(g.positives) / static_cast<double>(stats.total);
        g.prevalence = static_cast<double>(g.positives) / static_cast<double>(g.size);
    }
    return stats;
}

}  // namespace equitop
