#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "equitop/date.hpp"

namespace equitop {

/// One entity's modeled risk score and observed outcome for one cohort and
/// one model specification.
struct PredictionRecord {
    std::string entity_id;
    Date as_of_date;
    std::string model_id;
    double score = 0.0;  // probability-like, in [0,1]
    int label = 0;       // 0 or 1
    std::string group;   // value of the designated protected attribute

    bool operator==(const PredictionRecord&) const = default;
};

/// A validated, immutable scored cohort: every record shares one as_of date,
/// (entity_id, as_of_date, model_id) is unique, and an entity's label and
/// group agree across model rows. Safe for concurrent read-only use.
class PredictionSet {
public:
    /// Validates and takes ownership; throws ValidationError / UniquenessError
    /// on contract violations. `source` names the input in error messages.
    static PredictionSet from_records(std::vector<PredictionRecord> records,
                                      std::string attribute_name,
                                      const std::string& source = "<records>");

    const std::vector<PredictionRecord>& records() const { return records_; }
    const std::string& attribute_name() const { return attribute_name_; }
    Date cohort_date() const { return cohort_date_; }
    const std::set<std::string>& model_ids() const { return model_ids_; }
    const std::set<std::string>& groups() const { return groups_; }

    /// Number of distinct entities (not rows; rows repeat per model).
    std::size_t entity_count() const { return entity_count_; }

    /// Records for one model, in input order. Throws LookupError if absent.
    std::vector<const PredictionRecord*> for_model(const std::string& model_id) const;

private:
    std::vector<PredictionRecord> records_;
    std::string attribute_name_;
    Date cohort_date_;
    std::set<std::string> model_ids_;
    std::set<std::string> groups_;
    std::size_t entity_count_ = 0;
};

/// Per-group cohort composition. pi is the joint mass P[G=g, Y=1]; prevalence
/// is the within-group rate P[Y=1 | G=g]. Counts are over entities.
struct GroupStats {
    struct PerGroup {
        std::size_t size = 0;
        std::size_t positives = 0;
        double pi = 0.0;
        double prevalence = 0.0;
    };
    std::map<std::string, PerGroup> by_group;
    std::size_t total = 0;
    std::size_t total_positives = 0;

    double overall_prevalence() const {
        return total == 0 ? 0.0 : static_cast<double>(total_positives) / static_cast<double>(total);
    }
};

/// CSV schema: header `entity_id,as_of_date,model_id,score,label,<attribute>`
/// (extra columns are ignored). Missing column → SchemaError; bad score,
/// label, date, or empty group → ValidationError with the 1-based line
/// number; duplicate (entity, date, model) → UniquenessError.
PredictionSet parse_predictions(const std::filesystem::path& file_path,
                                const std::string& attribute_name);

/// Inverse of parse_predictions; preserves record order and exact scores.
void write_predictions(const PredictionSet& preds, const std::filesystem::path& file_path);

/// Entity-level counts per group; groups with zero members are absent.
/// Throws DomainError on an empty set.
GroupStats compute_group_stats(const PredictionSet& preds);

}  // namespace equitop
