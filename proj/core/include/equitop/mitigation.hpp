#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "equitop/cohort.hpp"
#include "equitop/metrics.hpp"

namespace equitop {

/// One record of the combined validation set annotated with its group's
/// recall value at its own depth. recall_value is the within-group recall
/// among the group's top rank_in_group records, so negatives inherit the
/// value of the last positive above them.
struct MergeEntry {
    std::string entity_id;
    std::string group;
    double score = 0.0;
    int label = 0;
    std::size_t rank_in_group = 0;  // 1-based
    double recall_value = 0.0;
    uint64_t tie_key = 0;
};

/// The combined cohort under the equalizer's total order: ascending
/// (recall_value, rank_in_group, tie hash). The first k entries of this
/// sequence are exactly the k smallest annotated recall values, and within
/// every group they form a prefix of its ranking.
std::vector<MergeEntry> merge_order(const PredictionSet& preds,
                                    const std::string& model_id,
                                    uint64_t seed);

/// As above but with a per-group choice of model: each group's records are
/// ranked and annotated under its own model's scores before merging.
std::vector<MergeEntry> merge_order_per_group(const PredictionSet& preds,
                                              const std::map<std::string, std::string>& group_models,
                                              uint64_t seed);

struct GroupAllocation {
    std::size_t k = 0;
    /// Validation score of the group's k-th ranked member; 1.0 sentinel when
    /// k = 0.
    double threshold = 1.0;
    std::string model_id;

    bool operator==(const GroupAllocation&) const = default;
};

/// Per-group list sizes k_g with sum(k_g) = k_total, derived from a
/// validation cohort, plus the score thresholds those sizes imply there.
struct EqualizedAllocation {
    std::size_t k_total = 0;
    uint64_t seed = 0;
    Date source_cohort_date;
    std::map<std::string, GroupAllocation> groups;

    bool operator==(const EqualizedAllocation&) const = default;

    std::string to_json() const;
    static EqualizedAllocation from_json(const std::string& text);
};

/// Recall-equalizing allocation: annotate every validation record with its
/// within-group recall value, order the combined set ascending, and let the
/// first k records set the per-group counts.
EqualizedAllocation equalize_allocation(const PredictionSet& val,
                                        const std::string& model_id,
                                        std::size_t k,
                                        uint64_t seed);

/// Allocation built directly from a merge sequence (used by the composite
/// strategy, where groups carry different models).
EqualizedAllocation allocation_from_merge(const std::vector<MergeEntry>& merged,
                                          const std::map<std::string, std::string>& group_models,
                                          std::size_t k,
                                          uint64_t seed,
                                          Date source_cohort_date);

struct SelectionResult {
    std::set<std::string> entity_ids;
    std::vector<std::string> warnings;
};

/// Takes each group's top k_g from the test cohort, ranked under the
/// allocation's model for that group with the given tie seed. Groups present
/// in the test cohort but absent from the allocation get zero slots and a
/// warning; a test group smaller than its k_g raises ShortfallError listing
/// every deficit (no silent backfill).
SelectionResult apply_allocation(const PredictionSet& test,
                                 const EqualizedAllocation& alloc,
                                 uint64_t seed);

/// Group-specific affine score transform s = multiplier * score - 0.5 with
/// multiplier = 1 + lambda / pi. With lambda derived from a threshold t the
/// sign of s reproduces the threshold rule: s >= 0 iff score >= t.
struct ScaledScoreParams {
    struct PerGroup {
        double lambda = 0.0;
        double pi = 0.0;
        double multiplier = 1.0;
    };
    std::map<std::string, PerGroup> by_group;
};

/// lambda_g = pi_g * (0.5 / t_g - 1). Requires t_g in (0, 1] and pi_g > 0.
/// The multiplier is nudged by at most one ulp so that a record scoring
/// exactly t_g lands on the selected side of s >= 0.
ScaledScoreParams lambda_from_thresholds(const GroupStats& stats,
                                         const std::map<std::string, double>& thresholds);

/// Adjusted score per record, aligned with preds.records(). Every record's
/// group must have params; the transform never reorders within a group.
std::vector<double> scaled_scores(const PredictionSet& preds, const ScaledScoreParams& params);

/// {entities of `model_id` rows with score >= t_group}; groups without a
/// threshold select nothing.
std::set<std::string> select_by_group_thresholds(const PredictionSet& preds,
                                                 const std::string& model_id,
                                                 const std::map<std::string, double>& thresholds);

/// {entities of `model_id` rows with scaled score >= 0}; groups without
/// params select nothing.
std::set<std::string> select_by_scaled_scores(const PredictionSet& preds,
                                              const std::string& model_id,
                                              const ScaledScoreParams& params);

}  // namespace equitop
