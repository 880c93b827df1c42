#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "equitop/cohort.hpp"

namespace equitop {

struct RankedEntry {
    std::string entity_id;
    double score = 0.0;
    int label = 0;
    std::string group;
    uint64_t tie_key = 0;
};

/// One model's cohort ordered by score descending; equal scores are ordered
/// by a keyed hash of (seed, entity_id), so the result is a pure function of
/// the record multiset and the seed — input row order never matters.
struct RankedList {
    std::string model_id;
    uint64_t seed = 0;
    std::vector<RankedEntry> entries;

    std::size_t size() const { return entries.size(); }
};

RankedList rank(const PredictionSet& preds, const std::string& model_id, uint64_t seed);

/// Fraction of the top k with label 1. Requires 1 <= k <= size.
double precision_at_k(const RankedList& ranked, std::size_t k);

/// Within-group recall as a function of list depth: values[i-1] is the share
/// of the group's positives found in its top i. Zero-positive groups get the
/// constant curve 1 (they demand nothing from an equalizer).
struct RecallCurve {
    std::string group;
    std::size_t positives = 0;
    std::vector<double> values;

    /// Curve value at depth (1-based); depth 0 → 0 (or 1 when positives == 0).
    double at(std::size_t depth) const;
};

RecallCurve recall_curve(const RankedList& ranked, const std::string& group);

std::map<std::string, RecallCurve> group_recall_curves(const RankedList& ranked);

/// ratio_g = recall_reference / recall_g, so values above 1 mean the
/// reference group is favored. recall_g = 0 → +inf sentinel plus a warning;
/// zero reference recall → ComputationError.
struct DisparityResult {
    std::map<std::string, double> ratios;
    std::vector<std::string> warnings;
};

DisparityResult disparity_ratios(const std::map<std::string, double>& recalls,
                                 const std::string& reference);

/// Top-k evaluation of a selected entity set against a cohort: overall
/// precision, per-group recall among the selected, and disparity ratios
/// against the reference group.
struct EvaluationReport {
    std::size_t k = 0;
    double precision_at_k = 0.0;
    std::map<std::string, double> recall;
    std::map<std::string, std::size_t> selected_count;
    std::map<std::string, double> disparity;
    std::string reference_group;
    std::vector<std::string> warnings;

    bool operator==(const EvaluationReport& other) const {
        return k == other.k && precision_at_k == other.precision_at_k &&
               recall == other.recall && selected_count == other.selected_count &&
               disparity == other.disparity && reference_group == other.reference_group;
    }
};

/// Largest group by entity count (ties: lexicographically smallest name).
std::string default_reference_group(const PredictionSet& preds);

EvaluationReport evaluate_selection(const PredictionSet& preds,
                                    const std::set<std::string>& selected,
                                    std::size_t k,
                                    const std::string& reference_group);

std::string report_to_json(const EvaluationReport& report);

}  // namespace equitop
