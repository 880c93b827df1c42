#include "equitop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "equitop/errors.hpp"
#include "equitop/random.hpp"
#include "equitop/strings.hpp"
#include "json_util.hpp"

namespace equitop {

RankedList rank(const PredictionSet& preds, const std::string& model_id, uint64_t seed) {
    const auto rows = preds.for_model(model_id);
    RankedList out;
    out.model_id = model_id;
    out.seed = seed;
    out.entries.reserve(rows.size());
    for (const auto* r : rows) {
        out.entries.push_back(
            {r->entity_id, r->score, r->label, r->group, tie_hash(seed, r->entity_id)});
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const RankedEntry& a, const RankedEntry& b) {
                  if (a.score != b.score) return a.score > b.score;
                  if (a.tie_key != b.tie_key) return a.tie_key < b.tie_key;
                  return a.entity_id < b.entity_id;
              });
    return out;
}

double precision_at_k(const RankedList& ranked, std::size_t k) {
    if (k == 0 || k > ranked.size()) {
        throw DomainError("precision_at_k: k = " + std::to_string(k) +
                          " outside [1, " + std::to_string(ranked.size()) + "]");
    }
    std::size_t positives = 0;
    for (std::size_t i = 0; i < k; ++i) positives += static_cast<std::size_t>(ranked.entries[i].label);
    return static_cast<double>(positives) / static_cast<double>(k);
}

double RecallCurve::at(std::size_t depth) const {
    if (positives == 0) return 1.0;
    if (depth == 0) return 0.0;
    return values[std::min(depth, values.size()) - 1];
}

RecallCurve recall_curve(const RankedList& ranked, const std::string& group) {
    RecallCurve curve;
    curve.group = group;
    std::size_t positives = 0;
    std::vector<int> labels;
    for (const auto& e : ranked.entries) {
        if (e.group != group) continue;
        labels.push_back(e.label);
        positives += static_cast<std::size_t>(e.label);
    }
    if (labels.empty()) {
        throw LookupError("recall_curve: unknown group \"" + group + "\" for model " +
                          ranked.model_id);
    }
    curve.positives = positives;
    curve.values.reserve(labels.size());
    std::size_t found = 0;
    for (int label : labels) {
        found += static_cast<std::size_t>(label);
        curve.values.push_back(positives == 0
                                   ? 1.0
                                   : static_cast<double>(found) / static_cast<double>(positives));
    }
    return curve;
}

std::map<std::string, RecallCurve> group_recall_curves(const RankedList& ranked) {
    std::set<std::string> groups;
    for (const auto& e : ranked.entries) groups.insert(e.group);
    std::map<std::string, RecallCurve> out;
    for (const auto& g : groups) out.emplace(g, recall_curve(ranked, g));
    return out;
}

DisparityResult disparity_ratios(const std::map<std::string, double>& recalls,
                                 const std::string& reference) {
    const auto ref = recalls.find(reference);
    if (ref == recalls.end()) {
        throw LookupError("disparity_ratios: reference group \"" + reference + "\" has no recall");
    }
    if (ref->second <= 0.0) {
        throw ComputationError("disparity_ratios: reference group \"" + reference +
                               "\" has zero recall");
    }
    DisparityResult out;
    for (const auto& [group, recall] : recalls) {
        if (recall == 0.0) {
            out.ratios[group] = std::numeric_limits<double>::infinity();
            out.warnings.push_back("group \"" + group +
                                   "\" has zero recall; disparity reported as inf");
        } else {
            out.ratios[group] = ref->second / recall;
        }
    }
    return out;
}

std::string default_reference_group(const PredictionSet& preds) {
    const auto stats = compute_group_stats(preds);
    std::string best;
    std::size_t best_size = 0;
    for (const auto& [name, g] : stats.by_group) {
        if (g.size > best_size) {
            best = name;
            best_size = g.size;
        }
    }
    return best;
}

EvaluationReport evaluate_selection(const PredictionSet& preds,
                                    const std::set<std::string>& selected,
                                    std::size_t k,
                                    const std::string& reference_group) {
    // Entity-level labels/groups are model-independent; use the first model's rows.
    const std::string& model = *preds.model_ids().begin();
    EvaluationReport report;
    report.k = k;
    report.reference_group = reference_group;

    std::map<std::string, std::size_t> group_positives;
    std::map<std::string, std::size_t> selected_positives;
    std::size_t hits = 0;
    for (const auto& r : preds.records()) {
        if (r.model_id != model) continue;
        group_positives[r.group] += static_cast<std::size_t>(r.label);
        report.selected_count.try_emplace(r.group, 0);
        if (selected.contains(r.entity_id)) {
            report.selected_count[r.group] += 1;
            selected_positives[r.group] += static_cast<std::size_t>(r.label);
            hits += static_cast<std::size_t>(r.label);
        }
    }
    report.precision_at_k = static_cast<double>(hits) / static_cast<double>(k);
    for (const auto& [group, positives] : group_positives) {
        report.recall[group] =
            positives == 0 ? 1.0
                           : static_cast<double>(selected_positives[group]) /
                                 static_cast<double>(positives);
    }
    auto disparity = disparity_ratios(report.recall, reference_group);
    report.disparity = std::move(disparity.ratios);
    report.warnings = std::move(disparity.warnings);
    return report;
}

namespace detail {

nlohmann::json to_json_value(const EvaluationReport& report) {
    nlohmann::json j;
    j["k"] = report.k;
    j["precision_at_k"] = report.precision_at_k;
    j["recall"] = report.recall;
    j["selected_count"] = report.selected_count;
    nlohmann::json disparity = nlohmann::json::object();
    for (const auto& [group, ratio] : report.disparity) {
        // JSON has no infinity; the sentinel becomes the string "inf".
        if (std::isinf(ratio)) {
            disparity[group] = "inf";
        } else {
            disparity[group] = ratio;
        }
    }
    j["disparity"] = std::move(disparity);
    j["reference_group"] = report.reference_group;
    return j;
}

}  // namespace detail

std::string report_to_json(const EvaluationReport& report) {
    return detail::to_json_value(report).dump(2);
}

}  // namespace equitop
