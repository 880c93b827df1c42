#include "equitop/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "equitop/errors.hpp"
#include "equitop/random.hpp"
#include "equitop/strings.hpp"
#include "json_util.hpp"

namespace equitop {

namespace {

bool merge_before(const MergeEntry& a, const MergeEntry& b) {
    if (a.recall_value != b.recall_value) return a.recall_value < b.recall_value;
    if (a.rank_in_group != b.rank_in_group) return a.rank_in_group < b.rank_in_group;
    if (a.tie_key != b.tie_key) return a.tie_key < b.tie_key;
    return a.entity_id < b.entity_id;
}

/// Annotates one group's ranked slice with recall values and appends to out.
void annotate_group(const std::vector<const RankedEntry*>& slice,
                    const std::string& group,
                    std::vector<MergeEntry>& out) {
    std::size_t positives = 0;
    for (const auto* e : slice) positives += static_cast<std::size_t>(e->label);
    std::size_t found = 0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
        found += static_cast<std::size_t>(slice[i]->label);
        const double r = positives == 0
                             ? 1.0
                             : static_cast<double>(found) / static_cast<double>(positives);
        out.push_back({slice[i]->entity_id, group, slice[i]->score, slice[i]->label, i + 1, r,
                       slice[i]->tie_key});
    }
}

}  // namespace

std::vector<MergeEntry> merge_order(const PredictionSet& preds,
                                    const std::string& model_id,
                                    uint64_t seed) {
    const RankedList ranked = rank(preds, model_id, seed);
    std::map<std::string, std::vector<const RankedEntry*>> by_group;
    for (const auto& e : ranked.entries) by_group[e.group].push_back(&e);

    std::vector<MergeEntry> merged;
    merged.reserve(ranked.size());
    for (const auto& [group, slice] : by_group) annotate_group(slice, group, merged);
    std::sort(merged.begin(), merged.end(), merge_before);
    return merged;
}

std::vector<MergeEntry> merge_order_per_group(const PredictionSet& preds,
                                              const std::map<std::string, std::string>& group_models,
                                              uint64_t seed) {
    std::vector<MergeEntry> merged;
    std::map<std::string, RankedList> ranked_cache;
    for (const auto& [group, model_id] : group_models) {
        auto it = ranked_cache.find(model_id);
        if (it == ranked_cache.end()) {
            it = ranked_cache.emplace(model_id, rank(preds, model_id, seed)).first;
        }
        std::vector<const RankedEntry*> slice;
        for (const auto& e : it->second.entries) {
            if (e.group == group) slice.push_back(&e);
        }
        if (slice.empty()) {
            throw LookupError("merge_order_per_group: group \"" + group + "\" not present");
        }
        annotate_group(slice, group, merged);
    }
    std::sort(merged.begin(), merged.end(), merge_before);
    return merged;
}

EqualizedAllocation allocation_from_merge(const std::vector<MergeEntry>& merged,
                                          const std::map<std::string, std::string>& group_models,
                                          std::size_t k,
                                          uint64_t seed,
                                          Date source_cohort_date) {
    if (k == 0 || k > merged.size()) {
        throw DomainError("equalize_allocation: k = " + std::to_string(k) + " outside [1, " +
                          std::to_string(merged.size()) + "]");
    }
    EqualizedAllocation alloc;
    alloc.k_total = k;
    alloc.seed = seed;
    alloc.source_cohort_date = source_cohort_date;
    for (const auto& [group, model_id] : group_models) {
        alloc.groups[group] = GroupAllocation{0, 1.0, model_id};
    }
    for (std::size_t i = 0; i < k; ++i) {
        auto& g = alloc.groups[merged[i].group];
        g.k += 1;
        // Entries within a group arrive in rank order along the merge, so the
        // last one seen for the group is its k_g-th ranked member.
        g.threshold = merged[i].score;
    }
    return alloc;
}

EqualizedAllocation equalize_allocation(const PredictionSet& val,
                                        const std::string& model_id,
                                        std::size_t k,
                                        uint64_t seed) {
    const auto merged = merge_order(val, model_id, seed);
    std::map<std::string, std::string> group_models;
    for (const auto& e : merged) group_models.emplace(e.group, model_id);
    return allocation_from_merge(merged, group_models, k, seed, val.cohort_date());
}

SelectionResult apply_allocation(const PredictionSet& test,
                                 const EqualizedAllocation& alloc,
                                 uint64_t seed) {
    SelectionResult result;
    std::vector<std::pair<std::string, std::size_t>> deficits;

    std::map<std::string, RankedList> ranked_cache;
    auto ranked_for = [&](const std::string& model_id) -> const RankedList& {
        auto it = ranked_cache.find(model_id);
        if (it == ranked_cache.end()) {
            it = ranked_cache.emplace(model_id, rank(test, model_id, seed)).first;
        }
        return it->second;
    };

    for (const auto& [group, ga] : alloc.groups) {
        if (ga.k == 0) continue;
        const RankedList& ranked = ranked_for(ga.model_id);
        std::size_t taken = 0;
        for (const auto& e : ranked.entries) {
            if (e.group != group) continue;
            result.entity_ids.insert(e.entity_id);
            if (++taken == ga.k) break;
        }
        if (taken < ga.k) deficits.emplace_back(group, ga.k - taken);
    }
    if (!deficits.empty()) {
        std::string msg = "apply_allocation: test cohort short of allocated slots:";
        for (const auto& [group, deficit] : deficits) {
            msg += " " + group + " deficit " + std::to_string(deficit) + ";";
        }
        throw ShortfallError(msg, deficits);
    }
    for (const auto& group : test.groups()) {
        if (!alloc.groups.contains(group)) {
            result.warnings.push_back("group \"" + group +
                                      "\" present in test cohort but absent from allocation; "
                                      "assigned 0 slots");
        }
    }
    return result;
}

namespace detail {

nlohmann::json to_json_value(const EqualizedAllocation& alloc) {
    nlohmann::json j;
    j["k_total"] = alloc.k_total;
    j["seed"] = alloc.seed;
    j["source_cohort_date"] = alloc.source_cohort_date.to_string();
    nlohmann::json groups_json = nlohmann::json::object();
    for (const auto& [group, ga] : alloc.groups) {
        groups_json[group] = {{"k", ga.k}, {"threshold", ga.threshold}, {"model_id", ga.model_id}};
    }
    j["groups"] = std::move(groups_json);
    return j;
}

}  // namespace detail

std::string EqualizedAllocation::to_json() const {
    return detail::to_json_value(*this).dump(2);
}

EqualizedAllocation EqualizedAllocation::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("allocation JSON: ") + e.what());
    }
    try {
        EqualizedAllocation alloc;
        alloc.k_total = j.at("k_total").get<std::size_t>();
        alloc.seed = j.at("seed").get<uint64_t>();
        const auto date = Date::parse(j.at("source_cohort_date").get<std::string>());
        if (!date) throw InputError("allocation JSON: bad source_cohort_date");
        alloc.source_cohort_date = *date;
        std::size_t sum = 0;
        for (const auto& [group, g] : j.at("groups").items()) {
            GroupAllocation ga;
            ga.k = g.at("k").get<std::size_t>();
            ga.threshold = g.at("threshold").get<double>();
            ga.model_id = g.at("model_id").get<std::string>();
            sum += ga.k;
            alloc.groups.emplace(group, std::move(ga));
        }
        if (sum != alloc.k_total) {
            throw InputError("allocation JSON: group counts sum to " + std::to_string(sum) +
                             ", expected k_total = " + std::to_string(alloc.k_total));
        }
        return alloc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("allocation JSON: ") + e.what());
    }
}

ScaledScoreParams lambda_from_thresholds(const GroupStats& stats,
                                         const std::map<std::string, double>& thresholds) {
    ScaledScoreParams params;
    for (const auto& [group, t] : thresholds) {
        if (!(t > 0.0) || t > 1.0) {
            throw DomainError("lambda_from_thresholds: threshold for \"" + group +
                              "\" must lie in (0, 1], got " + format_double(t));
        }
        const auto it = stats.by_group.find(group);
        if (it == stats.by_group.end() || it->second.pi <= 0.0) {
            throw DomainError("lambda_from_thresholds: group \"" + group +
                              "\" has zero P[G=g, Y=1]; lambda undefined");
        }
        const double pi = it->second.pi;
        double multiplier = 0.5 / t;
        // One-ulp nudge so the record defining the threshold satisfies
        // multiplier * t - 0.5 >= 0 despite the rounded division.
        if (multiplier * t < 0.5) {
            multiplier = std::nextafter(multiplier, std::numeric_limits<double>::infinity());
        }
        params.by_group[group] = {pi * (multiplier - 1.0), pi, multiplier};
    }
    return params;
}

std::vector<double> scaled_scores(const PredictionSet& preds, const ScaledScoreParams& params) {
    std::vector<double> out;
    out.reserve(preds.records().size());
    for (const auto& r : preds.records()) {
        const auto it = params.by_group.find(r.group);
        if (it == params.by_group.end()) {
            throw LookupError("scaled_scores: no params for group \"" + r.group + "\"");
        }
        out.push_back(it->second.multiplier * r.score - 0.5);
    }
    return out;
}

std::set<std::string> select_by_group_thresholds(const PredictionSet& preds,
                                                 const std::string& model_id,
                                                 const std::map<std::string, double>& thresholds) {
    std::set<std::string> out;
    for (const auto* r : preds.for_model(model_id)) {
        const auto it = thresholds.find(r->group);
        if (it != thresholds.end() && r->score >= it->second) out.insert(r->entity_id);
    }
    return out;
}

std::set<std::string> select_by_scaled_scores(const PredictionSet& preds,
                                              const std::string& model_id,
                                              const ScaledScoreParams& params) {
    std::set<std::string> out;
    for (const auto* r : preds.for_model(model_id)) {
        const auto it = params.by_group.find(r->group);
        if (it == params.by_group.end()) continue;
        if (it->second.multiplier * r->score - 0.5 >= 0.0) out.insert(r->entity_id);
    }
    return out;
}

}  // namespace equitop
