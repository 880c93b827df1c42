#include "equitop/selection.hpp"

#include <algorithm>
#include <numeric>

#include "equitop/errors.hpp"
#include "json_util.hpp"

namespace equitop {

namespace {

std::set<std::string> top_k_ids(const RankedList& ranked, std::size_t k) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.insert(ranked.entries[i].entity_id);
    return out;
}

/// argmax by score with ties toward the lexicographically smaller model_id;
/// model_ids must be sorted.
std::string argmax_model(const std::vector<std::string>& model_ids,
                         const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < model_ids.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return model_ids[best];
}

double selection_precision(const PredictionSet& preds,
                           const std::set<std::string>& selected,
                           std::size_t k) {
    const std::string& model = *preds.model_ids().begin();
    std::size_t hits = 0;
    for (const auto& r : preds.records()) {
        if (r.model_id == model && r.label == 1 && selected.contains(r.entity_id)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

/// Composite model election. For each group the candidate models are scored
/// by how early they reach each common recall level: at level r the minimal
/// depth holds exactly ceil(r * positives) positives, so the model with the
/// smallest depth has the highest within-group precision there. The chosen
/// level r* is the largest one whose summed depths still fit in k.
struct CompositeElection {
    std::map<std::string, std::string> group_models;
    std::vector<std::size_t> level_depth_sums;  // per sweep level, for the monotonicity check
};

CompositeElection elect_composite_models(const PredictionSet& val,
                                         const std::vector<std::string>& model_ids,
                                         std::size_t k,
                                         uint64_t seed) {
    // positive_depths[g][m][c-1] = depth of the c-th positive of group g under
    // model m's within-group ranking (1-based depths).
    std::map<std::string, std::vector<std::vector<std::size_t>>> positive_depths;
    std::map<std::string, std::size_t> positives;
    for (std::size_t mi = 0; mi < model_ids.size(); ++mi) {
        const RankedList ranked = rank(val, model_ids[mi], seed);
        std::map<std::string, std::size_t> depth_in_group;
        for (const auto& e : ranked.entries) {
            auto& d = depth_in_group[e.group];
            d += 1;
            auto& per_model = positive_depths[e.group];
            per_model.resize(model_ids.size());
            if (e.label == 1) per_model[mi].push_back(d);
        }
    }
    for (const auto& [group, per_model] : positive_depths) {
        positives[group] = per_model.front().size();
    }

    // Common recall levels: union of every positive-bearing group's step
    // values j / positives_g, as exact fractions.
    auto frac_less = [](const std::pair<long long, long long>& a,
                        const std::pair<long long, long long>& b) {
        return a.first * b.second < b.first * a.second;
    };
    std::set<std::pair<long long, long long>, decltype(frac_less)> levels(frac_less);
    for (const auto& [group, p] : positives) {
        for (std::size_t j = 1; j <= p; ++j) {
            const long long g = std::gcd(static_cast<long long>(j), static_cast<long long>(p));
            levels.insert({static_cast<long long>(j) / g, static_cast<long long>(p) / g});
        }
    }

    CompositeElection election;
    // Fallback when even the smallest level does not fit: lexicographically
    // first model everywhere, zero base depths.
    for (const auto& [group, per_model] : positive_depths) {
        election.group_models[group] = model_ids.front();
    }

    for (const auto& [num, den] : levels) {
        std::size_t depth_sum = 0;
        std::map<std::string, std::string> level_models;
        for (const auto& [group, per_model] : positive_depths) {
            if (positives[group] == 0) {
                level_models[group] = model_ids.front();
                continue;  // zero-positive groups satisfy any level at depth 0
            }
            // c-th positive needed: smallest c with c/positives >= num/den
            const long long p = static_cast<long long>(positives[group]);
            const long long c = (num * p + den - 1) / den;
            std::size_t best_depth = 0;
            std::size_t best_model = 0;
            for (std::size_t mi = 0; mi < model_ids.size(); ++mi) {
                const std::size_t d = per_model[mi][static_cast<std::size_t>(c) - 1];
                if (mi == 0 || d < best_depth) {
                    best_depth = d;
                    best_model = mi;
                }
            }
            depth_sum += best_depth;
            level_models[group] = model_ids[best_model];
        }
        if (!election.level_depth_sums.empty() && depth_sum < election.level_depth_sums.back()) {
            throw Error(ErrorKind::internal,
                        "composite sweep: summed balancing depths decreased between recall levels");
        }
        election.level_depth_sums.push_back(depth_sum);
        if (depth_sum <= k) {
            election.group_models = std::move(level_models);
        } else {
            break;  // sums only grow from here
        }
    }
    return election;
}

}  // namespace

std::string to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::unmitigated: return "unmitigated";
        case Strategy::mitigated_single: return "mitigated_single";
        case Strategy::mitigated_unadjusted: return "mitigated_unadjusted_selection";
        case Strategy::mitigated_composite: return "mitigated_composite";
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
    for (Strategy s : kAllStrategies) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown strategy \"" + name + "\"");
}

std::vector<std::string> common_models(const PredictionSet& val, const PredictionSet& test) {
    std::vector<std::string> out;
    std::set_intersection(val.model_ids().begin(), val.model_ids().end(),
                          test.model_ids().begin(), test.model_ids().end(),
                          std::back_inserter(out));
    if (out.empty()) {
        throw InputError("validation and test cohorts share no model_ids");
    }
    return out;
}

StrategyOutcome run_strategy(Strategy strategy,
                             const PredictionSet& val,
                             const PredictionSet& test,
                             const std::vector<std::string>& model_ids,
                             std::size_t k,
                             uint64_t seed,
                             const std::string& reference_group) {
    if (model_ids.empty()) throw InputError("run_strategy: no candidate models");
    std::vector<std::string> models = model_ids;
    std::sort(models.begin(), models.end());

    StrategyOutcome outcome;
    outcome.strategy = strategy;

    auto finish_single_model = [&](const std::string& winner,
                                   std::optional<EqualizedAllocation> alloc) {
        outcome.single_model = winner;
        for (const auto& g : val.groups()) outcome.chosen_models[g] = winner;
        if (alloc) {
            auto val_sel = apply_allocation(val, *alloc, seed);
            auto test_sel = apply_allocation(test, *alloc, seed);
            outcome.validation_report = evaluate_selection(val, val_sel.entity_ids, k, reference_group);
            outcome.test_report = evaluate_selection(test, test_sel.entity_ids, k, reference_group);
            for (auto& w : test_sel.warnings) outcome.warnings.push_back(std::move(w));
            outcome.allocation = std::move(alloc);
        } else {
            outcome.validation_report =
                evaluate_selection(val, top_k_ids(rank(val, winner, seed), k), k, reference_group);
            outcome.test_report =
                evaluate_selection(test, top_k_ids(rank(test, winner, seed), k), k, reference_group);
        }
    };

    switch (strategy) {
        case Strategy::unmitigated: {
            std::vector<double> precisions;
            for (const auto& m : models) precisions.push_back(precision_at_k(rank(val, m, seed), k));
            finish_single_model(argmax_model(models, precisions), std::nullopt);
            break;
        }
        case Strategy::mitigated_single: {
            std::vector<double> adjusted;
            std::vector<EqualizedAllocation> allocs;
            for (const auto& m : models) {
                allocs.push_back(equalize_allocation(val, m, k, seed));
                const auto sel = apply_allocation(val, allocs.back(), seed);
                adjusted.push_back(selection_precision(val, sel.entity_ids, k));
            }
            const std::string winner = argmax_model(models, adjusted);
            const std::size_t wi =
                static_cast<std::size_t>(std::find(models.begin(), models.end(), winner) -
                                         models.begin());
            finish_single_model(winner, allocs[wi]);
            break;
        }
        case Strategy::mitigated_unadjusted: {
            std::vector<double> precisions;
            for (const auto& m : models) precisions.push_back(precision_at_k(rank(val, m, seed), k));
            const std::string winner = argmax_model(models, precisions);
            finish_single_model(winner, equalize_allocation(val, winner, k, seed));
            break;
        }
        case Strategy::mitigated_composite: {
            if (val.groups().size() == 1) {
                // With one group there is nothing to balance; the composite
                // degenerates to the best model by plain precision@k.
                std::vector<double> precisions;
                for (const auto& m : models) {
                    precisions.push_back(precision_at_k(rank(val, m, seed), k));
                }
                const std::string winner = argmax_model(models, precisions);
                finish_single_model(winner, equalize_allocation(val, winner, k, seed));
                break;
            }
            const auto election = elect_composite_models(val, models, k, seed);
            outcome.chosen_models = election.group_models;
            std::set<std::string> distinct;
            for (const auto& [g, m] : election.group_models) distinct.insert(m);
            if (distinct.size() == 1) outcome.single_model = *distinct.begin();

            const auto merged = merge_order_per_group(val, election.group_models, seed);
            auto alloc =
                allocation_from_merge(merged, election.group_models, k, seed, val.cohort_date());
            auto val_sel = apply_allocation(val, alloc, seed);
            auto test_sel = apply_allocation(test, alloc, seed);
            outcome.validation_report =
                evaluate_selection(val, val_sel.entity_ids, k, reference_group);
            outcome.test_report = evaluate_selection(test, test_sel.entity_ids, k, reference_group);
            for (auto& w : test_sel.warnings) outcome.warnings.push_back(std::move(w));
            outcome.allocation = std::move(alloc);
            break;
        }
    }
    return outcome;
}

std::string outcome_to_json(const StrategyOutcome& outcome) {
    nlohmann::json j;
    j["strategy"] = to_string(outcome.strategy);
    if (outcome.single_model) {
        j["chosen"] = *outcome.single_model;
    } else {
        j["chosen"] = outcome.chosen_models;
    }
    j["allocation"] =
        outcome.allocation ? detail::to_json_value(*outcome.allocation) : nlohmann::json();
    j["validation_report"] = detail::to_json_value(outcome.validation_report);
    j["test_report"] = detail::to_json_value(outcome.test_report);
    return j.dump(2);
}

}  // namespace equitop
