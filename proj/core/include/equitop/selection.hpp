#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "equitop/cohort.hpp"
#include "equitop/metrics.hpp"
#include "equitop/mitigation.hpp"

namespace equitop {

enum class Strategy {
    unmitigated,
    mitigated_single,
    mitigated_unadjusted,
    mitigated_composite,
};

/// "unmitigated", "mitigated_single", "mitigated_unadjusted_selection",
/// "mitigated_composite".
std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

constexpr Strategy kAllStrategies[] = {
    Strategy::unmitigated,
    Strategy::mitigated_single,
    Strategy::mitigated_unadjusted,
    Strategy::mitigated_composite,
};

struct StrategyOutcome {
    Strategy strategy = Strategy::unmitigated;
    /// Model per group; single-model strategies repeat the winner.
    std::map<std::string, std::string> chosen_models;
    /// Set when one model serves every group.
    std::optional<std::string> single_model;
    /// Absent for the unmitigated strategy (plain top-k, no group constraint).
    std::optional<EqualizedAllocation> allocation;
    EvaluationReport validation_report;
    EvaluationReport test_report;
    std::vector<std::string> warnings;
};

/// Sorted model ids present in both cohorts; InputError when empty.
std::vector<std::string> common_models(const PredictionSet& val, const PredictionSet& test);

/// Runs one Table-S1 selection strategy: picks model(s) on the validation
/// cohort, derives the allocation there, and evaluates on the test cohort.
/// Model-score ties break toward the lexicographically smaller model_id.
StrategyOutcome run_strategy(Strategy strategy,
                             const PredictionSet& val,
                             const PredictionSet& test,
                             const std::vector<std::string>& model_ids,
                             std::size_t k,
                             uint64_t seed,
                             const std::string& reference_group);

std::string outcome_to_json(const StrategyOutcome& outcome);

}  // namespace equitop
