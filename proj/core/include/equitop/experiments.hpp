#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "equitop/cohort.hpp"
#include "equitop/selection.hpp"
#include "equitop/temporal.hpp"

namespace equitop {

/// One tidy result row. split_id = -1 marks an aggregate over splits,
/// replicate = -1 an aggregate over bootstrap replicates; aggregate metrics
/// carry `_mean` / `_ci_low` / `_ci_high` suffixes (95% normal intervals,
/// mean ± 1.96 · sd/√n). `param` holds the experiment's swept quantity
/// (list size k or focal fraction). `model` is filled only by experiments
/// that report per-model values. Values are finite except the +inf
/// disparity sentinel, written as "inf".
struct ResultRow {
    std::string experiment;
    long long split_id = 0;
    std::string strategy;
    double param = 0.0;
    long long replicate = 0;
    std::string metric;
    std::string group;
    std::string model;
    double value = 0.0;
    uint64_t seed = 0;

    bool operator==(const ResultRow&) const = default;
};

std::vector<Strategy> all_strategies();

struct ExperimentResult {
    std::vector<ResultRow> rows;

    /// Sorts rows by the full key tuple so output is independent of task
    /// scheduling.
    void canonicalize();

    std::string to_csv() const;
    std::string to_json() const;
};

/// Appends mean / ci_low / ci_high rows, aggregating `value` over split_id
/// (over_splits = true) or over replicate. Groups containing an infinite
/// value aggregate to the inf sentinel.
void append_aggregates(ExperimentResult& result, bool over_splits);

/// Every strategy on every bound split at one list size: per-split precision,
/// per-group recall and disparity rows plus cross-split aggregates.
ExperimentResult strategy_comparison(const std::vector<BoundSplit>& splits,
                                     const std::vector<std::string>& models,
                                     const std::vector<Strategy>& strategies,
                                     std::size_t k,
                                     const std::string& reference_group,
                                     uint64_t seed);

struct PrecisionShift {
    std::string model_id;
    double unadjusted = 0.0;
    double adjusted = 0.0;
    double delta = 0.0;
};

/// Per-model test precision before and after recall equalization (thresholds
/// fit on the validation cohort), with the mean and standard deviation of
/// the shifts. Requires at least two candidate models.
struct PrecisionShiftResult {
    std::vector<PrecisionShift> per_model;
    double mean_delta = 0.0;
    double stddev_delta = 0.0;
    ExperimentResult rows;
};

PrecisionShiftResult precision_shift_distribution(const PredictionSet& val,
                                                  const PredictionSet& test,
                                                  const std::vector<std::string>& models,
                                                  std::size_t k,
                                                  uint64_t seed);

/// strategy_comparison at every k in the grid. Each k must satisfy
/// 1 <= k <= the smallest bound cohort size; offenders raise ConfigError
/// naming the value.
ExperimentResult sweep_list_size(const std::vector<BoundSplit>& splits,
                                 const std::vector<std::string>& models,
                                 const std::vector<Strategy>& strategies,
                                 const std::vector<std::size_t>& k_grid,
                                 const std::string& reference_group,
                                 uint64_t seed);

class Rng;

/// Bootstrap resample of one cohort to a target focal-group fraction:
/// round(fraction * N) entities with replacement from the focal group, the
/// remainder proportionally from the other groups; N is preserved. Draws
/// consume the given stream, so one stream can resample a validation and a
/// test cohort jointly.
PredictionSet resample_to_fraction(const PredictionSet& src,
                                   const std::string& focal_group,
                                   double fraction,
                                   Rng& rng);

/// For each (fraction, replicate): resample validation and test cohorts with
/// the replicate's stream, run every strategy, and emit precision / recall /
/// disparity rows plus per-fraction aggregates over replicates.
ExperimentResult resample_group_fraction(const PredictionSet& val,
                                         const PredictionSet& test,
                                         const std::vector<std::string>& models,
                                         const std::vector<Strategy>& strategies,
                                         std::size_t k,
                                         const std::string& focal_group,
                                         const std::vector<double>& fractions,
                                         std::size_t replicates,
                                         const std::string& reference_group,
                                         uint64_t seed);

}  // namespace equitop
