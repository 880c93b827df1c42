#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "equitop/cohort.hpp"
#include "equitop/date.hpp"

namespace equitop {

struct SplitConfig {
    Date first_as_of_date;     // test as-of of split 0
    int label_window_months = 12;
    int cadence_months = 12;
    std::size_t n_splits = 1;
};

/// One inter-temporal validation split. Thresholds are fit on the validation
/// cohort and applied to the strictly later test cohort; the train date is
/// generated for documentation only (training is outside this toolkit).
struct TemporalSplit {
    std::size_t split_id = 0;
    Date train_as_of;
    Date validation_as_of;
    Date test_as_of;
    int label_window_months = 0;

    bool operator==(const TemporalSplit&) const = default;
};

/// Split i: test = first + i * cadence, validation = test - cadence,
/// train = test - 2 * cadence. Requires cadence >= label_window, which makes
/// every earlier role's label window close before the next role's as-of date
/// (no leakage).
std::vector<TemporalSplit> generate_splits(const SplitConfig& config);

std::string splits_to_json(const std::vector<TemporalSplit>& splits);

struct BoundSplit {
    TemporalSplit split;
    std::shared_ptr<const PredictionSet> val;
    std::shared_ptr<const PredictionSet> test;
};

/// Expects `predictions_<as_of_date>.csv` under data_dir for every validation
/// and test date. Missing files are reported exhaustively in one
/// BindingError, not fail-fast.
std::vector<BoundSplit> bind_cohorts(const std::vector<TemporalSplit>& splits,
                                     const std::filesystem::path& data_dir,
                                     const std::string& attribute_name);

}  // namespace equitop
