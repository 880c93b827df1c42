#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "equitop/cohort.hpp"
#include "equitop/date.hpp"

namespace equitop {

/// Feature rows keyed by entity_id; columns are numeric (booleans as 0/1).
struct FeatureTable {
    std::vector<std::string> entity_ids;
    std::map<std::string, std::vector<double>> columns;

    const std::vector<double>& column(const std::string& name) const;
};

/// Baseline estimator: score = (count of strictly smaller values) / (n - 1),
/// so duplicates share a rank and the output exactly spans [0, 1]. A single
/// row scores 0.5. `descending` inverts the column first, for features where
/// smaller means riskier.
std::vector<double> percentile_rank_one_feature(const FeatureTable& features,
                                                const std::string& column,
                                                bool descending);

enum class Comparator { ge, gt, le, lt, eq, ne };

Comparator comparator_from_string(const std::string& symbol);  // ">=", ">", "<=", "<", "==", "!="

struct ThresholdRule {
    std::string column;
    Comparator comparator = Comparator::ge;
    double constant = 0.0;
};

struct ThresholderResult {
    std::vector<double> scores;  // 0 or 1 per entity
    std::vector<std::string> warnings;
};

/// Baseline estimator: 1 iff every rule holds (AND). The resulting mass of
/// ties is resolved downstream by the seeded ranking hash. An empty rule list
/// scores everyone 1 (vacuous conjunction) and warns.
ThresholderResult simple_thresholder(const FeatureTable& features,
                                     const std::vector<ThresholdRule>& rules);

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;
};

struct GroupSpec {
    double fraction = 0.0;    // share of the cohort
    double prevalence = 0.0;  // P[Y=1 | G=g]
};

/// Synthetic cohort generator. Per entity: group ~ fractions, label ~
/// prevalence, latent score ~ Beta(group, label); the disparity knob shifts
/// the disadvantaged group's positive latents down; each model id adds its
/// own seeded noise to the shared latent. Deterministic given the seed.
struct SynthConfig {
    std::size_t n_entities = 0;
    std::map<std::string, GroupSpec> groups;
    std::map<std::string, std::pair<BetaParams, BetaParams>> score_model;  // (negative, positive)
    std::string disadvantaged_group;
    double disparity_knob = 0.0;
    std::size_t n_models = 1;
    double model_noise = 0.0;
    uint64_t seed = 0;
    std::vector<Date> cohort_dates;
    std::string attribute_name = "group";

    static SynthConfig from_json(const std::string& text);
    void validate() const;  // throws ConfigError
};

/// One cohort's records (n_entities x n_models rows) for the given date.
std::vector<PredictionRecord> generate_synthetic_cohort(const SynthConfig& config, Date as_of);

/// Writes `predictions_<date>.csv` per cohort date under out_dir; returns the
/// paths in date order. Identical config and seed give byte-identical files.
std::vector<std::filesystem::path> generate_synthetic(const SynthConfig& config,
                                                      const std::filesystem::path& out_dir);

}  // namespace equitop
