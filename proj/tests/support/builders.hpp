#pragma once

// Shared test fixtures: terse cohort builders and random instance generators.

#include <string>
#include <vector>

#include "equitop/cohort.hpp"
#include "equitop/random.hpp"

namespace equitop::testing {

struct Row {
    std::string group;
    int label = 0;
    double score = 0.0;
    std::string model = "m1";
    std::string entity;  // auto "e1", "e2", ... when empty
};

inline PredictionSet make_set(std::vector<Row> rows,
                              const std::string& attribute = "grp",
                              Date date = Date{2020, 1, 1}) {
    std::vector<PredictionRecord> records;
    records.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        records.push_back({r.entity.empty() ? "e" + std::to_string(i + 1) : r.entity, date,
                           r.model, r.score, r.label, r.group});
    }
    return PredictionSet::from_records(std::move(records), attribute, "test");
}

/// Random single-model cohort: group sizes at least 1, uniform scores (with a
/// coarse tie-prone grid on some instances), Bernoulli labels.
inline PredictionSet random_cohort(Rng& rng,
                                   std::size_t n_groups,
                                   std::size_t n_records,
                                   bool force_positive_per_group = false) {
    static const char* kGroups[] = {"a", "b", "c", "d"};
    const bool coarse_scores = rng.uniform01() < 0.3;
    const double prevalence = 0.2 + 0.6 * rng.uniform01();

    std::vector<Row> rows(n_records);
    for (std::size_t i = 0; i < n_records; ++i) {
        // first n_groups records pin one member per group
        const std::size_t g = i < n_groups ? i : rng.uniform_index(n_groups);
        rows[i].group = kGroups[g];
        rows[i].label = rng.bernoulli(prevalence) ? 1 : 0;
        rows[i].score = coarse_scores
                            ? 0.1 * static_cast<double>(1 + rng.uniform_index(9))
                            : 0.01 + 0.98 * rng.uniform01();
    }
    if (force_positive_per_group) {
        for (std::size_t g = 0; g < n_groups; ++g) rows[g].label = 1;
    }
    return make_set(std::move(rows));
}

}  // namespace equitop::testing
