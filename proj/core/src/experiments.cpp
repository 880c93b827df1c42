#include "equitop/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"

#include "equitop/errors.hpp"
#include "equitop/random.hpp"
#include "equitop/strings.hpp"
#include "parallel.hpp"

namespace equitop {

namespace {

auto row_key(const ResultRow& r) {
    return std::tie(r.experiment, r.split_id, r.strategy, r.param, r.replicate, r.metric, r.group,
                    r.model);
}

/// Rows for one strategy outcome's test report.
void emit_report_rows(std::vector<ResultRow>& rows,
                      const ResultRow& stub,
                      const EvaluationReport& report) {
    ResultRow row = stub;
    row.metric = "precision_at_k";
    row.group = "";
    row.value = report.precision_at_k;
    rows.push_back(row);
    for (const auto& [group, recall] : report.recall) {
        row.metric = "recall";
        row.group = group;
        row.value = recall;
        rows.push_back(row);
    }
    for (const auto& [group, ratio] : report.disparity) {
        if (group == report.reference_group) continue;
        row.metric = "disparity";
        row.group = group;
        row.value = ratio;
        rows.push_back(row);
    }
    for (const auto& [group, count] : report.selected_count) {
        row.metric = "selected_count";
        row.group = group;
        row.value = static_cast<double>(count);
        rows.push_back(row);
    }
}

/// One strategy on one (val, test) pair; emits rows for the test report.
void run_and_emit(std::vector<ResultRow>& rows,
                  const ResultRow& stub,
                  Strategy strategy,
                  const PredictionSet& val,
                  const PredictionSet& test,
                  const std::vector<std::string>& models,
                  std::size_t k,
                  uint64_t seed,
                  const std::string& reference_group) {
    ResultRow row = stub;
    row.strategy = to_string(strategy);
    const auto outcome = run_strategy(strategy, val, test, models, k, seed, reference_group);
    emit_report_rows(rows, row, outcome.test_report);
}

}  // namespace

void ExperimentResult::canonicalize() {
    std::sort(rows.begin(), rows.end(),
              [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); });
}

std::string ExperimentResult::to_csv() const {
    std::ostringstream out;
    out << "experiment,split_id,strategy,param,replicate,metric,group,model,value,seed\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.split_id << ',' << r.strategy << ','
            << format_double(r.param) << ',' << r.replicate << ',' << r.metric << ',' << r.group
            << ',' << r.model << ',' << format_double(r.value) << ',' << r.seed << "\n";
    }
    return out.str();
}

std::string ExperimentResult::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row = {{"experiment", r.experiment}, {"split_id", r.split_id},
                              {"strategy", r.strategy},     {"param", r.param},
                              {"replicate", r.replicate},   {"metric", r.metric},
                              {"group", r.group},           {"model", r.model},
                              {"seed", r.seed}};
        if (std::isinf(r.value)) {
            row["value"] = "inf";
        } else {
            row["value"] = r.value;
        }
        j.push_back(std::move(row));
    }
    return j.dump(2);
}

void append_aggregates(ExperimentResult& result, bool over_splits) {
    result.canonicalize();
    // key = full tuple with the aggregated dimension blanked
    std::vector<std::pair<ResultRow, std::vector<double>>> groups;
    std::map<std::string, std::size_t> index;
    for (const auto& r : result.rows) {
        if (r.split_id < 0 || r.replicate < 0) continue;  // already an aggregate
        ResultRow key = r;
        if (over_splits) {
            key.split_id = -1;
        } else {
            key.replicate = -1;
        }
        key.value = 0.0;
        std::ostringstream id;
        id << key.experiment << '\x1f' << key.split_id << '\x1f' << key.strategy << '\x1f'
           << format_double(key.param) << '\x1f' << key.replicate << '\x1f' << key.metric << '\x1f'
           << key.group << '\x1f' << key.model;
        const auto [it, inserted] = index.emplace(id.str(), groups.size());
        if (inserted) groups.emplace_back(key, std::vector<double>{});
        groups[it->second].second.push_back(r.value);
    }
    for (auto& [key, values] : groups) {
        const auto n = static_cast<double>(values.size());
        const bool finite = std::all_of(values.begin(), values.end(),
                                        [](double v) { return std::isfinite(v); });
        double mean = std::numeric_limits<double>::infinity();
        double half_width = std::numeric_limits<double>::infinity();
        if (finite) {
            mean = 0.0;
            for (double v : values) mean += v;
            mean /= n;
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            half_width = 1.96 * sd / std::sqrt(n);
        }
        ResultRow row = key;
        row.metric = key.metric + "_mean";
        row.value = mean;
        result.rows.push_back(row);
        row.metric = key.metric + "_ci_low";
        row.value = finite ? mean - half_width : mean;
        result.rows.push_back(row);
        row.metric = key.metric + "_ci_high";
        row.value = finite ? mean + half_width : mean;
        result.rows.push_back(row);
    }
    result.canonicalize();
}

std::vector<Strategy> all_strategies() {
    return {std::begin(kAllStrategies), std::end(kAllStrategies)};
}

ExperimentResult strategy_comparison(const std::vector<BoundSplit>& splits,
                                     const std::vector<std::string>& models,
                                     const std::vector<Strategy>& strategies,
                                     std::size_t k,
                                     const std::string& reference_group,
                                     uint64_t seed) {
    if (splits.empty()) throw InputError("strategy_comparison: no bound splits");
    ExperimentResult result;
    std::vector<std::vector<ResultRow>> per_split(splits.size());
    detail::parallel_tasks(splits.size(), [&](std::size_t i) {
        const auto& s = splits[i];
        const uint64_t split_seed = derive_seed(seed, "split", static_cast<uint64_t>(i));
        ResultRow stub;
        stub.experiment = "strategy_comparison";
        stub.split_id = static_cast<long long>(s.split.split_id);
        stub.param = static_cast<double>(k);
        stub.replicate = 0;
        stub.seed = seed;
        for (Strategy strategy : strategies) {
            try {
                run_and_emit(per_split[i], stub, strategy, *s.val, *s.test, models, k, split_seed,
                             reference_group);
            } catch (const Error& e) {
                throw Error(e.kind(), "split " + std::to_string(s.split.split_id) + " (" +
                                          s.split.test_as_of.to_string() + "), strategy " +
                                          to_string(strategy) + ": " + e.what());
            }
        }
    });
    for (auto& rows : per_split) {
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
    append_aggregates(result, /*over_splits=*/true);
    return result;
}

PrecisionShiftResult precision_shift_distribution(const PredictionSet& val,
                                                  const PredictionSet& test,
                                                  const std::vector<std::string>& models,
                                                  std::size_t k,
                                                  uint64_t seed) {
    if (models.size() < 2) {
        throw InputError("precision_shift_distribution: needs at least 2 models");
    }
    std::vector<std::string> sorted = models;
    std::sort(sorted.begin(), sorted.end());

    PrecisionShiftResult out;
    out.per_model.resize(sorted.size());
    detail::parallel_tasks(sorted.size(), [&](std::size_t i) {
        const auto& m = sorted[i];
        PrecisionShift shift;
        shift.model_id = m;
        shift.unadjusted = precision_at_k(rank(test, m, seed), k);
        const auto alloc = equalize_allocation(val, m, k, seed);
        const auto sel = apply_allocation(test, alloc, seed);
        std::size_t hits = 0;
        const std::string& first_model = *test.model_ids().begin();
        for (const auto& r : test.records()) {
            if (r.model_id == first_model && r.label == 1 && sel.entity_ids.contains(r.entity_id)) {
                ++hits;
            }
        }
        shift.adjusted = static_cast<double>(hits) / static_cast<double>(k);
        shift.delta = shift.adjusted - shift.unadjusted;
        out.per_model[i] = shift;
    });

    double mean = 0.0;
    for (const auto& s : out.per_model) mean += s.delta;
    mean /= static_cast<double>(out.per_model.size());
    double ss = 0.0;
    for (const auto& s : out.per_model) ss += (s.delta - mean) * (s.delta - mean);
    out.mean_delta = mean;
    out.stddev_delta = out.per_model.size() > 1
                           ? std::sqrt(ss / static_cast<double>(out.per_model.size() - 1))
                           : 0.0;

    ResultRow stub;
    stub.experiment = "precision_shift";
    stub.param = static_cast<double>(k);
    stub.seed = seed;
    for (const auto& s : out.per_model) {
        ResultRow row = stub;
        row.model = s.model_id;
        row.metric = "precision_unadjusted";
        row.value = s.unadjusted;
        out.rows.rows.push_back(row);
        row.metric = "precision_adjusted";
        row.value = s.adjusted;
        out.rows.rows.push_back(row);
        row.metric = "delta";
        row.value = s.delta;
        out.rows.rows.push_back(row);
    }
    ResultRow row = stub;
    row.metric = "delta_mean";
    row.value = out.mean_delta;
    out.rows.rows.push_back(row);
    row.metric = "delta_std";
    row.value = out.stddev_delta;
    out.rows.rows.push_back(row);
    out.rows.canonicalize();
    return out;
}

ExperimentResult sweep_list_size(const std::vector<BoundSplit>& splits,
                                 const std::vector<std::string>& models,
                                 const std::vector<Strategy>& strategies,
                                 const std::vector<std::size_t>& k_grid,
                                 const std::string& reference_group,
                                 uint64_t seed) {
    if (splits.empty()) throw InputError("sweep_list_size: no bound splits");
    if (k_grid.empty()) throw ConfigError("sweep_list_size: empty k grid");
    std::size_t min_cohort = std::numeric_limits<std::size_t>::max();
    for (const auto& s : splits) {
        min_cohort = std::min({min_cohort, s.val->entity_count(), s.test->entity_count()});
    }
    for (std::size_t k : k_grid) {
        if (k == 0 || k > min_cohort) {
            throw ConfigError("sweep_list_size: k = " + std::to_string(k) +
                              " outside [1, " + std::to_string(min_cohort) +
                              "] for the bound cohorts");
        }
    }

    ExperimentResult result;
    const std::size_t tasks = k_grid.size() * splits.size();
    std::vector<std::vector<ResultRow>> per_task(tasks);
    detail::parallel_tasks(tasks, [&](std::size_t t) {
        const std::size_t ki = t / splits.size();
        const std::size_t si = t % splits.size();
        const std::size_t k = k_grid[ki];
        const auto& s = splits[si];
        const uint64_t split_seed = derive_seed(seed, "split", static_cast<uint64_t>(si));
        ResultRow stub;
        stub.experiment = "sweep_list_size";
        stub.split_id = static_cast<long long>(s.split.split_id);
        stub.param = static_cast<double>(k);
        stub.replicate = 0;
        stub.seed = seed;
        for (Strategy strategy : strategies) {
            run_and_emit(per_task[t], stub, strategy, *s.val, *s.test, models, k, split_seed,
                         reference_group);
        }
    });
    for (auto& rows : per_task) {
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
    append_aggregates(result, /*over_splits=*/true);
    return result;
}

PredictionSet resample_to_fraction(const PredictionSet& src,
                                   const std::string& focal_group,
                                   double fraction,
                                   Rng& rng) {
    if (!src.groups().contains(focal_group)) {
        throw LookupError("resample: focal group \"" + focal_group + "\" not in cohort");
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("resample: fraction must lie in (0, 1), got " + format_double(fraction));
    }

    // Entity pool per group, with all model rows attached to each entity.
    std::map<std::string, std::vector<std::string>> pool;
    std::unordered_map<std::string, std::vector<const PredictionRecord*>> rows_by_entity;
    const std::string& first_model = *src.model_ids().begin();
    for (const auto& r : src.records()) {
        rows_by_entity[r.entity_id].push_back(&r);
        if (r.model_id == first_model) pool[r.group].push_back(r.entity_id);
    }

    const std::size_t total = src.entity_count();
    const auto n_focal = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
    if (n_focal == 0) {
        throw ConfigError("resample: fraction " + format_double(fraction) +
                          " rounds to zero focal entities");
    }

    // Non-focal groups share the remainder proportionally to their original
    // sizes; largest-remainder rounding keeps the cohort size exact.
    std::map<std::string, std::size_t> target;
    target[focal_group] = n_focal;
    std::size_t others_total = 0;
    for (const auto& [group, ids] : pool) {
        if (group != focal_group) others_total += ids.size();
    }
    const std::size_t remainder = total - n_focal;
    std::vector<std::pair<double, std::string>> fractional;
    std::size_t assigned = 0;
    for (const auto& [group, ids] : pool) {
        if (group == focal_group) continue;
        const double exact = static_cast<double>(remainder) * static_cast<double>(ids.size()) /
                             static_cast<double>(others_total);
        const auto floor_count = static_cast<std::size_t>(exact);
        target[group] = floor_count;
        assigned += floor_count;
        fractional.emplace_back(exact - static_cast<double>(floor_count), group);
    }
    std::sort(fractional.begin(), fractional.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < remainder && i < fractional.size(); ++i, ++assigned) {
        target[fractional[i].second] += 1;
    }

    std::vector<PredictionRecord> records;
    records.reserve(src.records().size());
    std::size_t draw_no = 0;
    for (const auto& [group, count] : target) {
        const auto& ids = pool[group];
        for (std::size_t c = 0; c < count; ++c) {
            const auto& id = ids[rng.uniform_index(ids.size())];
            ++draw_no;
            // fresh ids keep (entity, date, model) unique across repeated draws
            const std::string new_id = id + "~" + std::to_string(draw_no);
            for (const auto* r : rows_by_entity[id]) {
                PredictionRecord copy = *r;
                copy.entity_id = new_id;
                records.push_back(std::move(copy));
            }
        }
    }
    return PredictionSet::from_records(std::move(records), src.attribute_name(), "resample");
}

ExperimentResult resample_group_fraction(const PredictionSet& val,
                                         const PredictionSet& test,
                                         const std::vector<std::string>& models,
                                         const std::vector<Strategy>& strategies,
                                         std::size_t k,
                                         const std::string& focal_group,
                                         const std::vector<double>& fractions,
                                         std::size_t replicates,
                                         const std::string& reference_group,
                                         uint64_t seed) {
    if (replicates < 1) throw ConfigError("resample: replicates must be >= 1");
    if (fractions.empty()) throw ConfigError("resample: no fractions given");
    for (const auto* set : {&val, &test}) {
        if (!set->groups().contains(focal_group)) {
            throw LookupError("resample: focal group \"" + focal_group + "\" not in cohort");
        }
    }

    ExperimentResult result;
    const std::size_t tasks = fractions.size() * replicates;
    std::vector<std::vector<ResultRow>> per_task(tasks);
    detail::parallel_tasks(tasks, [&](std::size_t t) {
        const std::size_t fi = t / replicates;
        const std::size_t b = t % replicates;
        const double p = fractions[fi];
        // One stream per (fraction, replicate) resamples validation first,
        // then test.
        const uint64_t stream =
            derive_seed(derive_seed(seed, "resample", format_double(p)), "replicate",
                        static_cast<uint64_t>(b));
        Rng rng(stream);
        const auto val_rs = resample_to_fraction(val, focal_group, p, rng);
        const auto test_rs = resample_to_fraction(test, focal_group, p, rng);
        ResultRow stub;
        stub.experiment = "resample_group_fraction";
        stub.split_id = 0;
        stub.param = p;
        stub.replicate = static_cast<long long>(b);
        stub.seed = seed;
        for (Strategy strategy : strategies) {
            run_and_emit(per_task[t], stub, strategy, val_rs, test_rs, models, k, stream,
                         reference_group);
        }
    });
    for (auto& rows : per_task) {
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
    append_aggregates(result, /*over_splits=*/false);
    return result;
}

}  // namespace equitop
