#include "equitop/temporal.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

#include "equitop/errors.hpp"

namespace equitop {

std::vector<TemporalSplit> generate_splits(const SplitConfig& config) {
    if (config.n_splits < 1) {
        throw ConfigError("split config: n_splits must be >= 1");
    }
    if (config.label_window_months <= 0 || config.cadence_months <= 0) {
        throw ConfigError("split config: label window and cadence must be positive");
    }
    if (config.cadence_months < config.label_window_months) {
        throw ConfigError("split config: cadence " + std::to_string(config.cadence_months) +
                          "mo is shorter than the label window " +
                          std::to_string(config.label_window_months) +
                          "mo; earlier cohorts' labels would leak past later as-of dates");
    }
    std::vector<TemporalSplit> splits;
    splits.reserve(config.n_splits);
    for (std::size_t i = 0; i < config.n_splits; ++i) {
        TemporalSplit s;
        s.split_id = i;
        s.test_as_of = config.first_as_of_date.add_months(static_cast<int>(i) * config.cadence_months);
        s.validation_as_of = s.test_as_of.add_months(-config.cadence_months);
        s.train_as_of = s.test_as_of.add_months(-2 * config.cadence_months);
        s.label_window_months = config.label_window_months;
        splits.push_back(s);
    }
    return splits;
}

std::string splits_to_json(const std::vector<TemporalSplit>& splits) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : splits) {
        j.push_back({{"split_id", s.split_id},
                     {"train_as_of", s.train_as_of.to_string()},
                     {"validation_as_of", s.validation_as_of.to_string()},
                     {"test_as_of", s.test_as_of.to_string()},
                     {"label_window_months", s.label_window_months}});
    }
    return j.dump(2);
}

std::vector<BoundSplit> bind_cohorts(const std::vector<TemporalSplit>& splits,
                                     const std::filesystem::path& data_dir,
                                     const std::string& attribute_name) {
    auto path_for = [&](const Date& d) { return data_dir / ("predictions_" + d.to_string() + ".csv"); };

    std::vector<std::string> missing;
    for (const auto& s : splits) {
        for (const Date& d : {s.validation_as_of, s.test_as_of}) {
            if (!std::filesystem::exists(path_for(d))) missing.push_back(d.to_string());
        }
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        std::string msg = "missing cohort files under " + data_dir.string() + " for dates:";
        for (const auto& d : missing) msg += " " + d;
        throw BindingError(msg, missing);
    }

    // Adjacent splits share cohort files (one split's validation date is the
    // previous split's test date); parse each date once.
    std::map<Date, std::shared_ptr<const PredictionSet>> cache;
    auto load = [&](const Date& d) {
        auto it = cache.find(d);
        if (it == cache.end()) {
            it = cache
                     .emplace(d, std::make_shared<const PredictionSet>(
                                     parse_predictions(path_for(d), attribute_name)))
                     .first;
        }
        return it->second;
    };

    std::vector<BoundSplit> bound;
    bound.reserve(splits.size());
    for (const auto& s : splits) {
        bound.push_back({s, load(s.validation_as_of), load(s.test_as_of)});
    }
    return bound;
}

}  // namespace equitop
