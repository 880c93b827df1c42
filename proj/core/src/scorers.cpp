#include "equitop/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "equitop/errors.hpp"
#include "equitop/random.hpp"
#include "equitop/strings.hpp"

namespace equitop {

const std::vector<double>& FeatureTable::column(const std::string& name) const {
    const auto it = columns.find(name);
    if (it == columns.end()) {
        throw LookupError("feature table has no column \"" + name + "\"");
    }
    if (it->second.size() != entity_ids.size()) {
        throw DomainError("feature column \"" + name + "\" length does not match entity count");
    }
    return it->second;
}

std::vector<double> percentile_rank_one_feature(const FeatureTable& features,
                                                const std::string& column,
                                                bool descending) {
    const auto& raw = features.column(column);
    const std::size_t n = raw.size();
    if (n == 0) return {};
    if (n == 1) return {0.5};

    std::vector<double> values = raw;
    if (descending) {
        for (auto& v : values) v = -v;
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto smaller = std::lower_bound(sorted.begin(), sorted.end(), values[i]) -
                             sorted.begin();
        scores[i] = static_cast<double>(smaller) / static_cast<double>(n - 1);
    }
    return scores;
}

Comparator comparator_from_string(const std::string& symbol) {
    if (symbol == ">=") return Comparator::ge;
    if (symbol == ">") return Comparator::gt;
    if (symbol == "<=") return Comparator::le;
    if (symbol == "<") return Comparator::lt;
    if (symbol == "==") return Comparator::eq;
    if (symbol == "!=") return Comparator::ne;
    throw ConfigError("unknown comparator \"" + symbol + "\"");
}

namespace {

bool rule_holds(double value, Comparator cmp, double constant) {
    switch (cmp) {
        case Comparator::ge: return value >= constant;
        case Comparator::gt: return value > constant;
        case Comparator::le: return value <= constant;
        case Comparator::lt: return value < constant;
        case Comparator::eq: return value == constant;
        case Comparator::ne: return value != constant;
    }
    return false;
}

}  // namespace

ThresholderResult simple_thresholder(const FeatureTable& features,
                                     const std::vector<ThresholdRule>& rules) {
    ThresholderResult result;
    if (rules.empty()) {
        result.warnings.push_back("simple_thresholder: empty rule list; scoring every entity 1");
    }
    std::vector<const std::vector<double>*> cols;
    cols.reserve(rules.size());
    for (const auto& rule : rules) cols.push_back(&features.column(rule.column));

    result.scores.assign(features.entity_ids.size(), 1.0);
    for (std::size_t i = 0; i < features.entity_ids.size(); ++i) {
        for (std::size_t r = 0; r < rules.size(); ++r) {
            if (!rule_holds((*cols[r])[i], rules[r].comparator, rules[r].constant)) {
                result.scores[i] = 0.0;
                break;
            }
        }
    }
    return result;
}

void SynthConfig::validate() const {
    if (n_entities == 0) throw ConfigError("synth config: n_entities must be positive");
    if (n_models == 0) throw ConfigError("synth config: n_models must be positive");
    if (groups.empty()) throw ConfigError("synth config: at least one group required");
    double fraction_sum = 0.0;
    for (const auto& [name, spec] : groups) {
        if (spec.fraction <= 0.0) {
            throw ConfigError("synth config: group \"" + name + "\" fraction must be positive");
        }
        if (spec.prevalence < 0.0 || spec.prevalence > 1.0) {
            throw ConfigError("synth config: group \"" + name + "\" prevalence outside [0,1]");
        }
        fraction_sum += spec.fraction;
        const auto it = score_model.find(name);
        if (it == score_model.end()) {
            throw ConfigError("synth config: group \"" + name + "\" has no score_model entry");
        }
        for (const BetaParams& bp : {it->second.first, it->second.second}) {
            if (bp.alpha <= 0.0 || bp.beta <= 0.0) {
                throw ConfigError("synth config: Beta parameters must be positive for group \"" +
                                  name + "\"");
            }
        }
    }
    if (std::abs(fraction_sum - 1.0) > 1e-9) {
        throw ConfigError("synth config: group fractions sum to " + format_double(fraction_sum) +
                          ", expected 1");
    }
    if (disparity_knob < 0.0) throw ConfigError("synth config: disparity_knob must be >= 0");
    if (disparity_knob > 0.0 && !groups.contains(disadvantaged_group)) {
        throw ConfigError("synth config: disadvantaged_group \"" + disadvantaged_group +
                          "\" is not a configured group");
    }
    if (model_noise < 0.0) throw ConfigError("synth config: model_noise must be >= 0");
}

SynthConfig SynthConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("synth config JSON: ") + e.what());
    }
    try {
        SynthConfig config;
        config.n_entities = j.at("n_entities").get<std::size_t>();
        for (const auto& [name, g] : j.at("groups").items()) {
            config.groups[name] = {g.at("fraction").get<double>(), g.at("prevalence").get<double>()};
        }
        for (const auto& [name, sm] : j.at("score_model").items()) {
            BetaParams neg{sm.at("negative").at("alpha").get<double>(),
                           sm.at("negative").at("beta").get<double>()};
            BetaParams pos{sm.at("positive").at("alpha").get<double>(),
                           sm.at("positive").at("beta").get<double>()};
            config.score_model[name] = {neg, pos};
        }
        config.disadvantaged_group = j.value("disadvantaged_group", std::string());
        config.disparity_knob = j.value("disparity_knob", 0.0);
        config.n_models = j.value("n_models", std::size_t{1});
        config.model_noise = j.value("model_noise", 0.0);
        config.seed = j.at("seed").get<uint64_t>();
        config.attribute_name = j.value("attribute", std::string("group"));
        if (j.contains("cohort_dates")) {
            for (const auto& d : j.at("cohort_dates")) {
                const auto date = Date::parse(d.get<std::string>());
                if (!date) throw ConfigError("synth config: bad cohort date \"" +
                                             d.get<std::string>() + "\"");
                config.cohort_dates.push_back(*date);
            }
        } else {
            const auto& c = j.at("cohorts");
            const auto first = Date::parse(c.at("first_date").get<std::string>());
            if (!first) throw ConfigError("synth config: bad cohorts.first_date");
            const auto n = c.at("n_cohorts").get<std::size_t>();
            const auto cadence = c.at("cadence_months").get<int>();
            for (std::size_t i = 0; i < n; ++i) {
                config.cohort_dates.push_back(first->add_months(static_cast<int>(i) * cadence));
            }
        }
        config.validate();
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth config JSON: ") + e.what());
    }
}

std::vector<PredictionRecord> generate_synthetic_cohort(const SynthConfig& config, Date as_of) {
    config.validate();
    const std::string date_str = as_of.to_string();

    // Population draw (groups, labels, shared latent scores) is one stream;
    // each model's perturbation is its own derived stream, so adding a model
    // to the grid never disturbs the others.
    Rng population(derive_seed(config.seed, "cohort", date_str));

    std::vector<std::string> group_names;
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& [name, spec] : config.groups) {
        group_names.push_back(name);
        acc += spec.fraction;
        cumulative.push_back(acc);
    }

    const std::size_t n = config.n_entities;
    std::vector<std::size_t> group_index(n);
    std::vector<int> labels(n);
    std::vector<double> latents(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = population.uniform01();
        std::size_t gi = 0;
        while (gi + 1 < cumulative.size() && u >= cumulative[gi]) ++gi;
        group_index[i] = gi;
        const auto& name = group_names[gi];
        const auto& spec = config.groups.at(name);
        labels[i] = population.bernoulli(spec.prevalence) ? 1 : 0;
        const auto& [neg, pos] = config.score_model.at(name);
        const BetaParams& bp = labels[i] == 1 ? pos : neg;
        double latent = population.beta(bp.alpha, bp.beta);
        if (labels[i] == 1 && name == config.disadvantaged_group) {
            latent = std::max(0.0, latent - config.disparity_knob);
        }
        latents[i] = latent;
    }

    std::vector<PredictionRecord> records;
    records.reserve(n * config.n_models);
    char entity_buf[32];
    char model_buf[16];
    for (std::size_t m = 0; m < config.n_models; ++m) {
        std::snprintf(model_buf, sizeof model_buf, "m%02zu", m + 1);
        Rng noise(derive_seed(config.seed, "cohort", date_str) ^
                  derive_seed(config.seed, "model", model_buf));
        for (std::size_t i = 0; i < n; ++i) {
            double score = latents[i];
            if (config.model_noise > 0.0) {
                score = std::clamp(score + config.model_noise * noise.normal(), 0.0, 1.0);
            }
            std::snprintf(entity_buf, sizeof entity_buf, "e%06zu", i + 1);
            records.push_back({entity_buf, as_of, model_buf, score, labels[i],
                               group_names[group_index[i]]});
        }
    }
    return records;
}

std::vector<std::filesystem::path> generate_synthetic(const SynthConfig& config,
                                                      const std::filesystem::path& out_dir) {
    config.validate();
    if (config.cohort_dates.empty()) throw ConfigError("synth config: no cohort dates");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> paths;
    for (const Date& date : config.cohort_dates) {
        auto records = generate_synthetic_cohort(config, date);
        const auto set =
            PredictionSet::from_records(std::move(records), config.attribute_name, "synthetic");
        const auto path = out_dir / ("predictions_" + date.to_string() + ".csv");
        write_predictions(set, path);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace equitop
