// equitop command-line tool: synthetic cohort generation, recall-equalizing
// allocation, evaluation, model selection strategies, and the experiment
// harnesses (temporal strategy comparison, list-size sweep, group-fraction
// resampling).
//
// Exit codes: 0 success, 2 input/config error, 3 domain error, 1 internal.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "equitop/cohort.hpp"
#include "equitop/errors.hpp"
#include "equitop/experiments.hpp"
#include "equitop/metrics.hpp"
#include "equitop/mitigation.hpp"
#include "equitop/random.hpp"
#include "equitop/scorers.hpp"
#include "equitop/selection.hpp"
#include "equitop/strings.hpp"
#include "equitop/temporal.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace equitop;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + path.string());
    out << content;
    if (!out) throw InputError("failed writing " + path.string());
}

std::string utc_stamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
    return buf;
}

Date parse_date_arg(const std::string& text, const std::string& flag) {
    const auto d = Date::parse(text);
    if (!d) throw ConfigError(flag + ": expected ISO date YYYY-MM-DD, got \"" + text + "\"");
    return *d;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------
// run/sweep/resample configuration (JSON file; flags override scalars)

struct RunSettings {
    std::filesystem::path data_dir;
    std::string attribute;
    std::string reference_group;  // empty → largest group of the first validation cohort
    std::size_t k = 0;
    uint64_t seed = 0;
    bool seed_set = false;
    std::vector<Strategy> strategies = all_strategies();
    std::vector<std::string> models;  // empty → all models common to each pair
    SplitConfig splits;
    std::vector<std::size_t> k_grid;
    std::string focal_group;
    std::vector<double> fractions;
    std::size_t replicates = 0;

    std::string config_text;  // raw bytes, hashed into the manifest
};

RunSettings load_run_settings(const std::filesystem::path& config_path) {
    RunSettings rs;
    rs.config_text = read_file(config_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(rs.config_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(config_path.string() + ": " + e.what());
    }
    try {
        rs.data_dir = j.at("data_dir").get<std::string>();
        rs.attribute = j.at("attribute").get<std::string>();
        rs.reference_group = j.value("reference_group", std::string());
        rs.k = j.at("k").get<std::size_t>();
        if (j.contains("seed")) {
            rs.seed = j.at("seed").get<uint64_t>();
            rs.seed_set = true;
        }
        if (j.contains("strategies")) {
            rs.strategies.clear();
            for (const auto& s : j.at("strategies")) {
                rs.strategies.push_back(strategy_from_string(s.get<std::string>()));
            }
        }
        if (j.contains("models")) {
            for (const auto& m : j.at("models")) rs.models.push_back(m.get<std::string>());
        }
        const auto& sp = j.at("splits");
        rs.splits.first_as_of_date =
            parse_date_arg(sp.at("first_as_of_date").get<std::string>(), "splits.first_as_of_date");
        rs.splits.label_window_months = sp.at("label_window_months").get<int>();
        rs.splits.cadence_months = sp.at("cadence_months").get<int>();
        rs.splits.n_splits = sp.at("n_splits").get<std::size_t>();
        if (j.contains("k_grid")) {
            for (const auto& k : j.at("k_grid")) rs.k_grid.push_back(k.get<std::size_t>());
        }
        if (j.contains("resample")) {
            const auto& r = j.at("resample");
            rs.focal_group = r.at("focal_group").get<std::string>();
            for (const auto& f : r.at("fractions")) rs.fractions.push_back(f.get<double>());
            rs.replicates = r.at("replicates").get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config_path.string() + ": " + e.what());
    }
    return rs;
}

std::vector<std::string> models_for(const RunSettings& rs, const BoundSplit& split) {
    if (!rs.models.empty()) return rs.models;
    return common_models(*split.val, *split.test);
}

std::string reference_for(const RunSettings& rs, const BoundSplit& split) {
    if (!rs.reference_group.empty()) return rs.reference_group;
    return default_reference_group(*split.val);
}

void write_manifest(const std::filesystem::path& out_dir,
                    const std::string& command,
                    const RunSettings& rs,
                    const std::vector<std::filesystem::path>& outputs) {
    nlohmann::json j;
    j["tool"] = "equitop";
    j["version"] = kVersion;
    j["command"] = command;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(rs.config_text)));
    j["config_hash"] = hash;
    j["seed"] = rs.seed;
    j["k"] = rs.k;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& p : outputs) files.push_back(p.string());
    j["outputs"] = std::move(files);
    write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

// Per-figure CSVs (--plot-data): aggregate rows reshaped to one line per
// (strategy, metric, group) with mean and interval columns.
std::string plot_frame(const ExperimentResult& result, const std::string& param_name) {
    struct Key {
        double param;
        std::string strategy, metric, group;
        bool operator<(const Key& o) const {
            return std::tie(param, strategy, metric, group) <
                   std::tie(o.param, o.strategy, o.metric, o.group);
        }
    };
    struct Agg {
        double mean = 0, lo = 0, hi = 0;
    };
    std::map<Key, Agg> frame;
    auto strip = [](const std::string& metric, const std::string& suffix) -> std::string {
        if (metric.size() > suffix.size() &&
            metric.compare(metric.size() - suffix.size(), suffix.size(), suffix) == 0) {
            return metric.substr(0, metric.size() - suffix.size());
        }
        return "";
    };
    for (const auto& r : result.rows) {
        if (r.split_id >= 0 && r.replicate >= 0) continue;
        if (auto base = strip(r.metric, "_mean"); !base.empty()) {
            frame[{r.param, r.strategy, base, r.group}].mean = r.value;
        } else if (auto lo = strip(r.metric, "_ci_low"); !lo.empty()) {
            frame[{r.param, r.strategy, lo, r.group}].lo = r.value;
        } else if (auto hi = strip(r.metric, "_ci_high"); !hi.empty()) {
            frame[{r.param, r.strategy, hi, r.group}].hi = r.value;
        }
    }
    std::ostringstream out;
    out << param_name << ",strategy,metric,group,mean,ci_low,ci_high\n";
    for (const auto& [key, agg] : frame) {
        out << format_double(key.param) << ',' << key.strategy << ',' << key.metric << ','
            << key.group << ',' << format_double(agg.mean) << ',' << format_double(agg.lo) << ','
            << format_double(agg.hi) << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// subcommand bodies

int cmd_synth(const std::filesystem::path& config_path, const std::filesystem::path& out_dir) {
    const auto config = SynthConfig::from_json(read_file(config_path));
    const auto paths = generate_synthetic(config, out_dir);
    for (const auto& p : paths) std::cout << p.string() << "\n";
    return 0;
}

int cmd_mitigate(const std::filesystem::path& val_csv,
                 const std::string& attribute,
                 const std::string& model_id,
                 std::size_t k,
                 uint64_t seed,
                 const std::filesystem::path& out_json) {
    const auto val = parse_predictions(val_csv, attribute);
    const auto alloc = equalize_allocation(val, model_id, k, seed);
    write_file(out_json, alloc.to_json() + "\n");
    std::cout << "allocation for k=" << alloc.k_total << " (validation "
              << alloc.source_cohort_date.to_string() << "):\n";
    for (const auto& [group, ga] : alloc.groups) {
        std::cout << "  " << group << ": k=" << ga.k << " threshold=" << format_double(ga.threshold)
                  << "\n";
    }
    std::cout << "wrote " << out_json.string() << "\n";
    return 0;
}

int cmd_evaluate(const std::filesystem::path& test_csv,
                 const std::filesystem::path& alloc_json,
                 const std::string& attribute,
                 std::string reference,
                 std::optional<uint64_t> seed,
                 const std::filesystem::path& out_json) {
    const auto test = parse_predictions(test_csv, attribute);
    const auto alloc = EqualizedAllocation::from_json(read_file(alloc_json));
    const auto selection = apply_allocation(test, alloc, seed.value_or(alloc.seed));
    print_warnings(selection.warnings);
    if (reference.empty()) reference = default_reference_group(test);
    const auto report = evaluate_selection(test, selection.entity_ids, alloc.k_total, reference);
    print_warnings(report.warnings);
    write_file(out_json, report_to_json(report) + "\n");
    std::cout << "precision@" << report.k << " = " << format_double(report.precision_at_k) << "\n";
    for (const auto& [group, ratio] : report.disparity) {
        if (group == report.reference_group) continue;
        std::cout << "disparity " << report.reference_group << "/" << group << " = "
                  << format_double(ratio) << "\n";
    }
    std::cout << "wrote " << out_json.string() << "\n";
    return 0;
}

int cmd_select(const std::filesystem::path& val_csv,
               const std::filesystem::path& test_csv,
               const std::string& attribute,
               const std::string& strategy_name,
               std::vector<std::string> models,
               std::string reference,
               std::size_t k,
               uint64_t seed,
               const std::filesystem::path& out_path) {
    const auto val = parse_predictions(val_csv, attribute);
    const auto test = parse_predictions(test_csv, attribute);
    if (models.empty()) models = common_models(val, test);
    if (reference.empty()) reference = default_reference_group(val);

    std::vector<Strategy> strategies;
    if (strategy_name == "all") {
        strategies = all_strategies();
    } else {
        strategies.push_back(strategy_from_string(strategy_name));
    }
    for (Strategy strategy : strategies) {
        const auto outcome = run_strategy(strategy, val, test, models, k, seed, reference);
        print_warnings(outcome.warnings);
        const auto path = strategies.size() == 1
                              ? out_path
                              : out_path / ("outcome_" + to_string(strategy) + ".json");
        write_file(path, outcome_to_json(outcome) + "\n");
        std::cout << to_string(strategy) << ": test precision@" << k << " = "
                  << format_double(outcome.test_report.precision_at_k) << " -> " << path.string()
                  << "\n";
    }
    return 0;
}

int cmd_splits(const Date& first,
               int label_window,
               int cadence,
               std::size_t n_splits,
               const std::filesystem::path& data_dir,
               const std::string& attribute,
               const std::filesystem::path& out_json) {
    const auto splits =
        generate_splits({first, label_window, cadence, n_splits});
    if (!data_dir.empty()) {
        const auto bound = bind_cohorts(splits, data_dir, attribute);
        std::cout << "bound " << bound.size() << " split(s) from " << data_dir.string() << "\n";
    }
    const auto json = splits_to_json(splits) + "\n";
    if (!out_json.empty()) {
        write_file(out_json, json);
        std::cout << "wrote " << out_json.string() << "\n";
    } else {
        std::cout << json;
    }
    return 0;
}

int run_experiment_command(const std::string& command,
                           const std::filesystem::path& config_path,
                           const std::filesystem::path& out_dir,
                           std::optional<std::size_t> k_flag,
                           std::optional<uint64_t> seed_flag,
                           bool plot_data,
                           std::string stamp) {
    RunSettings rs = load_run_settings(config_path);
    if (k_flag) rs.k = *k_flag;
    if (seed_flag) {
        rs.seed = *seed_flag;
        rs.seed_set = true;
    }
    if (!rs.seed_set) {
        throw ConfigError("no seed: set \"seed\" in the config or pass --seed "
                          "(runs never default to wall-clock seeds)");
    }
    if (stamp.empty()) stamp = utc_stamp();

    const auto splits = generate_splits(rs.splits);
    const auto bound = bind_cohorts(splits, rs.data_dir, rs.attribute);
    const auto models = models_for(rs, bound.front());
    const auto reference = reference_for(rs, bound.front());

    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> outputs;
    auto emit = [&](const std::string& name, const std::string& content) {
        const auto path = out_dir / name;
        write_file(path, content);
        outputs.push_back(path);
        std::cout << "wrote " << path.string() << "\n";
    };

    if (command == "run") {
        auto result = strategy_comparison(bound, models, rs.strategies, rs.k, reference, rs.seed);
        emit("results_strategy_comparison_" + stamp + ".csv", result.to_csv());
        emit("results_strategy_comparison_" + stamp + ".json", result.to_json());
        if (plot_data) {
            emit("fig2_strategy_summary_" + stamp + ".csv", plot_frame(result, "k"));
            // per-split time series (fig. 3 shape)
            std::ostringstream fig3;
            fig3 << "test_as_of,split_id,strategy,metric,group,value\n";
            for (const auto& r : result.rows) {
                if (r.split_id < 0) continue;
                fig3 << bound[static_cast<std::size_t>(r.split_id)].split.test_as_of.to_string()
                     << ',' << r.split_id << ',' << r.strategy << ',' << r.metric << ',' << r.group
                     << ',' << format_double(r.value) << "\n";
            }
            emit("fig3_over_time_" + stamp + ".csv", fig3.str());
            const auto shifts = precision_shift_distribution(
                *bound.front().val, *bound.front().test, models, rs.k, rs.seed);
            emit("fig1e_precision_shift_" + stamp + ".csv", shifts.rows.to_csv());
        }
    } else if (command == "sweep") {
        if (rs.k_grid.empty()) {
            throw ConfigError("sweep: config has no \"k_grid\"");
        }
        auto result =
            sweep_list_size(bound, models, rs.strategies, rs.k_grid, reference, rs.seed);
        emit("results_sweep_list_size_" + stamp + ".csv", result.to_csv());
        emit("results_sweep_list_size_" + stamp + ".json", result.to_json());
        if (plot_data) {
            emit("fig4abc_by_list_size_" + stamp + ".csv", plot_frame(result, "k"));
        }
    } else {  // resample
        if (rs.focal_group.empty()) {
            throw ConfigError("resample: config has no \"resample\" section");
        }
        const auto& split = bound.front();
        auto result = resample_group_fraction(*split.val, *split.test, models, rs.strategies, rs.k,
                                              rs.focal_group, rs.fractions, rs.replicates,
                                              reference, rs.seed);
        emit("results_resample_group_fraction_" + stamp + ".csv", result.to_csv());
        emit("results_resample_group_fraction_" + stamp + ".json", result.to_json());
        if (plot_data) {
            emit("fig4d_by_fraction_" + stamp + ".csv", plot_frame(result, "fraction"));
        }
    }
    write_manifest(out_dir, command, rs, outputs);
    std::cout << "wrote " << (out_dir / "manifest.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"equitop: recall-equalized top-k selection and fairness-aware model selection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic scored cohort files");
    std::string synth_config, synth_out;
    synth->add_option("--config", synth_config, "SynthConfig JSON")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();

    // mitigate
    auto* mitigate =
        app.add_subcommand("mitigate", "Derive a recall-equalizing allocation from a validation cohort");
    std::string mit_val, mit_attr, mit_model, mit_out;
    std::size_t mit_k = 0;
    uint64_t mit_seed = 0;
    mitigate->add_option("--val", mit_val, "Validation predictions CSV")->required();
    mitigate->add_option("--attribute", mit_attr, "Protected attribute column")->required();
    mitigate->add_option("--model", mit_model, "Model id to equalize")->required();
    mitigate->add_option("--k", mit_k, "Total list size")->required();
    mitigate->add_option("--seed", mit_seed, "Tie-break seed")->required();
    mitigate->add_option("--out", mit_out, "Allocation JSON output")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Apply an allocation to a test cohort and report");
    std::string eval_test, eval_alloc, eval_attr, eval_ref, eval_out;
    std::optional<uint64_t> eval_seed;
    evaluate->add_option("--test", eval_test, "Test predictions CSV")->required();
    evaluate->add_option("--allocation", eval_alloc, "Allocation JSON")->required();
    evaluate->add_option("--attribute", eval_attr, "Protected attribute column")->required();
    evaluate->add_option("--reference", eval_ref, "Reference group (default: largest)");
    evaluate->add_option("--seed", eval_seed, "Tie-break seed (default: allocation's)");
    evaluate->add_option("--out", eval_out, "Report JSON output")->required();

    // select
    auto* select = app.add_subcommand("select", "Run a model selection strategy on a cohort pair");
    std::string sel_val, sel_test, sel_attr, sel_strategy = "all", sel_ref, sel_out;
    std::vector<std::string> sel_models;
    std::size_t sel_k = 0;
    uint64_t sel_seed = 0;
    select->add_option("--val", sel_val, "Validation predictions CSV")->required();
    select->add_option("--test", sel_test, "Test predictions CSV")->required();
    select->add_option("--attribute", sel_attr, "Protected attribute column")->required();
    select->add_option("--strategy", sel_strategy,
                       "unmitigated | mitigated_single | mitigated_unadjusted_selection | "
                       "mitigated_composite | all");
    select->add_option("--models", sel_models, "Candidate model ids (default: all in common)");
    select->add_option("--reference", sel_ref, "Reference group (default: largest)");
    select->add_option("--k", sel_k, "Total list size")->required();
    select->add_option("--seed", sel_seed, "Tie-break seed")->required();
    select->add_option("--out", sel_out, "Outcome JSON path (or directory with --strategy all)")
        ->required();

    // splits
    auto* splits = app.add_subcommand("splits", "Generate inter-temporal validation splits");
    std::string sp_first, sp_dir, sp_attr = "group", sp_out;
    int sp_window = 12, sp_cadence = 12;
    std::size_t sp_n = 1;
    splits->add_option("--first-date", sp_first, "Test as-of date of split 0 (YYYY-MM-DD)")
        ->required();
    splits->add_option("--label-window", sp_window, "Label window, months");
    splits->add_option("--cadence", sp_cadence, "Cohort cadence, months");
    splits->add_option("--n-splits", sp_n, "Number of splits");
    splits->add_option("--data-dir", sp_dir, "If set, verify cohort files exist and parse");
    splits->add_option("--attribute", sp_attr, "Attribute column for binding");
    splits->add_option("--out", sp_out, "Split list JSON output (default: stdout)");

    // run / sweep / resample share flags
    struct ExpFlags {
        std::string config, out = ".";
        std::optional<std::size_t> k;
        std::optional<uint64_t> seed;
        bool plot_data = false;
        std::string stamp;
    };
    std::map<std::string, ExpFlags> exp_flags;
    for (const auto& [name, help] :
         std::vector<std::pair<std::string, std::string>>{
             {"run", "Strategy comparison across temporal splits"},
             {"sweep", "Strategy comparison across a list-size grid"},
             {"resample", "Group-fraction bootstrap resampling experiment"}}) {
        auto* cmd = app.add_subcommand(name, help);
        auto& flags = exp_flags[name];
        cmd->add_option("--config", flags.config, "Run config JSON")->required();
        cmd->add_option("--out", flags.out, "Output directory");
        cmd->add_option("--k", flags.k, "Override config k");
        cmd->add_option("--seed", flags.seed, "Override config seed");
        cmd->add_flag("--plot-data", flags.plot_data, "Also emit per-figure CSVs");
        cmd->add_option("--stamp", flags.stamp, "Fixed timestamp for output names");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_config, synth_out);
        if (mitigate->parsed()) {
            if (mit_k == 0) throw DomainError("mitigate: k must be >= 1");
            return cmd_mitigate(mit_val, mit_attr, mit_model, mit_k, mit_seed, mit_out);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(eval_test, eval_alloc, eval_attr, eval_ref, eval_seed, eval_out);
        }
        if (select->parsed()) {
            return cmd_select(sel_val, sel_test, sel_attr, sel_strategy, sel_models, sel_ref, sel_k,
                              sel_seed, sel_out);
        }
        if (splits->parsed()) {
            return cmd_splits(parse_date_arg(sp_first, "--first-date"), sp_window, sp_cadence, sp_n,
                              sp_dir, sp_attr, sp_out);
        }
        for (const auto& name : {"run", "sweep", "resample"}) {
            if (app.get_subcommand(name)->parsed()) {
                const auto& f = exp_flags[name];
                return run_experiment_command(name, f.config, f.out, f.k, f.seed, f.plot_data,
                                              f.stamp);
            }
        }
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::input: return 2;
            case ErrorKind::domain: return 3;
            case ErrorKind::internal: return 1;
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
