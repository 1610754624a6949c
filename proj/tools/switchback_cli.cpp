// Command-line front end: design, risk, simulate, analyze, identify, study.
#include "switchback/error.hpp"
#include "switchback/estimation.hpp"
#include "switchback/inference.hpp"
#include "switchback/optimal_design.hpp"
#include "switchback/serialization.hpp"
#include "switchback/study.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace sb = switchback;

namespace {

sb::Design load_design(const std::string& path) { return sb::design_from_json(sb::read_json_file(path)); }

sb::ModelConfig load_model(const std::string& path) { return sb::ModelConfig::from_json(sb::read_json_file(path)); }

int cmd_design(int horizon, int order, bool brute_force) {
    const auto d = brute_force ? sb::optimal_design_bruteforce(horizon, order) : sb::optimal_design(horizon, order);
    std::cout << sb::to_json(d).dump() << '\n';
    return 0;
}

struct RiskArgs {
    std::string design;
    std::string model;
    int order = 0;
    std::string method = "closed";
    std::int64_t reps = 100000;
    std::uint64_t seed = 0;
    double bound = 0.0;
};

int cmd_risk(const RiskArgs& a) {
    const auto design = load_design(a.design);
    const auto model = load_model(a.model);
    auto compute = [&]() -> sb::RiskReport {
        if (a.method == "closed") {
            double bound = a.bound;
            if (bound <= 0.0) {
                if (model.kind != sb::ModelKind::WorstCase) {
                    throw sb::Error(sb::ErrorCode::ConfigInvalid, "closed form needs --bound or a worst_case model");
                }
                bound = model.bound;
            }
            return sb::worst_case_risk_closed_form(design, a.order, bound);
        }
        const auto oracle = model.build(design.horizon());
        if (a.method == "enum") return sb::risk_enumeration(design, *oracle, a.order);
        if (a.method == "mc") return sb::risk_monte_carlo(design, *oracle, a.order, a.reps, a.seed);
        if (a.method == "exact") return sb::risk_exact(design, *oracle, a.order);
        throw sb::Error(sb::ErrorCode::ConfigInvalid, "unknown method '" + a.method + "'");
    };
    const auto report = compute();
    std::cout << sb::to_json(report).dump(2) << '\n';
    return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& design_path, int order, std::uint64_t seed,
                 const std::string& out_path) {
    const auto design = load_design(design_path);
    const auto oracle = load_model(model_path).build(design.horizon());
    const auto path = sb::sample_path(design, seed);
    const auto y = sb::realize_observed(*oracle, path);
    const auto data = sb::ExperimentData::make(design, order, path, y);
    std::ofstream out(out_path);
    if (!out) throw sb::Error(sb::ErrorCode::ConfigInvalid, "cannot write '" + out_path + "'");
    sb::write_experiment_csv(out, path, y);
    sb::Json summary{{"out", out_path}, {"path", path.to_string()}, {"tau_hat", sb::ht_estimator(data)}, {"seed", seed}};
    if (order >= oracle->order()) summary["tau_p"] = sb::lag_p_estimand(*oracle, order);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_analyze(const std::string& data_path, const std::string& design_path, int order, std::int64_t resamples,
                std::uint64_t seed, double level) {
    const auto design = load_design(design_path);
    std::ifstream in(data_path);
    if (!in) throw sb::Error(sb::ErrorCode::ConfigInvalid, "cannot open '" + data_path + "'");
    auto table = sb::read_experiment_csv(in);
    const auto data = sb::ExperimentData::make(design, order, std::move(table.path), std::move(table.observed));
    std::optional<sb::ExactTestConfig> exact;
    if (resamples > 0) exact = sb::ExactTestConfig{resamples, seed, 0};
    std::cout << sb::to_json(sb::analyze_experiment(data, exact, level)).dump(2) << '\n';
    return 0;
}

int cmd_identify(const std::string& path, double alpha) {
    const auto j = sb::read_json_file(path);
    const auto& list = j.is_object() && j.contains("summaries") ? j.at("summaries") : j;
    if (!list.is_array()) throw sb::Error(sb::ErrorCode::ConfigInvalid, "expected a list of summaries");
    std::map<int, sb::ExperimentSummary> by_order;
    for (const auto& item : list) {
        const auto s = sb::summary_from_json(item);
        by_order[s.p] = s;
    }
    std::vector<int> candidates;
    for (const auto& [p, s] : by_order) candidates.push_back(p);
    const auto result = sb::identify_m_search(
        candidates, [&](int p) { return by_order.at(p); }, alpha);
    sb::Json steps = sb::Json::array();
    for (const auto& s : result.steps) {
        steps.push_back({{"null", "m <= " + std::to_string(s.lower)}, {"p1", s.lower}, {"p2", s.upper},
                         {"p_value", s.p_value}, {"rejected", s.rejected}});
    }
    std::cout << sb::Json{{"order", result.order}, {"alpha", alpha}, {"steps", steps}}.dump(2) << '\n';
    return 0;
}

int cmd_study(const std::string& config_path, const std::string& out_dir) {
    const auto config = sb::StudyConfig::from_json(sb::read_json_file(config_path));
    const auto result = sb::run_study(config);
    std::filesystem::create_directories(out_dir);
    const std::string stem = std::string(sb::to_string(config.study));
    const auto csv_path = std::filesystem::path(out_dir) / (stem + ".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw sb::Error(sb::ErrorCode::ConfigInvalid, "cannot write '" + csv_path.string() + "'");
    result.table.write_csv(csv);
    std::ofstream cfg(std::filesystem::path(out_dir) / (stem + ".config.json"));
    cfg << config.to_json().dump(2) << '\n';
    std::cout << csv_path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design, simulate and analyze switchback experiments"};
    app.require_subcommand(1);

    int horizon = 0;
    int order = 0;
    bool brute_force = false;
    auto* design = app.add_subcommand("design", "Print the minimax-optimal design as JSON");
    design->add_option("--horizon", horizon, "Number of periods T")->required();
    design->add_option("--order", order, "Carryover order m")->required();
    design->add_flag("--brute-force", brute_force, "Exhaustive search (T <= 14)");

    RiskArgs risk_args;
    auto* risk = app.add_subcommand("risk", "Risk of a design under an outcome model");
    risk->add_option("--design", risk_args.design, "Design JSON file")->required();
    risk->add_option("--model", risk_args.model, "Model JSON file")->required();
    risk->add_option("--order", risk_args.order, "Order p")->required();
    risk->add_option("--method", risk_args.method, "closed | enum | mc | exact")
        ->check(CLI::IsMember({"closed", "enum", "mc", "exact"}));
    risk->add_option("--reps", risk_args.reps, "Monte Carlo replications");
    risk->add_option("--seed", risk_args.seed, "Monte Carlo seed");
    risk->add_option("--bound", risk_args.bound, "Outcome bound B for the closed form");

    std::string model_path, design_path, out_path, data_path, summaries_path, config_path, out_dir;
    std::uint64_t seed = 0;
    std::int64_t resamples = 0;
    double level = 0.95;
    double alpha = 0.1;

    auto* simulate = app.add_subcommand("simulate", "Run one simulated experiment and write its CSV");
    simulate->add_option("--model", model_path, "Model JSON file")->required();
    simulate->add_option("--design", design_path, "Design JSON file")->required();
    simulate->add_option("--order", order, "Order p")->required();
    simulate->add_option("--seed", seed, "Path seed")->required();
    simulate->add_option("--out", out_path, "Output CSV")->required();

    auto* analyze = app.add_subcommand("analyze", "Estimate and test from an experiment CSV");
    analyze->add_option("--data", data_path, "Experiment CSV")->required();
    analyze->add_option("--design", design_path, "Design JSON file")->required();
    analyze->add_option("--order", order, "Order p")->required();
    analyze->add_option("--exact-resamples", resamples, "Resamples for the exact test (0 skips it)");
    analyze->add_option("--seed", seed, "Resampling seed")->required();
    analyze->add_option("--level", level, "Confidence level");

    auto* identify = app.add_subcommand("identify", "Infer the carryover order from experiment summaries");
    identify->add_option("--summaries", summaries_path, "JSON list of {p, tau_hat, sigma2_hat, n}")->required();
    identify->add_option("--alpha", alpha, "Significance level")->required();

    auto* study = app.add_subcommand("study", "Run a simulation study");
    study->add_option("--config", config_path, "Study config JSON")->required();
    study->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*design) return cmd_design(horizon, order, brute_force);
        if (*risk) return cmd_risk(risk_args);
        if (*simulate) return cmd_simulate(model_path, design_path, order, seed, out_path);
        if (*analyze) return cmd_analyze(data_path, design_path, order, resamples, seed, level);
        if (*identify) return cmd_identify(summaries_path, alpha);
        if (*study) return cmd_study(config_path, out_dir);
    } catch (const sb::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
