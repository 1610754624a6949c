#pragma once

#include "switchback/design.hpp"
#include "switchback/inference.hpp"
#include "switchback/optimal_design.hpp"
#include "switchback/outcomes.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace switchback {

using Json = nlohmann::json;

Json to_json(const Design& design);
/// {"horizon": T, "points": [...]}. Throws ConfigInvalid or the design's own validation errors.
Design design_from_json(const Json& j);

Json to_json(const TestResult& result);
Json to_json(const RiskReport& report);
Json to_json(const AnalysisReport& report);
Json to_json(const ExperimentSummary& summary);
ExperimentSummary summary_from_json(const Json& j);

enum class ModelKind { Linear, Autoregressive, WorstCase };

/// Parsed model configuration:
/// {"model": "linear"|"ar"|"worst_case", "mu", "alpha": "log"|[...], "deltas": [...],
///  "noise_sd", "seed", "phi": [...], "truncation", "B", "sign": "+"|"-", "order"}.
struct ModelConfig {
    ModelKind kind = ModelKind::Linear;
    LinearCarryoverModel linear;
    AutoregressiveModel autoregressive;
    double bound = 1.0;
    Sign sign = Sign::Plus;
    int order = 0;  // worst_case only

    static ModelConfig from_json(const Json& j);
    [[nodiscard]] Json to_json() const;
    [[nodiscard]] OraclePtr build(int horizon) const;
};

Json read_json_file(const std::string& path);

}  // namespace switchback
