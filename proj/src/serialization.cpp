#include "switchback/serialization.hpp"

#include "switchback/error.hpp"

#include <fstream>

namespace switchback {

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T require(const Json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::ConfigInvalid, std::string("missing field '") + key + "'");
    return get_or<T>(j, key, T{});
}

}  // namespace

Json to_json(const Design& design) { return Json{{"horizon", design.horizon()}, {"points", design.points()}}; }

Design design_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "design must be a JSON object");
    return Design::validate(require<int>(j, "horizon"), require<std::vector<int>>(j, "points"));
}

Json to_json(const TestResult& result) {
    Json j{{"statistic", result.statistic}, {"p_value", result.p_value}, {"method", std::string(to_string(result.method))}};
    j["resamples"] = result.resamples ? Json(*result.resamples) : Json(nullptr);
    j["seed"] = result.seed ? Json(*result.seed) : Json(nullptr);
    if (result.variance) j["variance"] = *result.variance;
    return j;
}

Json to_json(const RiskReport& report) {
    Json j{{"design", to_json(report.design)},
           {"method", std::string(to_string(report.method))},
           {"p", report.p},
           {"risk", report.risk},
           {"total_risk", report.total_risk()},
           {"bias", report.bias},
           {"standard_error", report.standard_error}};
    j["replications"] = report.replications ? Json(*report.replications) : Json(nullptr);
    j["seed"] = report.seed ? Json(*report.seed) : Json(nullptr);
    return j;
}

Json to_json(const AnalysisReport& report) {
    Json j{{"p", report.p}, {"tau_hat", report.tau_hat}, {"tau_hat_total", report.tau_hat_total}};
    j["sigma2_u1"] = report.sigma2 ? Json(report.sigma2->u1) : Json(nullptr);
    j["sigma2_u2"] = report.sigma2 ? Json(report.sigma2->u2) : Json(nullptr);
    j["p_exact"] = report.exact ? Json(report.exact->p_value) : Json(nullptr);
    j["p_asymptotic"] = report.asymptotic ? Json(report.asymptotic->p_value) : Json(nullptr);
    if (report.exact) j["exact_test"] = to_json(*report.exact);
    if (report.asymptotic) j["asymptotic_test"] = to_json(*report.asymptotic);
    if (report.normal_interval) {
        j["normal_ci"] = Json{{"level", report.level},
                              {"lower", report.normal_interval->lower},
                              {"upper", report.normal_interval->upper}};
    } else {
        j["normal_ci"] = nullptr;
    }
    return j;
}

Json to_json(const ExperimentSummary& summary) {
    return Json{{"p", summary.p}, {"tau_hat", summary.tau_hat}, {"sigma2_hat", summary.sigma2_hat}, {"n", summary.n}};
}

ExperimentSummary summary_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "summary must be a JSON object");
    ExperimentSummary s;
    s.p = require<int>(j, "p");
    s.tau_hat = require<double>(j, "tau_hat");
    s.sigma2_hat = require<double>(j, "sigma2_hat");
    s.n = get_or<int>(j, "n", 0);
    if (s.sigma2_hat < 0.0) throw Error(ErrorCode::ConfigInvalid, "sigma2_hat must be non-negative");
    return s;
}

ModelConfig ModelConfig::from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "model must be a JSON object");
    ModelConfig c;
    const auto kind = get_or<std::string>(j, "model", "linear");
    const auto seed = get_or<std::uint64_t>(j, "seed", 0);
    const auto noise_sd = get_or<double>(j, "noise_sd", 1.0);
    if (noise_sd < 0.0) throw Error(ErrorCode::ConfigInvalid, "noise_sd must be non-negative");
    if (kind == "linear") {
        c.kind = ModelKind::Linear;
        c.linear.mu = get_or<double>(j, "mu", 0.0);
        c.linear.deltas = require<std::vector<double>>(j, "deltas");
        c.linear.noise_sd = noise_sd;
        c.linear.noise_seed = seed;
        if (j.contains("alpha")) {
            const auto& a = j.at("alpha");
            if (a.is_string()) {
                if (a.get<std::string>() != "log") throw Error(ErrorCode::ConfigInvalid, "alpha must be \"log\" or a list");
            } else if (a.is_array()) {
                c.linear.alpha.log_t = false;
                c.linear.alpha.values = a.get<std::vector<double>>();
            } else {
                throw Error(ErrorCode::ConfigInvalid, "alpha must be \"log\" or a list");
            }
        }
    } else if (kind == "ar") {
        c.kind = ModelKind::Autoregressive;
        c.autoregressive.phi = get_or<std::vector<double>>(j, "phi", {});
        c.autoregressive.deltas = require<std::vector<double>>(j, "deltas");
        c.autoregressive.noise_sd = noise_sd;
        c.autoregressive.noise_seed = seed;
        if (j.contains("truncation") && !j.at("truncation").is_null()) c.autoregressive.truncation = j.at("truncation").get<int>();
    } else if (kind == "worst_case") {
        c.kind = ModelKind::WorstCase;
        c.bound = require<double>(j, "B");
        if (!(c.bound > 0.0)) throw Error(ErrorCode::NonpositiveBound, "B must be positive");
        const auto sign = get_or<std::string>(j, "sign", "+");
        if (sign != "+" && sign != "-") throw Error(ErrorCode::ConfigInvalid, "sign must be \"+\" or \"-\"");
        c.sign = sign == "+" ? Sign::Plus : Sign::Minus;
        c.order = get_or<int>(j, "order", 0);
        if (c.order < 0) throw Error(ErrorCode::ConfigInvalid, "order must be non-negative");
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown model '" + kind + "'");
    }
    return c;
}

Json ModelConfig::to_json() const {
    switch (kind) {
        case ModelKind::Linear: {
            Json j{{"model", "linear"}, {"mu", linear.mu}, {"deltas", linear.deltas},
                   {"noise_sd", linear.noise_sd}, {"seed", linear.noise_seed}};
            j["alpha"] = linear.alpha.log_t ? Json("log") : Json(linear.alpha.values);
            return j;
        }
        case ModelKind::Autoregressive: {
            Json j{{"model", "ar"}, {"phi", autoregressive.phi}, {"deltas", autoregressive.deltas},
                   {"noise_sd", autoregressive.noise_sd}, {"seed", autoregressive.noise_seed}};
            j["truncation"] = autoregressive.truncation ? Json(*autoregressive.truncation) : Json(nullptr);
            return j;
        }
        case ModelKind::WorstCase:
            return Json{{"model", "worst_case"}, {"B", bound}, {"sign", sign == Sign::Plus ? "+" : "-"}, {"order", order}};
    }
    return Json{};
}

OraclePtr ModelConfig::build(int horizon) const {
    switch (kind) {
        case ModelKind::Linear: return linear.build(horizon);
        case ModelKind::Autoregressive: return autoregressive.build(horizon);
        case ModelKind::WorstCase: return worst_case_outcomes(horizon, order, bound, sign);
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown model kind");
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, "'" + path + "': " + e.what());
    }
}

}  // namespace switchback
