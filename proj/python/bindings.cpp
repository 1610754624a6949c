#include "switchback/error.hpp"
#include "switchback/estimation.hpp"
#include "switchback/inference.hpp"
#include "switchback/optimal_design.hpp"
#include "switchback/serialization.hpp"
#include "switchback/study.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
namespace sb = switchback;

namespace {

// JSON crosses the boundary as text; the Python side wraps it in json.loads/dumps.
std::string dump(const sb::Json& j) { return j.dump(); }

sb::ExperimentData experiment(const sb::Design& design, int p, const std::string& path, std::vector<double> observed) {
    return sb::ExperimentData::make(design, p, sb::AssignmentPath::parse(path), std::move(observed));
}

sb::OraclePtr model(const std::string& model_json, int horizon) {
    return sb::ModelConfig::from_json(sb::Json::parse(model_json)).build(horizon);
}

sb::RiskMethod risk_method(const std::string& name) {
    if (name == "closed") return sb::RiskMethod::ClosedForm;
    if (name == "enum") return sb::RiskMethod::Enumeration;
    if (name == "mc") return sb::RiskMethod::MonteCarlo;
    if (name == "exact") return sb::RiskMethod::Exact;
    throw sb::Error(sb::ErrorCode::ConfigInvalid, "unknown risk method '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_switchback, m) {
    m.doc() = "Switchback experiment design and analysis";

    py::register_exception<sb::Error>(m, "SwitchbackError", PyExc_ValueError);

    py::class_<sb::Design>(m, "Design")
        .def(py::init([](int horizon, std::vector<int> points) { return sb::Design::validate(horizon, std::move(points)); }),
             py::arg("horizon"), py::arg("points"))
        .def_property_readonly("horizon", &sb::Design::horizon)
        .def_property_readonly("points", &sb::Design::points)
        .def_property_readonly("switches", &sb::Design::switches)
        .def("__eq__", [](const sb::Design& a, const sb::Design& b) { return a == b; })
        .def("__repr__", [](const sb::Design& d) { return "Design(" + std::to_string(d.horizon()) + ", " + sb::to_string(d) + ")"; })
        .def("to_json", [](const sb::Design& d) { return dump(sb::to_json(d)); });

    m.def("path_probability", [](const sb::Design& d, const std::string& path) {
        return sb::path_probability(d, sb::AssignmentPath::parse(path));
    });
    m.def("enumerate_paths", [](const sb::Design& d) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& wp : sb::enumerate_paths(d)) out.emplace_back(wp.path.to_string(), wp.probability);
        return out;
    });
    m.def("sample_path", [](const sb::Design& d, std::uint64_t seed) { return sb::sample_path(d, seed).to_string(); });
    m.def("determining_point", &sb::determining_point);
    m.def("determining_window", &sb::determining_window);
    m.def("is_persistent", &sb::is_persistent);

    m.def("optimal_design", &sb::optimal_design, py::arg("horizon"), py::arg("order"));
    m.def("optimal_design_bruteforce", &sb::optimal_design_bruteforce, py::arg("horizon"), py::arg("order"));
    m.def("subset_selection_objective", &sb::subset_selection_objective_exact);
    m.def(
        "risk",
        [](const sb::Design& d, const std::string& model_json, int p, const std::string& method, std::int64_t reps,
           std::uint64_t seed, double bound) {
            switch (risk_method(method)) {
                case sb::RiskMethod::ClosedForm: return dump(sb::to_json(sb::worst_case_risk_closed_form(d, p, bound)));
                case sb::RiskMethod::Enumeration:
                    return dump(sb::to_json(sb::risk_enumeration(d, *model(model_json, d.horizon()), p)));
                case sb::RiskMethod::Exact: return dump(sb::to_json(sb::risk_exact(d, *model(model_json, d.horizon()), p)));
                case sb::RiskMethod::MonteCarlo:
                    return dump(sb::to_json(sb::risk_monte_carlo(d, *model(model_json, d.horizon()), p, reps, seed)));
            }
            return std::string();
        },
        py::arg("design"), py::arg("model"), py::arg("p"), py::arg("method"), py::arg("reps") = 100000, py::arg("seed") = 0,
        py::arg("bound") = 1.0);

    m.def(
        "simulate",
        [](const sb::Design& d, const std::string& model_json, std::uint64_t seed) {
            const auto path = sb::sample_path(d, seed);
            return std::make_pair(path.to_string(), sb::realize_observed(*model(model_json, d.horizon()), path));
        },
        py::arg("design"), py::arg("model"), py::arg("seed"));
    m.def("estimand", [](const std::string& model_json, int horizon, int p) { return sb::lag_p_estimand(*model(model_json, horizon), p); });

    m.def("ht_estimator", [](const sb::Design& d, int p, const std::string& path, std::vector<double> y) {
        return sb::ht_estimator(experiment(d, p, path, std::move(y)));
    });
    m.def("variance_estimates", [](const sb::Design& d, int p, const std::string& path, std::vector<double> y) {
        const auto v = sb::variance_estimates(experiment(d, p, path, std::move(y)), p);
        return std::make_pair(v.u1, v.u2);
    });
    m.def(
        "exact_test",
        [](const sb::Design& d, int p, const std::string& path, std::vector<double> y, std::int64_t resamples, std::uint64_t seed) {
            return dump(sb::to_json(sb::exact_test(experiment(d, p, path, std::move(y)), {resamples, seed, 0})));
        },
        py::arg("design"), py::arg("p"), py::arg("path"), py::arg("observed"), py::arg("resamples") = 10000, py::arg("seed") = 0);
    m.def("asymptotic_test", [](double tau_hat, double sigma2) { return dump(sb::to_json(sb::asymptotic_test(tau_hat, sigma2))); });
    m.def("normal_ci", [](double tau_hat, double sigma2, double level) {
        const auto ci = sb::normal_ci(tau_hat, sigma2, level);
        return std::make_pair(ci.lower, ci.upper);
    });
    m.def(
        "analyze",
        [](const sb::Design& d, int p, const std::string& path, std::vector<double> y, std::int64_t resamples, std::uint64_t seed,
           double level) {
            std::optional<sb::ExactTestConfig> exact;
            if (resamples > 0) exact = sb::ExactTestConfig{resamples, seed, 0};
            return dump(sb::to_json(sb::analyze_experiment(experiment(d, p, path, std::move(y)), exact, level)));
        },
        py::arg("design"), py::arg("p"), py::arg("path"), py::arg("observed"), py::arg("resamples") = 10000, py::arg("seed") = 0,
        py::arg("level") = 0.95);
    m.def("identify_m_subroutine", [](const std::string& s1, const std::string& s2) {
        return dump(sb::to_json(sb::identify_m_subroutine(sb::summary_from_json(sb::Json::parse(s1)),
                                                           sb::summary_from_json(sb::Json::parse(s2)))));
    });

    m.def("run_study", [](const std::string& config_json) {
        const auto result = sb::run_study(sb::StudyConfig::from_json(sb::Json::parse(config_json)));
        std::ostringstream csv;
        result.table.write_csv(csv);
        return csv.str();
    });
}
