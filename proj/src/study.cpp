#include "switchback/study.hpp"

#include "switchback/error.hpp"
#include "switchback/estimation.hpp"
#include "switchback/inference.hpp"
#include "switchback/optimal_design.hpp"
#include "switchback/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace switchback {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_deltas(const std::vector<double>& d) {
    std::ostringstream out;
    for (std::size_t i = 0; i < d.size(); ++i) out << (i ? "-" : "") << d[i];
    return out.str();
}

std::string order_case(int p, int m) {
    if (p == m) return "correct";
    return p > m ? "over" : "under";
}

}  // namespace

std::string_view to_string(StudyId id) {
    switch (id) {
        case StudyId::Table2: return "table2";
        case StudyId::Table3: return "table3";
        case StudyId::Table4: return "table4";
        case StudyId::Table5: return "table5";
        case StudyId::RejectionCurve: return "rejection_curve";
    }
    return "unknown";
}

StudyId study_id_from_string(std::string_view name) {
    for (auto id : {StudyId::Table2, StudyId::Table3, StudyId::Table4, StudyId::Table5, StudyId::RejectionCurve}) {
        if (to_string(id) == name) return id;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown study '" + std::string(name) + "'");
}

StudyConfig StudyConfig::defaults(StudyId id) {
    StudyConfig c;
    c.study = id;
    switch (id) {
        case StudyId::Table2:
            c.reps = 100000;
            break;
        case StudyId::Table3:
            c.reps = 100000;
            c.delta_rows = {{1, 1, 1}, {1, 1, 2}, {1, 2, 1}, {2, 1, 1}, {1, 2, 2}, {2, 1, 2}, {2, 2, 1}, {2, 2, 2}};
            break;
        case StudyId::Table4:
            c.reps = 100000;
            c.deltas = {1, 2, 3};
            c.orders = {2, 3, 1};
            break;
        case StudyId::Table5:
            c.reps = 1;
            c.deltas = {1, 2, 3};
            c.orders = {2, 3, 1};
            c.exact_resamples = 100000;
            break;
        case StudyId::RejectionCurve:
            c.reps = 1000;
            c.deltas = {1, 2, 3};
            for (int T = 60; T <= 600; T += 60) c.horizons.push_back(T);
            c.exact_resamples = 1000;
            break;
    }
    return c;
}

StudyConfig StudyConfig::from_json(const Json& j) {
    if (!j.is_object() || !j.contains("study")) throw Error(ErrorCode::ConfigInvalid, "config needs a \"study\" field");
    StudyConfig c;
    try {
        c = defaults(study_id_from_string(j.at("study").get<std::string>()));
        if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
        if (j.contains("order")) c.m = j.at("order").get<int>();
        if (j.contains("m")) c.m = j.at("m").get<int>();
        if (j.contains("p")) c.p = j.at("p").get<int>();
        if (j.contains("reps")) c.reps = j.at("reps").get<std::int64_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("noise_seed")) c.noise_seed = j.at("noise_seed").get<std::uint64_t>();
        if (j.contains("noise_sd")) c.noise_sd = j.at("noise_sd").get<double>();
        if (j.contains("B")) c.bound = j.at("B").get<double>();
        if (j.contains("delta_rows")) c.delta_rows = j.at("delta_rows").get<std::vector<std::vector<double>>>();
        if (j.contains("deltas")) c.deltas = j.at("deltas").get<std::vector<double>>();
        if (j.contains("orders")) c.orders = j.at("orders").get<std::vector<int>>();
        if (j.contains("horizons")) c.horizons = j.at("horizons").get<std::vector<int>>();
        if (j.contains("exact_resamples")) c.exact_resamples = j.at("exact_resamples").get<std::int64_t>();
        if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    if (c.reps < 1 || c.exact_resamples < 1) throw Error(ErrorCode::ConfigInvalid, "reps and exact_resamples must be positive");
    if (c.m < 0 || c.p < 0 || c.horizon < 1) throw Error(ErrorCode::ConfigInvalid, "horizon, order and p must be valid");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw Error(ErrorCode::ConfigInvalid, "alpha must lie in (0, 1)");
    if (c.noise_sd < 0.0) throw Error(ErrorCode::ConfigInvalid, "noise_sd must be non-negative");
    return c;
}

Json StudyConfig::to_json() const {
    return Json{{"study", std::string(switchback::to_string(study))},
                {"horizon", horizon},
                {"m", m},
                {"p", p},
                {"reps", reps},
                {"seed", seed},
                {"noise_seed", noise_seed},
                {"noise_sd", noise_sd},
                {"B", bound},
                {"delta_rows", delta_rows},
                {"deltas", deltas},
                {"orders", orders},
                {"horizons", horizons},
                {"exact_resamples", exact_resamples},
                {"alpha", alpha}};
}

void StudyTable::add_row(std::string label, std::vector<double> values) {
    if (values.size() != columns.size()) throw Error(ErrorCode::LengthMismatch, "row width differs from header");
    labels.push_back(std::move(label));
    rows.push_back(std::move(values));
}

double StudyTable::at(std::size_t row, std::string_view column) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] == column) return rows.at(row)[c];
    }
    throw Error(ErrorCode::ConfigInvalid, "no column '" + std::string(column) + "'");
}

void StudyTable::write_csv(std::ostream& out) const {
    out << label_column;
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    const auto precision = out.precision();
    out << std::setprecision(12);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << labels[r];
        for (double v : rows[r]) {
            out << ',';
            if (std::isnan(v)) {
                out << "nan";
            } else {
                out << v;
            }
        }
        out << '\n';
    }
    out.precision(precision);
}

BenchmarkDesigns benchmark_designs(int horizon, int m) {
    return {optimal_design(horizon, m), every_period_design(horizon), fixed_epoch_design(horizon, m + 1)};
}

LinearCarryoverModel simulation_model(std::vector<double> deltas, double noise_sd, std::uint64_t noise_seed) {
    LinearCarryoverModel model;
    model.mu = 0.0;
    model.deltas = std::move(deltas);
    model.noise_sd = noise_sd;
    model.noise_seed = noise_seed;
    return model;
}

ReplicateMoments simulate_replicates(const Design& design, const OutcomeOracle& oracle, int p, std::int64_t reps,
                                     std::uint64_t seed) {
    if (reps < 1) throw Error(ErrorCode::ConfigInvalid, "reps must be at least 1");
    const bool misspecified = p < oracle.order();
    const bool replica = is_n_replica(design, p);
    const double tau = misspecified ? kNaN : lag_p_estimand(oracle, p);
    const HtWeights weights(design, p);
    struct Rep {
        double est, target, u1, u2;
    };
    std::vector<Rep> out(static_cast<std::size_t>(reps));
    parallel_for(out.size(), [&](std::size_t i) {
        CounterRng rng(seed, i);
        const auto path = sample_path(design, rng);
        const auto y = realize_observed(oracle, path);
        Rep r{weights.estimate(path.values(), y), misspecified ? misspecified_estimand(oracle, p, path) : tau, kNaN, kNaN};
        if (replica) {
            const auto b = variance_estimates_unchecked(design, path.values(), y, p);
            r.u1 = b.u1;
            r.u2 = b.u2;
        }
        out[i] = r;
    });
    const auto n = static_cast<double>(reps);
    ReplicateMoments s;
    for (const auto& r : out) {
        s.mean_tau_hat += r.est;
        s.mean_estimand += r.target;
        s.mean_sigma2_u1 += r.u1;
        s.mean_sigma2_u2 += r.u2;
        s.mse += (r.est - r.target) * (r.est - r.target);
    }
    s.mean_tau_hat /= n;
    s.mean_estimand /= n;
    s.mean_sigma2_u1 /= n;
    s.mean_sigma2_u2 /= n;
    s.mse /= n;
    double ss_est = 0.0;
    double ss_loss = 0.0;
    for (const auto& r : out) {
        ss_est += (r.est - s.mean_tau_hat) * (r.est - s.mean_tau_hat);
        const double loss = (r.est - r.target) * (r.est - r.target);
        ss_loss += (loss - s.mse) * (loss - s.mse);
    }
    s.var_tau_hat = ss_est / n;
    s.mse_se = reps > 1 ? std::sqrt(ss_loss / (n - 1.0) / n) : 0.0;
    return s;
}

namespace {

StudyTable run_table2(const StudyConfig& c) {
    const auto designs = benchmark_designs(c.horizon, c.m);
    const auto oracle = worst_case_outcomes(c.horizon, c.m, c.bound, Sign::Plus);
    const double scale = static_cast<double>(c.horizon - c.p) * static_cast<double>(c.horizon - c.p);
    StudyTable t;
    t.label_column = "design";
    t.columns = {"tau",          "mean_tau_hat",       "mean_tau_hat_total", "risk_mc",
                 "risk_mc_se",   "risk_mc_total",      "risk_exact",         "risk_exact_total",
                 "closed_form",  "closed_form_total",  "published",          "seed"};
    const std::vector<std::pair<std::string, const Design*>> list{
        {"optimal", &designs.optimal}, {"every_period", &designs.every_period}, {"fixed_epochs", &designs.fixed_epochs}};
    const double published[] = {26.78, 33.67, 27.85};
    for (std::size_t i = 0; i < list.size(); ++i) {
        const Design& d = *list[i].second;
        const auto mc = simulate_replicates(d, *oracle, c.p, c.reps, derive_seed(c.seed, i));
        const auto exact = risk_exact(d, *oracle, c.p);
        double closed = kNaN;
        if (c.p == c.m && is_persistent(d, c.m)) closed = worst_case_risk_closed_form(d, c.m, c.bound).risk;
        const bool published_setting = c.horizon == 120 && c.m == 2 && c.p == 2 && c.bound == 10.0;
        t.add_row(list[i].first, {0.0, mc.mean_tau_hat, mc.mean_tau_hat * (c.horizon - c.p), mc.mse, mc.mse_se,
                                  mc.mse * scale, exact.risk, exact.total_risk(), closed, closed * scale,
                                  published_setting ? published[i] : kNaN, static_cast<double>(c.seed)});
    }
    return t;
}

StudyTable run_table3(const StudyConfig& c) {
    const auto designs = benchmark_designs(c.horizon, c.m);
    const std::vector<std::pair<std::string, const Design*>> list{
        {"optimal", &designs.optimal}, {"every_period", &designs.every_period}, {"fixed_epochs", &designs.fixed_epochs}};
    StudyTable t;
    t.label_column = "deltas";
    t.columns = {"tau"};
    for (const char* stat : {"mean", "risk", "risk_se", "risk_exact", "risk_total"}) {
        for (const auto& [name, d] : list) t.columns.push_back(std::string(stat) + "_" + name);
    }
    t.columns.push_back("seed");
    t.columns.push_back("noise_seed");
    const double scale = static_cast<double>(c.horizon - c.p) * static_cast<double>(c.horizon - c.p);
    for (const auto& deltas : c.delta_rows) {
        const auto oracle = simulation_model(deltas, c.noise_sd, c.noise_seed).build(c.horizon);
        if (oracle->order() > c.p) throw Error(ErrorCode::ConfigInvalid, "table3 needs p >= the model's order");
        std::vector<ReplicateMoments> mc;
        std::vector<double> exact;
        for (std::size_t i = 0; i < list.size(); ++i) {
            mc.push_back(simulate_replicates(*list[i].second, *oracle, c.p, c.reps, derive_seed(c.seed, i)));
            exact.push_back(risk_exact(*list[i].second, *oracle, c.p).risk);
        }
        std::vector<double> row{lag_p_estimand(*oracle, c.p)};
        for (const auto& s : mc) row.push_back(s.mean_tau_hat);
        for (const auto& s : mc) row.push_back(s.mse);
        for (const auto& s : mc) row.push_back(s.mse_se);
        for (double e : exact) row.push_back(e);
        for (const auto& s : mc) row.push_back(s.mse * scale);
        row.push_back(static_cast<double>(c.seed));
        row.push_back(static_cast<double>(c.noise_seed));
        t.add_row(join_deltas(deltas), std::move(row));
    }
    return t;
}

StudyTable run_table4(const StudyConfig& c) {
    StudyTable t;
    t.columns = {"p",          "delta",         "tau_p",          "tau_misspecified", "mean_tau_hat",
                 "var_tau_hat", "mean_sigma2_u1", "mean_sigma2_u2", "exact_mean",       "exact_var",
                 "exact_u1",   "exact_u2",      "seed"};
    for (int p : c.orders) {
        const Design design = optimal_design(c.horizon, p);
        for (std::size_t di = 0; di < c.deltas.size(); ++di) {
            const double delta = c.deltas[di];
            const auto oracle = simulation_model(std::vector<double>(static_cast<std::size_t>(c.m) + 1, delta), c.noise_sd,
                                                 c.noise_seed)
                                    .build(c.horizon);
            const auto s = simulate_replicates(design, *oracle, p, c.reps, derive_seed(c.seed, static_cast<std::uint64_t>(p)));
            const auto exact = moments_local(design, *oracle, p);
            const bool under = p < oracle->order();
            double u1 = kNaN;
            double u2 = kNaN;
            if (!under && is_n_replica(design, p)) {
                const auto b = variance_bounds(design, *oracle, p);
                u1 = b.u1;
                u2 = b.u2;
            }
            t.add_row(order_case(p, c.m),
                      {static_cast<double>(p), delta, under ? kNaN : lag_p_estimand(*oracle, p), under ? s.mean_estimand : kNaN,
                       s.mean_tau_hat, s.var_tau_hat, s.mean_sigma2_u1, s.mean_sigma2_u2, exact.mean, exact.variance, u1, u2,
                       static_cast<double>(c.seed)});
        }
    }
    return t;
}

StudyTable run_table5(const StudyConfig& c) {
    StudyTable t;
    t.columns = {"p", "delta", "tau_p", "tau_misspecified", "tau_hat", "sigma2_u1", "sigma2_u2", "p_exact", "p_asymptotic",
                 "resamples", "seed"};
    for (int p : c.orders) {
        const Design design = optimal_design(c.horizon, p);
        CounterRng rng(c.seed, static_cast<std::uint64_t>(p));
        const auto path = sample_path(design, rng);
        for (double delta : c.deltas) {
            const auto oracle = simulation_model(std::vector<double>(static_cast<std::size_t>(c.m) + 1, delta), c.noise_sd,
                                                 c.noise_seed)
                                    .build(c.horizon);
            const bool under = p < oracle->order();
            const auto data = ExperimentData::make(design, p, path, realize_observed(*oracle, path));
            const double tau_hat = ht_estimator(data);
            const auto bounds = variance_estimates(data, p);
            const auto exact = exact_test(data, {c.exact_resamples, derive_seed(c.seed, static_cast<std::uint64_t>(p)), 0});
            const double p_asym = bounds.u2 > 0.0 ? asymptotic_test(tau_hat, bounds.u2).p_value : kNaN;
            t.add_row(order_case(p, c.m),
                      {static_cast<double>(p), delta, under ? kNaN : lag_p_estimand(*oracle, p),
                       under ? misspecified_estimand(*oracle, p, path) : kNaN, tau_hat, bounds.u1, bounds.u2, exact.p_value,
                       p_asym, static_cast<double>(c.exact_resamples), static_cast<double>(c.seed)});
        }
    }
    return t;
}

StudyTable run_rejection_curve(const StudyConfig& c) {
    StudyTable t;
    t.label_column = "delta";
    t.columns = {"horizon", "epochs", "rate_exact", "rate_asymptotic", "reps", "resamples", "seed"};
    for (double delta : c.deltas) {
        for (int T : c.horizons) {
            const Design design = optimal_design(T, c.m);
            const auto oracle = simulation_model(std::vector<double>(static_cast<std::size_t>(c.m) + 1, delta), c.noise_sd,
                                                 c.noise_seed)
                                    .build(T);
            std::vector<std::uint8_t> exact_reject(static_cast<std::size_t>(c.reps));
            std::vector<std::uint8_t> asym_reject(static_cast<std::size_t>(c.reps));
            parallel_for(exact_reject.size(), [&](std::size_t r) {
                CounterRng rng(c.seed, r);
                const auto path = sample_path(design, rng);
                const auto data = ExperimentData::make(design, c.p, path, realize_observed(*oracle, path));
                const double tau_hat = ht_estimator(data);
                const double u2 = variance_estimates(data, c.p).u2;
                asym_reject[r] = u2 > 0.0 && asymptotic_test(tau_hat, u2).p_value < c.alpha;
                const auto exact = exact_test(data, {c.exact_resamples, derive_seed(c.seed ^ 0x5bd1e995ULL, r), 1});
                exact_reject[r] = exact.p_value < c.alpha;
            });
            double re = 0.0;
            double ra = 0.0;
            for (std::size_t r = 0; r < exact_reject.size(); ++r) {
                re += exact_reject[r];
                ra += asym_reject[r];
            }
            const auto n = static_cast<double>(c.reps);
            std::ostringstream label;
            label << delta;
            t.add_row(label.str(), {static_cast<double>(T), static_cast<double>(T) / c.m, re / n, ra / n, n,
                                    static_cast<double>(c.exact_resamples), static_cast<double>(c.seed)});
        }
    }
    return t;
}

}  // namespace

StudyResult run_study(const StudyConfig& config) {
    StudyResult result{config, {}};
    switch (config.study) {
        case StudyId::Table2: result.table = run_table2(config); break;
        case StudyId::Table3: result.table = run_table3(config); break;
        case StudyId::Table4: result.table = run_table4(config); break;
        case StudyId::Table5: result.table = run_table5(config); break;
        case StudyId::RejectionCurve: result.table = run_rejection_curve(config); break;
    }
    return result;
}

}  // namespace switchback
