#include "test_support.hpp"

#include "switchback/inference.hpp"
#include "switchback/optimal_design.hpp"
#include "switchback/study.hpp"

#include <cmath>
#include <map>

using namespace switchback;
using testing::code_of;

namespace {

ExperimentData simulated(const Design& d, const OutcomeOracle& y, int p, std::uint64_t seed) {
    const auto w = sample_path(d, seed);
    return ExperimentData::make(d, p, w, realize_observed(y, w));
}

const Design& cached_optimal(int T, int p) {
    static std::map<std::pair<int, int>, Design> cache;
    auto it = cache.find({T, p});
    if (it == cache.end()) it = cache.emplace(std::make_pair(T, p), optimal_design(T, p)).first;
    return it->second;
}

// Runs one experiment at order p on the optimal design with T = n p.
ExperimentSummary run_once(const LinearCarryoverModel& model, int n, int p, std::uint64_t seed) {
    const int T = n * p;
    const Design& d = cached_optimal(T, p);
    auto noisy = model;
    noisy.noise_seed = derive_seed(seed, static_cast<std::uint64_t>(p));
    const auto y = noisy.build(T);
    const auto data = simulated(d, *y, p, derive_seed(seed + 1, static_cast<std::uint64_t>(p)));
    return ExperimentSummary{ht_estimator(data), variance_estimates(data, p).u2, p, n};
}

}  // namespace

TEST_CASE("normal distribution helpers") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-10.0) == doctest::Approx(7.61985302416e-24).epsilon(1e-9));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    for (double z = -6.0; z <= 6.0; z += 0.37) CHECK(normal_quantile(normal_cdf(z)) == doctest::Approx(z).epsilon(1e-9));
    CHECK(code_of([] { (void)normal_quantile(1.0); }) == ErrorCode::BadLevel);
    CHECK(code_of([] { (void)normal_quantile(0.0); }) == ErrorCode::BadLevel);
}

TEST_CASE("asymptotic test") {
    const auto r = asymptotic_test(7.25, 23.88);
    CHECK(std::abs(r.p_value - 0.138) < 0.001);
    CHECK(r.statistic == doctest::Approx(7.25 / std::sqrt(23.88)));
    CHECK(r.method == TestMethod::Asymptotic);
    CHECK(asymptotic_test(0.0, 3.0).p_value == 1.0);
    CHECK(std::abs(asymptotic_test(1.959964 * std::sqrt(2.0), 2.0).p_value - 0.05) < 1e-6);
    CHECK(code_of([] { (void)asymptotic_test(1.0, 0.0); }) == ErrorCode::ZeroVariance);
    double last = 2.0;
    for (double t = 0.0; t < 10.0; t += 0.5) {
        const double p = asymptotic_test(t, 4.0).p_value;
        CHECK(p < last);
        last = p;
    }
}

TEST_CASE("normal confidence interval") {
    const auto ci = normal_ci(0.0, 1.0, 0.95);
    CHECK(ci.lower == doctest::Approx(-1.959964).epsilon(1e-6));
    CHECK(ci.upper == doctest::Approx(1.959964).epsilon(1e-6));
    const auto tiny = normal_ci(3.0, 2.0, 1e-9);
    CHECK(tiny.upper - tiny.lower < 1e-8);
    CHECK(tiny.contains(3.0));
    CHECK(normal_ci(7.25, 23.88, 0.90).contains(0.0));
    CHECK((normal_ci(1.0, 4.0, 0.9).upper - 1.0) == doctest::Approx(2 * (normal_ci(1.0, 1.0, 0.9).upper - 1.0)));
    CHECK(code_of([] { (void)normal_ci(0.0, 1.0, 1.0); }) == ErrorCode::BadLevel);
    CHECK(code_of([] { (void)normal_ci(0.0, 0.0, 0.9); }) == ErrorCode::ZeroVariance);
}

TEST_CASE("exact test matches a direct resampling loop") {
    const auto d = validate_design(20, {1, 4, 7, 9, 12, 15, 17});
    const auto y = TabulatedOracle::random(20, 2, 3.0, 6);
    const auto data = simulated(d, *y, 2, 11);
    const ExactTestConfig config{3000, 77, 0};
    const auto r = exact_test(data, config);

    const double obs = std::abs(ht_estimator(data));
    const HtWeights weights(d, 2);
    double scale = 0.0;
    for (Period t = 3; t <= 20; ++t) scale += std::abs(data.observed[static_cast<std::size_t>(t - 1)]) * weights.inverse_propensity(t);
    const double tol = 1e-12 * scale / 18;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < config.resamples; ++i) {
        CounterRng rng(config.seed, static_cast<std::uint64_t>(i));
        const auto w = sample_path(d, rng);
        const double v = std::abs(ht_estimator(ExperimentData::make(d, 2, w, data.observed)));
        if (v > obs + tol) ++count;
    }
    CHECK(r.p_value == doctest::Approx(static_cast<double>(count) / static_cast<double>(config.resamples)));
    CHECK(r.method == TestMethod::Exact);
    CHECK(r.resamples == 3000);
    CHECK(r.seed == 77);
    CHECK(r.statistic == doctest::Approx(ht_estimator(data)));

    for (int threads : {1, 2, 5}) CHECK(exact_test(data, ExactTestConfig{3000, 77, threads}).p_value == r.p_value);
}

TEST_CASE("exact test returns zero when the observed statistic is extreme") {
    // Positive outcomes on the all-ones path: every resample either ties
    // (the all-zeros path) or mixes arms and scores lower.
    const auto d = validate_design(12, {1, 5, 7, 9});
    const auto data = ExperimentData::make(d, 2, AssignmentPath(std::vector<std::uint8_t>(12, 1)), std::vector<double>(12, 1.0));
    CHECK(exact_test(data, ExactTestConfig{2000, 1, 0}).p_value == 0.0);
}

TEST_CASE("exact test is roughly valid under the sharp null") {
    // Path-invariant outcomes: the sharp null holds by construction.
    const auto d = optimal_design(60, 2);
    const int experiments = 400;
    int rejections = 0;
    for (int e = 0; e < experiments; ++e) {
        LinearCarryoverModel model;
        model.deltas = {0.0};
        model.noise_seed = derive_seed(99, static_cast<std::uint64_t>(e));
        const auto y = model.build(60);
        const auto data = simulated(d, *y, 2, derive_seed(7, static_cast<std::uint64_t>(e)));
        if (exact_test(data, ExactTestConfig{500, static_cast<std::uint64_t>(e), 1}).p_value < 0.1) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / experiments;
    // Binomial sd at 400 draws is 0.015.
    CHECK(rate > 0.05);
    CHECK(rate < 0.15);
}

TEST_CASE("exact confidence intervals") {
    const auto d = optimal_design(40, 2);
    LinearCarryoverModel model;
    model.deltas = {0.0};
    model.noise_seed = 3;
    const auto y = model.build(40);
    const auto data = simulated(d, *y, 2, 0);
    const ExactTestConfig config{2000, 8, 0};

    const std::vector<double> zero{0.0};
    CHECK(exact_shift_p_values(data, config, zero).front() == doctest::Approx(exact_test(data, config).p_value));

    std::vector<double> grid;
    for (int i = -200; i <= 200; ++i) grid.push_back(0.1 * i);
    const auto ci = exact_ci(data, config, 0.9, grid);
    CHECK(ci.contains(0.0) == (exact_test(data, config).p_value >= 0.1));
    CHECK(ci.contains(ht_estimator(data)));

    std::vector<double> wider;
    for (int i = -400; i <= 400; ++i) wider.push_back(0.1 * i);
    const auto ci2 = exact_ci(data, config, 0.9, wider);
    CHECK(ci2.lower <= ci.lower);
    CHECK(ci2.upper >= ci.upper);

    CHECK(code_of([&] { (void)exact_ci(data, config, 0.9, std::vector<double>{}); }) == ErrorCode::EmptyGrid);
    CHECK(code_of([&] { (void)exact_ci(data, config, 1.5, grid); }) == ErrorCode::BadLevel);
    CHECK(code_of([&] { (void)exact_ci(data, config, 0.9, std::vector<double>{1e6}); }) == ErrorCode::NoPointAccepted);
}

TEST_CASE("exact CI covers zero under the sharp null") {
    const auto d = optimal_design(40, 2);
    const std::vector<double> grid{-0.5, 0.0, 0.5};
    int covered = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        LinearCarryoverModel model;
        model.deltas = {0.0};
        model.noise_seed = derive_seed(21, s);
        const auto y = model.build(40);
        const auto data = simulated(d, *y, 2, s);
        const auto p = exact_shift_p_values(data, ExactTestConfig{400, s, 1}, grid);
        if (p[1] >= 0.1) ++covered;
    }
    // Nominal coverage 0.9; binomial sd at 200 draws is about 0.02.
    CHECK(covered >= 168);
}

TEST_CASE("exact CI covers the estimate on random instances") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = optimal_design(24, 2);
        const auto y = TabulatedOracle::random(24, 2, 1.0, rng());
        const auto data = simulated(d, *y, 2, rng());
        const double est = ht_estimator(data);
        std::vector<double> grid;
        for (int i = -100; i <= 100; ++i) grid.push_back(est + 0.05 * i);
        const auto ci = exact_ci(data, ExactTestConfig{500, rng(), 0}, 0.9, grid);
        CHECK(ci.contains(est));
    }
}

TEST_CASE("analysis report") {
    const auto d = optimal_design(24, 2);
    const auto y = TabulatedOracle::random(24, 2, 1.0, 2);
    const auto data = simulated(d, *y, 2, 3);
    const auto report = analyze_experiment(data, ExactTestConfig{500, 1, 0}, 0.9);
    CHECK(report.tau_hat == ht_estimator(data));
    CHECK(report.tau_hat_total == doctest::Approx(22 * report.tau_hat));
    REQUIRE(report.sigma2.has_value());
    REQUIRE(report.asymptotic.has_value());
    REQUIRE(report.exact.has_value());
    REQUIRE(report.normal_interval.has_value());
    CHECK(report.asymptotic->p_value == doctest::Approx(asymptotic_test(report.tau_hat, report.sigma2->u2).p_value));

    const auto other = ExperimentData::make(validate_design(24, {1, 3, 9, 20}), 2, AssignmentPath(std::vector<std::uint8_t>(24, 1)),
                                            std::vector<double>(24, 1.0));
    const auto partial = analyze_experiment(other, std::nullopt);
    CHECK_FALSE(partial.sigma2.has_value());
    CHECK_FALSE(partial.asymptotic.has_value());
    CHECK_FALSE(partial.exact.has_value());
}

TEST_CASE("order identification subroutine") {
    const auto a = identify_m_subroutine({7.25, 23.88, 2, 0}, {8.23, 39.00, 3, 0});
    CHECK(std::abs(a.p_value - 0.902) < 0.001);
    const auto b = identify_m_subroutine({1.86, 9.47, 1, 0}, {7.25, 23.88, 2, 0});
    CHECK(std::abs(b.p_value - 0.350) < 0.001);
    CHECK(identify_m_subroutine({2.0, 1.0, 1, 0}, {2.0, 1.0, 2, 0}).p_value == 1.0);
    CHECK(code_of([] { (void)identify_m_subroutine({1, 1, 2, 0}, {1, 1, 2, 0}); }) == ErrorCode::OrderNotIncreasing);
    CHECK(code_of([] { (void)identify_m_subroutine({1, 0, 1, 0}, {2, 0, 2, 0}); }) == ErrorCode::ZeroVariance);
}

TEST_CASE("order identification search") {
    const std::vector<int> candidates{1, 2, 3};

    std::map<int, int> calls;
    const ExperimentRunner fixed = [&](int p) {
        ++calls[p];
        static const std::map<int, ExperimentSummary> table{
            {1, {1.86, 9.47, 1, 0}}, {2, {7.25, 23.88, 2, 0}}, {3, {8.23, 39.00, 3, 0}}};
        return table.at(p);
    };
    const auto r = identify_m_search(candidates, fixed, 0.4);
    CHECK(r.order == 2);
    REQUIRE(r.steps.size() == 2);
    CHECK(r.steps[0].lower == 2);
    CHECK_FALSE(r.steps[0].rejected);
    CHECK(r.steps[1].rejected);
    for (const auto& [p, c] : calls) CHECK(c == 1);

    CHECK(identify_m_search(candidates, fixed, 0.1).order == 1);

    const ExperimentRunner huge = [](int p) { return ExperimentSummary{p == 2 ? 100.0 : 0.0, 1.0, p, 0}; };
    CHECK(identify_m_search(std::vector<int>{1, 2}, huge, 0.05).order == 2);

    const ExperimentRunner broken = [](int) -> ExperimentSummary { throw std::runtime_error("lost"); };
    CHECK(code_of([&] { (void)identify_m_search(candidates, broken, 0.1); }) == ErrorCode::RunnerFailure);
    CHECK(code_of([&] { (void)identify_m_search(std::vector<int>{2}, fixed, 0.1); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([&] { (void)identify_m_search(candidates, fixed, 0.0); }) == ErrorCode::BadLevel);
}

TEST_CASE("order identification on simulated experiments") {
    const std::vector<int> candidates{1, 2, 3};
    const int seeds = 100;

    // True order 2 with a large carryover signal.
    const auto strong = simulation_model({4, 4, 4}, 1.0, 0);
    int correct = 0;
    for (int s = 0; s < seeds; ++s) {
        const ExperimentRunner run = [&](int p) { return run_once(strong, 4000, p, static_cast<std::uint64_t>(s)); };
        if (identify_m_search(candidates, run, 0.1).order == 2) ++correct;
    }
    CHECK(correct >= 80);

    // True order 1: the smallest candidate comes back unless a test rejects.
    const auto short_memory = simulation_model({2, 2}, 1.0, 0);
    int wrong = 0;
    for (int s = 0; s < 2 * seeds; ++s) {
        const ExperimentRunner run = [&](int p) { return run_once(short_memory, 100, p, static_cast<std::uint64_t>(s)); };
        if (identify_m_search(candidates, run, 0.1).order != 1) ++wrong;
    }
    CHECK(static_cast<double>(wrong) / (2 * seeds) <= 0.13);
}
