#include "test_support.hpp"

#include "switchback/estimation.hpp"
#include "switchback/optimal_design.hpp"

using namespace switchback;
using testing::code_of;

namespace {

// Every persistent design on [1, T] for order m.
std::vector<std::vector<int>> persistent_designs(int T, int m) {
    std::vector<std::vector<int>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (T - 1)); ++mask) {
        std::vector<int> pts{1};
        for (int t = 2; t <= T; ++t) {
            if ((mask >> (t - 2)) & 1U) pts.push_back(t);
        }
        if (ref::persistent(T, pts, m)) out.push_back(pts);
    }
    return out;
}

}  // namespace

TEST_CASE("subset-selection objective examples") {
    CHECK(subset_selection_objective_exact(validate_design(12, {1, 5, 7, 9}), 2) == 256);
    CHECK(subset_selection_objective(validate_design(8, {1, 5}), 2) == 128.0);
    for (int T = 2; T <= 10; ++T) {
        CHECK(subset_selection_objective_exact(validate_design(T, testing::all_periods(T)), 0) == 4 * T);
    }
}

TEST_CASE("worst-case risk closed form") {
    const auto r = worst_case_risk_closed_form(validate_design(12, {1, 5, 7, 9}), 2, 1.0);
    CHECK(r.risk == doctest::Approx(2.56).epsilon(1e-12));
    CHECK(r.total_risk() == doctest::Approx(256.0).epsilon(1e-12));
    CHECK(r.method == RiskMethod::ClosedForm);
    CHECK(worst_case_risk_closed_form(validate_design(8, {1, 5}), 2, 1.0).risk == doctest::Approx(128.0 / 36).epsilon(1e-12));
    CHECK(worst_case_risk_closed_form(validate_design(9, testing::all_periods(9)), 0, 1.0).risk ==
          doctest::Approx(4.0 / 9).epsilon(1e-12));
    CHECK(worst_case_risk_closed_form(validate_design(8, {1, 5}), 2, 3.0).risk ==
          doctest::Approx(9 * 128.0 / 36).epsilon(1e-12));
    CHECK(code_of([] { (void)worst_case_risk_closed_form(validate_design(12, testing::all_periods(12)), 2, 1.0); }) ==
          ErrorCode::NotPersistent);
    CHECK(code_of([] { (void)worst_case_risk_closed_form(validate_design(8, {1, 5}), 2, 0.0); }) ==
          ErrorCode::NonpositiveBound);
}

TEST_CASE("closed form equals enumeration for persistent designs") {
    for (int m = 1; m <= 3; ++m) {
        for (int T = 2 * m + 2; T <= 12; ++T) {
            for (const auto& pts : persistent_designs(T, m)) {
                const auto d = validate_design(T, pts);
                const double closed = worst_case_risk_closed_form(d, m, 1.0).risk;
                const double plus = risk_enumeration(d, *worst_case_outcomes(T, m, 1.0, Sign::Plus), m).risk;
                const double minus = risk_enumeration(d, *worst_case_outcomes(T, m, 1.0, Sign::Minus), m).risk;
                CHECK(std::abs(closed - plus) < 1e-9);
                CHECK(std::abs(closed - minus) < 1e-9);
                CHECK(subset_selection_objective_exact(d, m) == ref::objective(T, pts, m));
            }
        }
    }
}

TEST_CASE("risk enumeration basics") {
    const auto d = validate_design(12, {1, 5, 7, 9});
    CHECK(risk_enumeration(d, ConstantOracle(12, 2, 0.0), 2).risk == 0.0);
    CHECK(risk_enumeration(d, *worst_case_outcomes(12, 2, 1.0, Sign::Plus), 2).risk == doctest::Approx(2.56).epsilon(1e-12));
    CHECK(code_of([&] { (void)risk_enumeration(d, *TabulatedOracle::random(12, 3, 1.0, 1), 2); }) == ErrorCode::OrderMismatch);

    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const int T = 3 + static_cast<int>(rng() % 8);
        const auto pts = ref::random_points(rng, T, 0.5);
        const auto dd = validate_design(T, pts);
        const int m = static_cast<int>(rng() % 3);
        const auto y = TabulatedOracle::random(T, m, 1.0, rng());
        const auto e = risk_enumeration(dd, *y, m);
        const auto x = risk_exact(dd, *y, m);
        CHECK(std::abs(e.risk - x.risk) < 1e-12);
        CHECK(std::abs(e.bias) < 1e-12);
        CHECK(e.risk == doctest::Approx(ref::ht_moments(T, pts, m, testing::as_ref(*y)).var).epsilon(1e-10));
    }
}

TEST_CASE("worst-case outcomes dominate bounded oracles") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 2);
        const int T = 2 * m + 2 + static_cast<int>(rng() % (11 - 2 * m - 2));
        const auto designs = persistent_designs(T, m);
        const auto d = validate_design(T, designs[rng() % designs.size()]);
        const auto y = TabulatedOracle::random(T, m, 1.0, rng());
        const double worst = risk_enumeration(d, *worst_case_outcomes(T, m, 1.0, Sign::Plus), m).risk;
        CHECK(risk_enumeration(d, *y, m).risk < worst);
    }
}

TEST_CASE("Monte Carlo risk") {
    const auto d = validate_design(10, {1, 4, 6, 8});
    const auto y = TabulatedOracle::random(10, 2, 1.0, 5);
    const auto exact = risk_enumeration(d, *y, 2);
    const auto mc = risk_monte_carlo(d, *y, 2, 20000, 9);
    CHECK(std::abs(mc.risk - exact.risk) < 3 * mc.standard_error);
    CHECK(mc.replications == 20000);
    CHECK(mc.seed == 9);
    const auto again = risk_monte_carlo(d, *y, 2, 20000, 9);
    CHECK(again.risk == mc.risk);

    const auto one = risk_monte_carlo(d, *y, 2, 1, 4);
    CounterRng rng(4, 0);
    const auto path = sample_path(d, rng);
    const double loss = ht_estimator(ExperimentData::make(d, 2, path, realize_observed(*y, path))) - lag_p_estimand(*y, 2);
    CHECK(one.risk == doctest::Approx(loss * loss).epsilon(1e-12));
}

TEST_CASE("optimal design examples") {
    CHECK(optimal_design(12, 2).points() == std::vector<int>{1, 5, 7, 9});
    CHECK(optimal_design(12, 1).points() == std::vector<int>{1, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    CHECK(optimal_design(8, 2).points() == std::vector<int>{1, 5});
    for (int T = 2; T <= 12; ++T) CHECK(optimal_design(T, 0).points() == testing::all_periods(T));
    CHECK(optimal_design(120, 2).points().size() == 58);
    CHECK(optimal_design(120, 2).points()[1] == 5);
    CHECK(optimal_design(120, 2).points().back() == 117);
    CHECK(subset_selection_objective_exact(optimal_design(120, 2), 2) == 3712);
    CHECK(code_of([] { (void)optimal_design(5, 2); }) == ErrorCode::HorizonTooShort);

    CHECK(optimal_design_bruteforce(12, 2).points() == std::vector<int>{1, 5, 7, 9});
    CHECK(optimal_design_bruteforce(8, 2).points() == std::vector<int>{1, 5});
    CHECK(optimal_design_bruteforce(10, 0).points() == testing::all_periods(10));
    CHECK(code_of([] { (void)optimal_design_bruteforce(15, 2); }) == ErrorCode::HorizonTooLarge);
}

TEST_CASE("n-replica structure of the optimum") {
    for (int m = 1; m <= 4; ++m) {
        for (int n = 4; n * m <= 80; ++n) CHECK(is_n_replica(optimal_design(n * m, m), m));
    }
}

TEST_CASE("structured search matches brute force") {
    for (int m = 0; m <= 3; ++m) {
        for (int T = 2 * m + 2; T <= kBruteForceMaxHorizon; ++T) {
            const auto fast = optimal_design(T, m);
            const auto slow = optimal_design_bruteforce(T, m);
            CHECK(fast == slow);
            CHECK(is_persistent(fast, m));
            std::int64_t best = -1;
            for (const auto& pts : persistent_designs(T, m)) {
                const auto v = ref::objective(T, pts, m);
                if (best < 0 || v < best) best = v;
            }
            CHECK(subset_selection_objective_exact(fast, m) == best);
        }
    }
}

TEST_CASE("gap profile round trip") {
    const auto d = validate_design(12, {1, 5, 7, 9});
    const auto g = GapProfile::of(d);
    CHECK(g.K == 3);
    CHECK(g.a1 == 4);
    CHECK(g.a2 == 4);
    CHECK(g.interior == std::vector<int>{2, 2});
    CHECK(g.to_design(12) == d);
}

TEST_CASE("benchmark designs") {
    CHECK(every_period_design(5).points() == testing::all_periods(5));
    const auto h2 = fixed_epoch_design(120, 3);
    CHECK(h2.points().front() == 1);
    CHECK(h2.points()[1] == 4);
    CHECK(h2.points().back() == 118);
}
