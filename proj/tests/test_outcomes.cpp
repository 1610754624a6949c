#include "test_support.hpp"

#include "switchback/estimation.hpp"
#include "switchback/study.hpp"

#include <cmath>

using namespace switchback;
using testing::code_of;

namespace {

// Lag-p contrast with the prefix w_{1:t-p-1} taken from `w`.
double padded_contrast(const OutcomeOracle& y, const AssignmentPath& w, Period t, int p) {
    std::vector<std::uint8_t> ones(w.values().begin(), w.values().begin() + t);
    std::vector<std::uint8_t> zeros = ones;
    for (Period i = t - p; i <= t; ++i) {
        ones[static_cast<std::size_t>(i - 1)] = 1;
        zeros[static_cast<std::size_t>(i - 1)] = 0;
    }
    return y.value(t, ones) - y.value(t, zeros);
}

double brute_misspecified(const OutcomeOracle& y, int p, const AssignmentPath& w) {
    const int T = y.horizon();
    double s = 0.0;
    for (Period t = p + 1; t <= T; ++t) s += padded_contrast(y, w, t, p);
    return s / (T - p);
}

}  // namespace

TEST_CASE("oracle lookups use only the trailing window") {
    const auto y = TabulatedOracle::random(8, 2, 1.0, 3);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> a(8);
        std::vector<std::uint8_t> b(8);
        for (auto& v : a) v = static_cast<std::uint8_t>(rng() & 1U);
        for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1U);
        for (Period t = 1; t <= 8; ++t) {
            const int L = y->window_length(t);
            for (int j = 0; j < L; ++j) b[static_cast<std::size_t>(t - 1 - j)] = a[static_cast<std::size_t>(t - 1 - j)];
            CHECK(y->value(t, std::span(a).first(static_cast<std::size_t>(t))) ==
                  y->value(t, std::span(b).first(static_cast<std::size_t>(t))));
            CHECK(std::abs(y->value(t, std::span(a).first(static_cast<std::size_t>(t)))) <= 1.0);
        }
    }
    const std::vector<std::uint8_t> short_window{1};
    CHECK(code_of([&] { (void)y->value(5, short_window); }) == ErrorCode::MissingEntry);
    CHECK(code_of([&] { (void)y->value(9, short_window); }) == ErrorCode::PeriodOutOfRange);
}

TEST_CASE("tabulated oracle indexing is oldest-first big-endian") {
    std::vector<std::vector<double>> table{{10, 11}, {20, 21, 22, 23}, {30, 31, 32, 33}};
    const TabulatedOracle y(3, 1, table);
    const std::vector<std::uint8_t> w{0, 1, 0};
    CHECK(y.value(1, std::span(w).first(1)) == 10);
    CHECK(y.value(2, std::span(w).first(2)) == 21);
    CHECK(y.value(3, w) == 32);
    CHECK(y.constant_value(3, 1) == 33);
    CHECK(y.constant_value(1, 0) == 10);
}

TEST_CASE("realize_observed") {
    const auto plus = worst_case_outcomes(6, 2, 10.0, Sign::Plus);
    for (double v : realize_observed(*plus, AssignmentPath::parse("100110"))) CHECK(v == 10.0);

    // T=4, m=1: Y^obs_2 = Y_2(1,1) and Y^obs_4 = Y_4(0,0).
    const auto y = TabulatedOracle::random(4, 1, 1.0, 9);
    const auto obs = realize_observed(*y, AssignmentPath::parse("1100"));
    const std::vector<std::uint8_t> ones{1, 1};
    const std::vector<std::uint8_t> zeros{0, 0};
    CHECK(obs[1] == y->value(2, ones));
    CHECK(obs[3] == y->value(4, zeros));

    LinearCarryoverModel model;
    model.deltas = {1, 1, 1};
    model.noise_sd = 0.0;
    const auto lin = model.build(10);
    const auto all_ones = realize_observed(*lin, AssignmentPath(std::vector<std::uint8_t>(10, 1)));
    for (Period t = 1; t <= 10; ++t) {
        CHECK(all_ones[static_cast<std::size_t>(t - 1)] == doctest::Approx(std::log(t) + std::min(t, 3)).epsilon(1e-12));
    }
}

TEST_CASE("lag_p_estimand") {
    const auto model = simulation_model({1, 1, 1}, 1.0, 2);
    const auto y = model.build(120);
    CHECK(y->order() == 2);
    CHECK(lag_p_estimand(*y, 2) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(lag_p_total_effect(*y, 2) == doctest::Approx(3.0 * 118).epsilon(1e-12));
    CHECK(lag_p_estimand(*y, 3) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(code_of([&] { (void)lag_p_estimand(*y, 1); }) == ErrorCode::OrderTooSmall);

    CHECK(lag_p_estimand(ConstantOracle(8, 1, 0.0), 1) == 0.0);
    CHECK(lag_p_estimand(*worst_case_outcomes(8, 2, 3.0, Sign::Minus), 2) == 0.0);
}

TEST_CASE("linear model effect is the sum of lag coefficients") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        LinearCarryoverModel model;
        model.mu = u(rng);
        model.alpha.log_t = false;
        for (int t = 0; t < 15; ++t) model.alpha.values.push_back(u(rng));
        model.deltas = {u(rng), u(rng), u(rng)};
        model.noise_sd = 0.0;
        const auto y = model.build(15);
        CHECK(lag_p_estimand(*y, 2) == doctest::Approx(model.deltas[0] + model.deltas[1] + model.deltas[2]).epsilon(1e-10));
        CHECK(lag_p_estimand(*y, 4) == doctest::Approx(model.deltas[0] + model.deltas[1] + model.deltas[2]).epsilon(1e-10));
    }
}

TEST_CASE("true order of the linear model") {
    LinearCarryoverModel model;
    model.deltas = {1, 0, 2, 0};
    CHECK(model.true_order() == 2);
    model.deltas = {1};
    CHECK(model.true_order() == 0);
    model.deltas = {};
    CHECK(model.true_order() == 0);
}

TEST_CASE("noise is drawn once per period") {
    const auto a = draw_period_noise(50, 1.0, 4);
    CHECK(a == draw_period_noise(50, 1.0, 4));
    CHECK(a != draw_period_noise(50, 1.0, 5));
    for (double v : draw_period_noise(5, 0.0, 4)) CHECK(v == 0.0);

    const auto model = simulation_model({1, 1, 1}, 1.0, 4);
    const auto y = model.build(50);
    for (Period t = 3; t <= 50; ++t) {
        // Every window at t shares the same eps_t, so the all-zeros value is
        // log t + eps_t.
        CHECK(y->constant_value(t, 0) == doctest::Approx(std::log(t) + a[static_cast<std::size_t>(t - 1)]).epsilon(1e-12));
    }
}

TEST_CASE("autoregressive unrolling matches the recursion") {
    AutoregressiveModel model;
    model.phi = {0.5, -0.2};
    model.deltas = {1.0, 0.3};
    model.noise_sd = 1.0;
    model.noise_seed = 8;
    const int T = 10;
    const auto y = model.build(T);
    const auto eps = draw_period_noise(T, 1.0, 8);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> w(T);
        for (auto& v : w) v = static_cast<std::uint8_t>(rng() & 1U);
        std::vector<double> direct(T);
        for (int i = 0; i < T; ++i) {
            double v = eps[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < model.deltas.size() && static_cast<int>(j) <= i; ++j) v += model.deltas[j] * w[static_cast<std::size_t>(i) - j];
            for (std::size_t l = 1; l <= model.phi.size() && static_cast<int>(l) <= i; ++l) v += model.phi[l - 1] * direct[static_cast<std::size_t>(i) - l];
            direct[static_cast<std::size_t>(i)] = v;
        }
        for (Period t = 1; t <= T; ++t) {
            CHECK(y->value(t, std::span(w).first(static_cast<std::size_t>(t))) ==
                  doctest::Approx(direct[static_cast<std::size_t>(t - 1)]).epsilon(1e-12));
        }
    }

    model.truncation = 2;
    CHECK(model.build(T)->order() <= 2);
}

TEST_CASE("misspecified estimand") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const int T = 4 + static_cast<int>(rng() % 6);
        const int m = 1 + static_cast<int>(rng() % 3);
        const auto y = TabulatedOracle::random(T, m, 1.0, rng());
        std::vector<std::uint8_t> wv(static_cast<std::size_t>(T));
        for (auto& v : wv) v = static_cast<std::uint8_t>(rng() & 1U);
        const AssignmentPath w(wv);
        for (int p = 0; p <= std::min(m, T - 1); ++p) {
            CHECK(misspecified_estimand(*y, p, w) == doctest::Approx(brute_misspecified(*y, p, w)).epsilon(1e-12));
        }
        if (m < T) CHECK(misspecified_estimand(*y, m, w) == lag_p_estimand(*y, m));
        if (m + 1 < T) {
            CHECK(code_of([&] { (void)misspecified_estimand(*y, m + 1, w); }) == ErrorCode::OrderNotUnderestimated);
        }
    }

    // Underestimated order in the simulation model: each contrast picks up
    // delta_1 + delta_2 whatever the padding.
    const auto y = simulation_model({1, 1, 1}, 1.0, 2).build(120);
    const auto d = validate_design(120, testing::all_periods(120));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CHECK(misspecified_estimand(*y, 1, sample_path(d, seed)) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("conditional and expected estimands") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const int T = 3 + static_cast<int>(rng() % 8);
        const int m = static_cast<int>(rng() % 3);
        const auto pts = ref::random_points(rng, T, 0.5);
        const auto d = validate_design(T, pts);
        const auto y = TabulatedOracle::random(T, m, 1.0, rng());
        for (int p = 0; p < T; ++p) {
            double avg = 0.0;
            for (const auto& wp : enumerate_paths(d)) {
                const double c = conditional_estimand(*y, d, p, wp.path);
                avg += wp.probability * c;
                if (p >= m) CHECK(c == doctest::Approx(lag_p_estimand(*y, p)).epsilon(1e-12));
            }
            CHECK(expected_estimand(*y, d, p) == doctest::Approx(avg).epsilon(1e-12));
        }
    }

    // On the every-period design each f(t-p) = t-p, so the conditional
    // estimand is the literal misspecified one.
    for (int trial = 0; trial < 30; ++trial) {
        const int T = 4 + static_cast<int>(rng() % 5);
        const int m = 1 + static_cast<int>(rng() % 2);
        const auto d = validate_design(T, testing::all_periods(T));
        const auto y = TabulatedOracle::random(T, m, 1.0, rng());
        for (const auto& wp : enumerate_paths(d)) {
            for (int p = 0; p <= m; ++p) {
                CHECK(conditional_estimand(*y, d, p, wp.path) ==
                      doctest::Approx(misspecified_estimand(*y, p, wp.path)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("expected estimand on a two-epoch design") {
    // T=4, m=2, p=1, points {1,3}: only Y_4 is nonzero, so the expected
    // estimand is (1/3)(1/2)[Y_4(111) + Y_4(011) - Y_4(000) - Y_4(100)].
    std::vector<std::vector<double>> table{{0, 0}, {0, 0, 0, 0}, std::vector<double>(8, 0.0), {}};
    table[3] = {0.3, -1.2, 0.7, 2.5, 1.1, -0.4, 0.9, 1.9};
    const TabulatedOracle y(4, 2, table);
    const auto d = validate_design(4, {1, 3});
    const double expected = (1.0 / 3.0) * 0.5 * (table[3][7] + table[3][3] - table[3][0] - table[3][4]);
    CHECK(expected_estimand(y, d, 1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("worst-case outcomes") {
    const auto y = worst_case_outcomes(4, 1, 1.0, Sign::Plus);
    const std::vector<std::uint8_t> w{0, 1, 1, 0};
    for (Period t = 1; t <= 4; ++t) CHECK(y->value(t, std::span(w).first(static_cast<std::size_t>(t))) == 1.0);
    CHECK(worst_case_outcomes(4, 1, 2.0, Sign::Minus)->constant_value(3, 1) == -2.0);
    CHECK(code_of([] { (void)worst_case_outcomes(4, 1, 0.0, Sign::Plus); }) == ErrorCode::NonpositiveBound);
}
