#include "switchback/outcomes.hpp"

#include "switchback/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace switchback {

namespace {

std::span<const std::uint8_t> trailing(std::span<const std::uint8_t> window, int length) {
    return window.last(static_cast<std::size_t>(length));
}

// Observed w_s..w_{g-1} followed by t - g + 1 copies of `arm`.
std::vector<std::uint8_t> padded_window(const AssignmentPath& path, Period s, Period g, Period t,
                                        std::uint8_t arm) {
    std::vector<std::uint8_t> w;
    w.reserve(static_cast<std::size_t>(t - s + 1));
    for (Period i = s; i < g; ++i) w.push_back(static_cast<std::uint8_t>(path.at(i)));
    for (Period i = std::max(g, s); i <= t; ++i) w.push_back(arm);
    return w;
}

void check_order_range(const OutcomeOracle& oracle, int p) {
    if (p < 0 || p >= oracle.horizon()) {
        throw Error(ErrorCode::OutOfRange,
                    "order p=" + std::to_string(p) + " must lie in [0, T-1] for T=" +
                        std::to_string(oracle.horizon()));
    }
}

void check_path(const OutcomeOracle& oracle, const AssignmentPath& path) {
    if (path.horizon() != oracle.horizon()) {
        throw Error(ErrorCode::LengthMismatch, "path length " + std::to_string(path.horizon()) +
                                                   " != horizon " + std::to_string(oracle.horizon()));
    }
}

// Contrast at period t for the quantity the lag-p estimator targets, given
// the assignments before the determining point of t - p.
double conditional_contrast(const OutcomeOracle& oracle, const Design& design, int p, Period t,
                            const AssignmentPath& path) {
    const Period s = std::max(1, t - oracle.order());
    const Period g = determining_point(design, t - p);
    if (g <= s) return oracle.constant_value(t, 1) - oracle.constant_value(t, 0);
    return oracle.value(t, padded_window(path, s, g, t, 1)) - oracle.value(t, padded_window(path, s, g, t, 0));
}

}  // namespace

OutcomeOracle::OutcomeOracle(int horizon, int order, std::optional<double> bound)
    : horizon_(horizon), order_(order), bound_(bound) {
    if (horizon < 1) throw Error(ErrorCode::OutOfRange, "horizon must be positive");
    if (order < 0) throw Error(ErrorCode::OutOfRange, "order must be non-negative");
    if (bound && !(*bound > 0.0)) throw Error(ErrorCode::NonpositiveBound, "bound must be positive");
}

double OutcomeOracle::value(Period t, std::span<const std::uint8_t> window) const {
    if (t < 1 || t > horizon_) {
        throw Error(ErrorCode::PeriodOutOfRange, "period " + std::to_string(t) + " outside [1, " +
                                                     std::to_string(horizon_) + "]");
    }
    const int length = window_length(t);
    if (static_cast<int>(window.size()) < length) {
        throw Error(ErrorCode::MissingEntry, "period " + std::to_string(t) + " needs " +
                                                 std::to_string(length) + " trailing assignments, got " +
                                                 std::to_string(window.size()));
    }
    return lookup(t, trailing(window, length));
}

double OutcomeOracle::constant_value(Period t, std::uint8_t arm) const {
    const std::vector<std::uint8_t> w(static_cast<std::size_t>(window_length(t)), arm);
    return value(t, w);
}

TabulatedOracle::TabulatedOracle(int horizon, int order, std::vector<std::vector<double>> table,
                                 std::optional<double> bound)
    : OutcomeOracle(horizon, order, bound), table_(std::move(table)) {
    if (order > 30) throw Error(ErrorCode::TooManyCoins, "tabulated oracle order above 30");
    if (static_cast<int>(table_.size()) != horizon) {
        throw Error(ErrorCode::MissingEntry, "table must have one row per period");
    }
    for (Period t = 1; t <= horizon; ++t) {
        const auto& row = table_[static_cast<std::size_t>(t - 1)];
        if (row.size() != (std::size_t{1} << window_length(t))) {
            throw Error(ErrorCode::MissingEntry, "row for period " + std::to_string(t) + " has " +
                                                     std::to_string(row.size()) + " entries");
        }
        if (bound) {
            for (double v : row) {
                if (std::abs(v) > *bound) {
                    throw Error(ErrorCode::PreconditionViolated, "entry exceeds declared bound");
                }
            }
        }
    }
}

std::shared_ptr<TabulatedOracle> TabulatedOracle::random(int horizon, int order, double bound,
                                                         std::uint64_t seed) {
    if (!(bound > 0.0)) throw Error(ErrorCode::NonpositiveBound, "bound must be positive");
    CounterRng rng(seed);
    std::vector<std::vector<double>> table(static_cast<std::size_t>(horizon));
    for (Period t = 1; t <= horizon; ++t) {
        const int length = std::min(t, order + 1);
        auto& row = table[static_cast<std::size_t>(t - 1)];
        row.resize(std::size_t{1} << length);
        for (double& v : row) v = bound * (2.0 * rng.uniform() - 1.0);
    }
    return std::make_shared<TabulatedOracle>(horizon, order, std::move(table), bound);
}

std::size_t TabulatedOracle::index_of(std::span<const std::uint8_t> window) noexcept {
    std::size_t idx = 0;
    for (auto w : window) idx = (idx << 1U) | (w & 1U);
    return idx;
}

double TabulatedOracle::lookup(Period t, std::span<const std::uint8_t> window) const {
    return table_[static_cast<std::size_t>(t - 1)][index_of(window)];
}

ConstantOracle::ConstantOracle(int horizon, int order, double value)
    : OutcomeOracle(horizon, order, value != 0.0 ? std::optional<double>(std::abs(value)) : std::nullopt),
      value_(value) {}

namespace {

int linear_order(const std::vector<std::vector<double>>& coefficients) {
    int order = 0;
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
        const auto& c = coefficients[i];
        const int usable = std::min(static_cast<int>(c.size()), static_cast<int>(i) + 1);
        for (int j = usable - 1; j > order; --j) {
            if (c[static_cast<std::size_t>(j)] != 0.0) {
                order = j;
                break;
            }
        }
    }
    return order;
}

}  // namespace

LinearOracle::LinearOracle(std::vector<double> intercepts, std::vector<std::vector<double>> coefficients)
    : OutcomeOracle(static_cast<int>(intercepts.size()), linear_order(coefficients)),
      intercepts_(std::move(intercepts)),
      coefficients_(std::move(coefficients)) {
    if (coefficients_.size() != intercepts_.size()) {
        throw Error(ErrorCode::LengthMismatch, "one coefficient row per period required");
    }
}

double LinearOracle::lookup(Period t, std::span<const std::uint8_t> window) const {
    const auto& c = coefficients_[static_cast<std::size_t>(t - 1)];
    double y = intercepts_[static_cast<std::size_t>(t - 1)];
    const std::size_t n = std::min(c.size(), window.size());
    for (std::size_t j = 0; j < n; ++j) {
        if (window[window.size() - 1 - j] != 0) y += c[j];
    }
    return y;
}

double AlphaSpec::at(Period t) const {
    if (log_t) return std::log(static_cast<double>(t));
    if (t < 1 || static_cast<std::size_t>(t) > values.size()) {
        throw Error(ErrorCode::MissingEntry, "alpha has no value for period " + std::to_string(t));
    }
    return values[static_cast<std::size_t>(t - 1)];
}

std::vector<double> draw_period_noise(int horizon, double sd, std::uint64_t seed) {
    if (sd < 0.0) throw Error(ErrorCode::ConfigInvalid, "noise_sd must be non-negative");
    std::vector<double> eps(static_cast<std::size_t>(horizon), 0.0);
    if (sd == 0.0) return eps;
    CounterRng rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    for (double& e : eps) e = normal(rng);
    return eps;
}

int LinearCarryoverModel::true_order() const noexcept {
    for (int j = static_cast<int>(deltas.size()) - 1; j > 0; --j) {
        if (deltas[static_cast<std::size_t>(j)] != 0.0) return j;
    }
    return 0;
}

std::shared_ptr<LinearOracle> LinearCarryoverModel::build(int horizon) const {
    if (horizon < 1) throw Error(ErrorCode::OutOfRange, "horizon must be positive");
    const auto eps = draw_period_noise(horizon, noise_sd, noise_seed);
    const std::size_t lags = static_cast<std::size_t>(true_order()) + 1;
    std::vector<double> coef(deltas.begin(), deltas.begin() + static_cast<std::ptrdiff_t>(std::min(lags, deltas.size())));
    std::vector<double> intercepts(static_cast<std::size_t>(horizon));
    std::vector<std::vector<double>> coefficients(static_cast<std::size_t>(horizon));
    for (Period t = 1; t <= horizon; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        intercepts[i] = mu + alpha.at(t) + eps[i];
        coefficients[i].assign(coef.begin(), coef.begin() + static_cast<std::ptrdiff_t>(std::min(coef.size(), i + 1)));
    }
    return std::make_shared<LinearOracle>(std::move(intercepts), std::move(coefficients));
}

std::shared_ptr<LinearOracle> AutoregressiveModel::build(int horizon) const {
    if (horizon < 1) throw Error(ErrorCode::OutOfRange, "horizon must be positive");
    if (truncation && *truncation < 0) throw Error(ErrorCode::ConfigInvalid, "truncation must be non-negative");
    const auto eps = draw_period_noise(horizon, noise_sd, noise_seed);
    const auto T = static_cast<std::size_t>(horizon);
    const std::size_t keep = truncation ? std::min<std::size_t>(static_cast<std::size_t>(*truncation) + 1, T) : T;

    // Y_t = c_t + sum_j b_{t,j} w_{t-j}; the recursion runs on the full
    // expansion and truncation only trims the stored coefficients.
    std::vector<double> c(T, 0.0);
    std::vector<std::vector<double>> b(T);
    for (std::size_t i = 0; i < T; ++i) {
        c[i] = eps[i];
        b[i].assign(i + 1, 0.0);
        for (std::size_t j = 0; j < std::min(deltas.size(), i + 1); ++j) b[i][j] = deltas[j];
        for (std::size_t lag = 1; lag <= std::min(phi.size(), i); ++lag) {
            const double f = phi[lag - 1];
            if (f == 0.0) continue;
            c[i] += f * c[i - lag];
            const auto& prev = b[i - lag];
            for (std::size_t j = 0; j < prev.size(); ++j) b[i][j + lag] += f * prev[j];
        }
    }
    for (auto& row : b) {
        if (row.size() > keep) row.resize(keep);
    }
    return std::make_shared<LinearOracle>(std::move(c), std::move(b));
}

std::vector<double> realize_observed(const OutcomeOracle& oracle, const AssignmentPath& path) {
    check_path(oracle, path);
    std::vector<double> y(static_cast<std::size_t>(oracle.horizon()));
    for (Period t = 1; t <= oracle.horizon(); ++t) y[static_cast<std::size_t>(t - 1)] = oracle.value(t, path.prefix(t));
    return y;
}

double lag_p_estimand(const OutcomeOracle& oracle, int p) {
    check_order_range(oracle, p);
    if (p < oracle.order()) {
        throw Error(ErrorCode::OrderTooSmall, "p=" + std::to_string(p) + " below true order m=" +
                                                  std::to_string(oracle.order()));
    }
    double sum = 0.0;
    for (Period t = p + 1; t <= oracle.horizon(); ++t) sum += oracle.constant_value(t, 1) - oracle.constant_value(t, 0);
    return sum / static_cast<double>(oracle.horizon() - p);
}

double lag_p_total_effect(const OutcomeOracle& oracle, int p) {
    return lag_p_estimand(oracle, p) * static_cast<double>(oracle.horizon() - p);
}

double misspecified_estimand(const OutcomeOracle& oracle, int p, const AssignmentPath& path) {
    check_order_range(oracle, p);
    check_path(oracle, path);
    const int m = oracle.order();
    if (p > m) {
        throw Error(ErrorCode::OrderNotUnderestimated, "p=" + std::to_string(p) + " exceeds true order m=" +
                                                           std::to_string(m));
    }
    double sum = 0.0;
    for (Period t = p + 1; t <= oracle.horizon(); ++t) {
        const Period s = std::max(1, t - m);
        const Period g = t - p;
        sum += oracle.value(t, padded_window(path, s, g, t, 1)) - oracle.value(t, padded_window(path, s, g, t, 0));
    }
    return sum / static_cast<double>(oracle.horizon() - p);
}

double conditional_estimand(const OutcomeOracle& oracle, const Design& design, int p, const AssignmentPath& path) {
    check_order_range(oracle, p);
    check_path(oracle, path);
    if (design.horizon() != oracle.horizon()) throw Error(ErrorCode::LengthMismatch, "design and oracle horizons differ");
    double sum = 0.0;
    for (Period t = p + 1; t <= oracle.horizon(); ++t) sum += conditional_contrast(oracle, design, p, t, path);
    return sum / static_cast<double>(oracle.horizon() - p);
}

double expected_estimand(const OutcomeOracle& oracle, const Design& design, int p) {
    check_order_range(oracle, p);
    if (design.horizon() != oracle.horizon()) throw Error(ErrorCode::LengthMismatch, "design and oracle horizons differ");
    const int m = oracle.order();
    double sum = 0.0;
    std::vector<std::uint8_t> w(static_cast<std::size_t>(oracle.horizon()), 0);
    for (Period t = p + 1; t <= oracle.horizon(); ++t) {
        const Period s = std::max(1, t - m);
        const Period g = determining_point(design, t - p);
        if (g <= s) {
            sum += oracle.constant_value(t, 1) - oracle.constant_value(t, 0);
            continue;
        }
        // Coins that fix w_s..w_{g-1}: epochs from f(s) up to the one before g.
        const int first = design.epoch_index(s);
        const int last = design.epoch_index(g - 1);
        const int n = last - first + 1;
        const std::uint64_t count = std::uint64_t{1} << n;
        double acc = 0.0;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            for (Period i = s; i < g; ++i) {
                const int k = design.epoch_index(i) - first;
                w[static_cast<std::size_t>(i - 1)] = static_cast<std::uint8_t>((mask >> k) & 1U);
            }
            const AssignmentPath local(w);
            acc += oracle.value(t, padded_window(local, s, g, t, 1)) - oracle.value(t, padded_window(local, s, g, t, 0));
        }
        sum += acc / static_cast<double>(count);
    }
    return sum / static_cast<double>(oracle.horizon() - p);
}

std::shared_ptr<ConstantOracle> worst_case_outcomes(int horizon, int order, double bound, Sign sign) {
    if (!(bound > 0.0)) throw Error(ErrorCode::NonpositiveBound, "B must be positive");
    return std::make_shared<ConstantOracle>(horizon, order, sign == Sign::Plus ? bound : -bound);
}

}  // namespace switchback
