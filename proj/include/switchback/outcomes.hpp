#pragma once

#include "switchback/design.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace switchback {

/// Fixed potential outcomes Y_t(.) for t = 1..T under non-anticipation and
/// no carryover beyond `order()` periods: Y_t depends on w only through the
/// trailing window w_{max(1, t-m):t}. Implementations are immutable.
class OutcomeOracle {
public:
    OutcomeOracle(int horizon, int order, std::optional<double> bound = std::nullopt);
    virtual ~OutcomeOracle() = default;

    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    /// True carryover order m.
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] std::optional<double> bound() const noexcept { return bound_; }

    /// Number of trailing assignments that determine Y_t: min(t, m + 1).
    [[nodiscard]] int window_length(Period t) const noexcept { return t < order_ + 1 ? t : order_ + 1; }

    /// Y_t given assignments ending at period t (window.back() is w_t). Longer
    /// histories are accepted and truncated; shorter ones throw MissingEntry.
    [[nodiscard]] double value(Period t, std::span<const std::uint8_t> window) const;

    /// Y_t(1_L) or Y_t(0_L) with L = window_length(t).
    [[nodiscard]] double constant_value(Period t, std::uint8_t arm) const;

protected:
    /// `window.size() == window_length(t)` is guaranteed.
    virtual double lookup(Period t, std::span<const std::uint8_t> window) const = 0;

private:
    int horizon_;
    int order_;
    std::optional<double> bound_;
};

using OraclePtr = std::shared_ptr<const OutcomeOracle>;

/// Explicit table: one value per (t, binary window of length min(t, m+1)).
/// Windows index the table oldest-assignment-first as a big-endian bit string.
class TabulatedOracle final : public OutcomeOracle {
public:
    TabulatedOracle(int horizon, int order, std::vector<std::vector<double>> table,
                    std::optional<double> bound = std::nullopt);

    /// Every entry uniform on [-bound, bound].
    static std::shared_ptr<TabulatedOracle> random(int horizon, int order, double bound, std::uint64_t seed);

    static std::size_t index_of(std::span<const std::uint8_t> window) noexcept;

protected:
    double lookup(Period t, std::span<const std::uint8_t> window) const override;

private:
    std::vector<std::vector<double>> table_;
};

/// Every potential outcome equals sign * bound.
class ConstantOracle final : public OutcomeOracle {
public:
    ConstantOracle(int horizon, int order, double value);

protected:
    double lookup(Period, std::span<const std::uint8_t>) const override { return value_; }

private:
    double value_;
};

/// Y_t = intercept_t + sum_j coef_{t,j} * w_{t-j}, j = 0..min(t-1, m).
class LinearOracle final : public OutcomeOracle {
public:
    LinearOracle(std::vector<double> intercepts, std::vector<std::vector<double>> coefficients);

    [[nodiscard]] double intercept(Period t) const { return intercepts_[static_cast<std::size_t>(t - 1)]; }
    [[nodiscard]] const std::vector<double>& coefficients(Period t) const {
        return coefficients_[static_cast<std::size_t>(t - 1)];
    }

protected:
    double lookup(Period t, std::span<const std::uint8_t> window) const override;

private:
    std::vector<double> intercepts_;
    std::vector<std::vector<double>> coefficients_;
};

/// Alpha_t either log(t) or an explicit per-period list.
struct AlphaSpec {
    bool log_t = true;
    std::vector<double> values;

    [[nodiscard]] double at(Period t) const;
};

/// Y_t = mu + alpha_t + delta_1 w_t + delta_2 w_{t-1} + ... + eps_t, with
/// eps_t ~ N(0, noise_sd^2) drawn once per period from `noise_seed`.
struct LinearCarryoverModel {
    double mu = 0.0;
    AlphaSpec alpha;
    std::vector<double> deltas;
    double noise_sd = 1.0;
    std::uint64_t noise_seed = 0;

    /// m = index of the last nonzero lag coefficient (0 when there is none).
    [[nodiscard]] int true_order() const noexcept;
    [[nodiscard]] std::shared_ptr<LinearOracle> build(int horizon) const;
};

/// Y_1 = delta_1 w_1 + eps_1 and Y_t = sum_j phi_j Y_{t-j} + sum_j delta_{j+1} w_{t-j} + eps_t.
/// Coefficients are lag-indexed and time-invariant (phi[0] multiplies Y_{t-1}).
/// The recursion is unrolled into LinearOracle form; lags beyond `truncation`
/// are dropped (no truncation when unset).
struct AutoregressiveModel {
    std::vector<double> phi;
    std::vector<double> deltas;
    double noise_sd = 1.0;
    std::uint64_t noise_seed = 0;
    std::optional<int> truncation;

    [[nodiscard]] std::shared_ptr<LinearOracle> build(int horizon) const;
};

/// i.i.d. N(0, sd^2) draws for t = 1..T, one per period.
std::vector<double> draw_period_noise(int horizon, double sd, std::uint64_t seed);

/// Y_t^obs = Y_t(w_{1:t}) for t = 1..T (index t-1).
std::vector<double> realize_observed(const OutcomeOracle& oracle, const AssignmentPath& path);

/// (1/(T-p)) sum_{t=p+1}^T [Y_t(1_{p+1}) - Y_t(0_{p+1})]. Throws OrderTooSmall when p < m.
double lag_p_estimand(const OutcomeOracle& oracle, int p);
/// (T-p) * lag_p_estimand.
double lag_p_total_effect(const OutcomeOracle& oracle, int p);

/// m-misspecified lag-p effect for p <= m: each contrast pads the p+1
/// consecutive arms with the observed assignments w^obs_{max(1,t-m):t-p-1}.
/// Throws OrderNotUnderestimated when p > m.
double misspecified_estimand(const OutcomeOracle& oracle, int p, const AssignmentPath& path);

/// Per-path quantity the lag-p HT estimator is conditionally unbiased for,
/// for any p. With g = f(t-p) and s = max(1, t-m): the contrast at t is the
/// all-ones vs all-zeros window when g <= s, otherwise the observed w_{s:g-1}
/// followed by t-g+1 identical arms. Equals lag_p_estimand when p >= m and
/// agrees with misspecified_estimand whenever every f(t-p) = t-p.
double conditional_estimand(const OutcomeOracle& oracle, const Design& design, int p,
                            const AssignmentPath& path);

/// Design-average of conditional_estimand, computed per period over only the
/// coins that touch the window; equals E[tau_hat_p] for every p.
double expected_estimand(const OutcomeOracle& oracle, const Design& design, int p);

enum class Sign { Plus, Minus };

/// Y^+ or Y^-: every potential outcome equal to +bound or -bound.
std::shared_ptr<ConstantOracle> worst_case_outcomes(int horizon, int order, double bound, Sign sign);

}  // namespace switchback
