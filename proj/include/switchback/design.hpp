#pragma once

#include "switchback/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace switchback {

/// Periods are 1-indexed throughout: t = 1..T.
using Period = int;

/// Default cap on the number of coins an exhaustive enumeration may visit
/// (2^24 assignment paths).
inline constexpr int kDefaultCoinCap = 24;

/// Binary assignment vector w_1..w_T.
class AssignmentPath {
public:
    AssignmentPath() = default;
    explicit AssignmentPath(std::vector<std::uint8_t> values);

    /// Parses a string of '0'/'1' characters.
    static AssignmentPath parse(std::string_view bits);

    [[nodiscard]] int horizon() const noexcept { return static_cast<int>(values_.size()); }
    [[nodiscard]] int at(Period t) const { return values_[static_cast<std::size_t>(t - 1)]; }
    [[nodiscard]] std::span<const std::uint8_t> values() const noexcept { return values_; }
    /// w_1..w_t
    [[nodiscard]] std::span<const std::uint8_t> prefix(Period t) const noexcept {
        return std::span<const std::uint8_t>(values_).first(static_cast<std::size_t>(t));
    }
    [[nodiscard]] std::string to_string() const;

    bool operator==(const AssignmentPath&) const = default;

private:
    std::vector<std::uint8_t> values_;
};

/// One fair coin per randomization point, in point order.
struct RandomizationOutcome {
    std::vector<std::uint8_t> coins;
};

/// A regular switchback design: horizon T and randomization points
/// 1 = t_0 < t_1 < ... < t_K <= T. Immutable once built.
class Design {
public:
    /// Throws Error{EmptyPoints, FirstPointNotOne, OutOfRange, NotStrictlyIncreasing}.
    static Design validate(int horizon, std::vector<Period> points);

    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] const std::vector<Period>& points() const noexcept { return points_; }
    /// Number of switches K; the design flips K + 1 coins.
    [[nodiscard]] int switches() const noexcept { return static_cast<int>(points_.size()) - 1; }
    [[nodiscard]] int coins() const noexcept { return static_cast<int>(points_.size()); }

    /// Index k of the epoch [t_k, t_{k+1} - 1] containing t. Unchecked.
    [[nodiscard]] int epoch_index(Period t) const noexcept {
        return epoch_of_[static_cast<std::size_t>(t - 1)];
    }
    [[nodiscard]] bool is_point(Period t) const noexcept {
        return points_[static_cast<std::size_t>(epoch_index(t))] == t;
    }

    bool operator==(const Design& other) const noexcept {
        return horizon_ == other.horizon_ && points_ == other.points_;
    }

private:
    Design(int horizon, std::vector<Period> points);

    int horizon_ = 0;
    std::vector<Period> points_;
    std::vector<int> epoch_of_;
};

inline Design validate_design(int horizon, std::vector<Period> points) {
    return Design::validate(horizon, std::move(points));
}

/// 1 / 2^{K+1} when the path is constant on every epoch, else 0.
double path_probability(const Design& design, const AssignmentPath& path);

/// True when the path has positive probability under the design.
bool is_feasible_path(const Design& design, const AssignmentPath& path);

AssignmentPath expand(const Design& design, const RandomizationOutcome& outcome);

/// Coin values read off a feasible path.
RandomizationOutcome coins_of(const Design& design, const AssignmentPath& path);

struct WeightedPath {
    AssignmentPath path;
    double probability;
};

/// All 2^{K+1} feasible paths. Throws TooManyCoins above `max_coins`.
std::vector<WeightedPath> enumerate_paths(const Design& design, int max_coins = kDefaultCoinCap);

/// Visits each feasible path without materializing the full list.
/// `visit(const AssignmentPath&, double probability)`.
template <class Visitor>
void for_each_path(const Design& design, Visitor&& visit, int max_coins = kDefaultCoinCap);

AssignmentPath sample_path(const Design& design, CounterRng& rng);
AssignmentPath sample_path(const Design& design, std::uint64_t seed);

/// Allocation-free variant for hot loops: writes the same path sample_path
/// would produce from `rng` into `w` (length T).
void sample_assignments(const Design& design, CounterRng& rng, std::span<std::uint8_t> w);

/// f(t) = max { j in points : j <= t }.
Period determining_point(const Design& design, Period t);

/// { f(i) : i in [t - p, t] }, sorted ascending. Throws WindowUnderflow when t - p < 1.
std::vector<Period> determining_window(const Design& design, Period t, int p);

/// Randomization points shared by the windows ending at t and t2.
std::vector<Period> overlap_points(const Design& design, Period t, Period t2, int p);

/// K >= 1, t_1 >= m + 2, t_K <= T - m, and t_{k+1} - t_{k-1} >= m for k in [K]
/// (with t_{K+1} = T + 1).
bool is_persistent(const Design& design, int m);

/// Design::points rendered as "{1,5,7,9}".
std::string to_string(const Design& design);

namespace detail {
void check_enumerable(const Design& design, int max_coins);
}

template <class Visitor>
void for_each_path(const Design& design, Visitor&& visit, int max_coins) {
    detail::check_enumerable(design, max_coins);
    const int n = design.coins();
    const std::uint64_t count = std::uint64_t{1} << n;
    const double probability = 1.0 / static_cast<double>(count);
    std::vector<std::uint8_t> w(static_cast<std::size_t>(design.horizon()));
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        for (Period t = 1; t <= design.horizon(); ++t) {
            const int k = design.epoch_index(t);
            w[static_cast<std::size_t>(t - 1)] = static_cast<std::uint8_t>((mask >> (n - 1 - k)) & 1U);
        }
        visit(AssignmentPath(w), probability);
    }
}

}  // namespace switchback
