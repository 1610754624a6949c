#include "switchback/design.hpp"

#include "switchback/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace switchback {

AssignmentPath::AssignmentPath(std::vector<std::uint8_t> values) : values_(std::move(values)) {
    for (auto& v : values_) {
        if (v > 1) throw Error(ErrorCode::ParseError, "assignments must be 0 or 1");
    }
}

AssignmentPath AssignmentPath::parse(std::string_view bits) {
    std::vector<std::uint8_t> values;
    values.reserve(bits.size());
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw Error(ErrorCode::ParseError, "assignment path must contain only '0' and '1'");
        }
        values.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return AssignmentPath(std::move(values));
}

std::string AssignmentPath::to_string() const {
    std::string out;
    out.reserve(values_.size());
    for (auto v : values_) out.push_back(static_cast<char>('0' + v));
    return out;
}

Design::Design(int horizon, std::vector<Period> points)
    : horizon_(horizon), points_(std::move(points)), epoch_of_(static_cast<std::size_t>(horizon)) {
    int k = 0;
    for (Period t = 1; t <= horizon_; ++t) {
        while (k + 1 < static_cast<int>(points_.size()) && points_[static_cast<std::size_t>(k + 1)] <= t) ++k;
        epoch_of_[static_cast<std::size_t>(t - 1)] = k;
    }
}

Design Design::validate(int horizon, std::vector<Period> points) {
    if (horizon < 1) throw Error(ErrorCode::OutOfRange, "horizon must be positive");
    if (points.empty()) throw Error(ErrorCode::EmptyPoints, "a design needs at least one randomization point");
    if (points.front() != 1) throw Error(ErrorCode::FirstPointNotOne, "the first randomization point must be period 1");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i] < 1 || points[i] > horizon) {
            throw Error(ErrorCode::OutOfRange,
                        "randomization point " + std::to_string(points[i]) + " outside [1, " +
                            std::to_string(horizon) + "]");
        }
        if (i > 0 && points[i] <= points[i - 1]) {
            throw Error(ErrorCode::NotStrictlyIncreasing, "randomization points must be strictly increasing");
        }
    }
    return Design(horizon, std::move(points));
}

bool is_feasible_path(const Design& design, const AssignmentPath& path) {
    if (path.horizon() != design.horizon()) {
        throw Error(ErrorCode::LengthMismatch, "path length " + std::to_string(path.horizon()) +
                                                   " does not match horizon " + std::to_string(design.horizon()));
    }
    for (Period t = 2; t <= design.horizon(); ++t) {
        if (!design.is_point(t) && path.at(t) != path.at(t - 1)) return false;
    }
    return true;
}

double path_probability(const Design& design, const AssignmentPath& path) {
    if (!is_feasible_path(design, path)) return 0.0;
    return std::ldexp(1.0, -design.coins());
}

AssignmentPath expand(const Design& design, const RandomizationOutcome& outcome) {
    if (static_cast<int>(outcome.coins.size()) != design.coins()) {
        throw Error(ErrorCode::LengthMismatch, "expected one coin per randomization point");
    }
    std::vector<std::uint8_t> w(static_cast<std::size_t>(design.horizon()));
    for (Period t = 1; t <= design.horizon(); ++t) {
        w[static_cast<std::size_t>(t - 1)] = outcome.coins[static_cast<std::size_t>(design.epoch_index(t))];
    }
    return AssignmentPath(std::move(w));
}

RandomizationOutcome coins_of(const Design& design, const AssignmentPath& path) {
    if (!is_feasible_path(design, path)) {
        throw Error(ErrorCode::InvalidPath, "path is not constant on every epoch of the design");
    }
    RandomizationOutcome out;
    out.coins.reserve(design.points().size());
    for (Period t : design.points()) out.coins.push_back(static_cast<std::uint8_t>(path.at(t)));
    return out;
}

namespace detail {
void check_enumerable(const Design& design, int max_coins) {
    if (design.coins() > max_coins || design.coins() > 62) {
        throw Error(ErrorCode::TooManyCoins, std::to_string(design.coins()) + " coins exceed the enumeration cap of " +
                                                 std::to_string(max_coins));
    }
}
}  // namespace detail

std::vector<WeightedPath> enumerate_paths(const Design& design, int max_coins) {
    std::vector<WeightedPath> out;
    detail::check_enumerable(design, max_coins);
    out.reserve(std::size_t{1} << design.coins());
    for_each_path(
        design, [&](const AssignmentPath& path, double probability) { out.push_back({path, probability}); },
        max_coins);
    return out;
}

AssignmentPath sample_path(const Design& design, CounterRng& rng) {
    RandomizationOutcome outcome;
    outcome.coins.resize(design.points().size());
    for (auto& c : outcome.coins) c = rng.coin() ? 1 : 0;
    return expand(design, outcome);
}

AssignmentPath sample_path(const Design& design, std::uint64_t seed) {
    CounterRng rng(seed);
    return sample_path(design, rng);
}

void sample_assignments(const Design& design, CounterRng& rng, std::span<std::uint8_t> w) {
    const auto& pts = design.points();
    const std::size_t n = pts.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto bit = static_cast<std::uint8_t>(rng.coin() ? 1 : 0);
        const auto begin = static_cast<std::size_t>(pts[k] - 1);
        const auto end = k + 1 < n ? static_cast<std::size_t>(pts[k + 1] - 1) : w.size();
        std::fill(w.begin() + static_cast<std::ptrdiff_t>(begin), w.begin() + static_cast<std::ptrdiff_t>(end), bit);
    }
}

Period determining_point(const Design& design, Period t) {
    if (t < 1 || t > design.horizon()) {
        throw Error(ErrorCode::PeriodOutOfRange, "period " + std::to_string(t) + " outside [1, " +
                                                     std::to_string(design.horizon()) + "]");
    }
    return design.points()[static_cast<std::size_t>(design.epoch_index(t))];
}

std::vector<Period> determining_window(const Design& design, Period t, int p) {
    if (p < 0) throw Error(ErrorCode::WindowUnderflow, "order must be non-negative");
    if (t - p < 1) {
        throw Error(ErrorCode::WindowUnderflow,
                    "window [" + std::to_string(t - p) + ", " + std::to_string(t) + "] starts before period 1");
    }
    if (t > design.horizon()) throw Error(ErrorCode::PeriodOutOfRange, "period beyond horizon");
    std::vector<Period> out;
    const int first = design.epoch_index(t - p);
    const int last = design.epoch_index(t);
    out.reserve(static_cast<std::size_t>(last - first + 1));
    for (int k = first; k <= last; ++k) out.push_back(design.points()[static_cast<std::size_t>(k)]);
    return out;
}

std::vector<Period> overlap_points(const Design& design, Period t, Period t2, int p) {
    const auto a = determining_window(design, t, p);
    const auto b = determining_window(design, t2, p);
    std::vector<Period> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool is_persistent(const Design& design, int m) {
    const auto& pts = design.points();
    const int K = design.switches();
    const int T = design.horizon();
    if (K < 1) return false;
    if (pts[1] < m + 2) return false;
    if (pts[static_cast<std::size_t>(K)] > T - m) return false;
    auto at = [&](int k) { return k == K + 1 ? T + 1 : pts[static_cast<std::size_t>(k)]; };
    for (int k = 1; k <= K; ++k) {
        if (at(k + 1) - at(k - 1) < m) return false;
    }
    return true;
}

std::string to_string(const Design& design) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < design.points().size(); ++i) {
        if (i) os << ',';
        os << design.points()[i];
    }
    os << '}';
    return os.str();
}

}  // namespace switchback
