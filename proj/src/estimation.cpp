#include "switchback/estimation.hpp"

#include "switchback/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace switchback {

ExperimentData ExperimentData::make(Design design, int p, AssignmentPath path, std::vector<double> observed) {
    const int T = design.horizon();
    if (path.horizon() != T || static_cast<int>(observed.size()) != T) {
        throw Error(ErrorCode::LengthMismatch, "path and outcomes must have length " + std::to_string(T));
    }
    if (p < 0 || p >= T) throw Error(ErrorCode::OutOfRange, "order p must lie in [0, T-1]");
    if (!is_feasible_path(design, path)) {
        throw Error(ErrorCode::InvalidPath, "path " + path.to_string() + " has zero probability under " +
                                                to_string(design));
    }
    return ExperimentData{std::move(design), p, std::move(path), std::move(observed)};
}

double propensity(const Design& design, Period t, int p, Arm) {
    const auto window = determining_window(design, t, p);
    return std::ldexp(1.0, -static_cast<int>(window.size()));
}

HtWeights::HtWeights(const Design& design, int p)
    : horizon_(design.horizon()), p_(p), inv_(static_cast<std::size_t>(design.horizon()), 0.0) {
    if (p < 0 || p >= horizon_) throw Error(ErrorCode::OutOfRange, "order p must lie in [0, T-1]");
    for (Period t = p + 1; t <= horizon_; ++t) {
        const int coins = design.epoch_index(t) - design.epoch_index(t - p) + 1;
        inv_[static_cast<std::size_t>(t - 1)] = std::ldexp(1.0, coins);
    }
}

double HtWeights::estimate(std::span<const std::uint8_t> w, std::span<const double> y) const noexcept {
    double sum = 0.0;
    int run = 0;
    for (int i = 0; i < horizon_; ++i) {
        run = (i > 0 && w[static_cast<std::size_t>(i)] == w[static_cast<std::size_t>(i - 1)]) ? run + 1 : 1;
        if (i >= p_ && run > p_) {
            const double term = y[static_cast<std::size_t>(i)] * inv_[static_cast<std::size_t>(i)];
            sum += w[static_cast<std::size_t>(i)] != 0 ? term : -term;
        }
    }
    return sum / static_cast<double>(horizon_ - p_);
}

double ht_estimator(const ExperimentData& data) {
    if (!is_feasible_path(data.design, data.path)) {
        throw Error(ErrorCode::InvalidPath, "path has zero probability under the design");
    }
    return HtWeights(data.design, data.p).estimate(data.path.values(), data.observed);
}

double ht_total_effect(const ExperimentData& data) {
    return ht_estimator(data) * static_cast<double>(data.design.horizon() - data.p);
}

bool is_n_replica(const Design& design, int m) {
    const int T = design.horizon();
    if (m < 1 || T % m != 0) return false;
    const int n = T / m;
    if (n < 4) return false;
    const auto& pts = design.points();
    if (static_cast<int>(pts.size()) != n - 2 || pts[0] != 1) return false;
    for (int k = 1; k < n - 2; ++k) {
        if (pts[static_cast<std::size_t>(k)] != (k + 1) * m + 1) return false;
    }
    return true;
}

std::vector<double> epoch_sums(std::span<const double> values, int m) {
    const int T = static_cast<int>(values.size());
    if (m < 1 || T % m != 0 || T / m < 4) {
        throw Error(ErrorCode::PreconditionViolated, "epoch sums need T = n m with n >= 4");
    }
    const int n = T / m;
    std::vector<double> sums(static_cast<std::size_t>(n - 1), 0.0);
    for (int k = 0; k <= n - 2; ++k) {
        for (Period t = (k + 1) * m + 1; t <= (k + 2) * m; ++t) sums[static_cast<std::size_t>(k)] += values[static_cast<std::size_t>(t - 1)];
    }
    return sums;
}

EpochPotentialSums epoch_potential_sums(const OutcomeOracle& oracle, int m) {
    std::vector<double> ones(static_cast<std::size_t>(oracle.horizon()));
    std::vector<double> zeros(ones.size());
    for (Period t = 1; t <= oracle.horizon(); ++t) {
        ones[static_cast<std::size_t>(t - 1)] = oracle.constant_value(t, 1);
        zeros[static_cast<std::size_t>(t - 1)] = oracle.constant_value(t, 0);
    }
    return {epoch_sums(ones, m), epoch_sums(zeros, m)};
}

EstimatorMoments moments_enumeration(const Design& design, const OutcomeOracle& oracle, int p, int max_coins) {
    if (design.horizon() != oracle.horizon()) throw Error(ErrorCode::LengthMismatch, "design and oracle horizons differ");
    const HtWeights weights(design, p);
    std::vector<double> values;
    values.reserve(std::size_t{1} << std::min(design.coins(), 30));
    for_each_path(
        design,
        [&](const AssignmentPath& path, double) {
            const auto y = realize_observed(oracle, path);
            values.push_back(weights.estimate(path.values(), y));
        },
        max_coins);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {mean, var};
}

namespace {

// Evaluates single HT terms on a partially filled path whose coins are set
// only on a contiguous range of epochs.
class LocalTerms {
public:
    LocalTerms(const Design& design, const OutcomeOracle& oracle, int p)
        : design_(design), oracle_(oracle), weights_(design, p), p_(p),
          w_(static_cast<std::size_t>(design.horizon()), 0) {}

    // First and last epoch whose coins the term at t reads.
    [[nodiscard]] std::pair<int, int> epochs(Period t) const {
        const int reach = std::max(oracle_.order(), p_);
        return {design_.epoch_index(std::max(1, t - reach)), design_.epoch_index(t)};
    }

    void fill(int lo, int hi, std::uint64_t mask) {
        const auto& pts = design_.points();
        for (int k = lo; k <= hi; ++k) {
            const auto bit = static_cast<std::uint8_t>((mask >> (k - lo)) & 1U);
            const Period end = k + 1 < design_.coins() ? pts[static_cast<std::size_t>(k + 1)] : design_.horizon() + 1;
            for (Period t = pts[static_cast<std::size_t>(k)]; t < end; ++t) w_[static_cast<std::size_t>(t - 1)] = bit;
        }
    }

    // (T-p) times the HT contribution of period t under the filled coins.
    [[nodiscard]] double term(Period t) const {
        const auto bit = w_[static_cast<std::size_t>(t - 1)];
        for (Period i = t - p_; i < t; ++i) {
            if (w_[static_cast<std::size_t>(i - 1)] != bit) return 0.0;
        }
        const double y = oracle_.value(t, std::span<const std::uint8_t>(w_).first(static_cast<std::size_t>(t)));
        const double v = y * weights_.inverse_propensity(t);
        return bit != 0 ? v : -v;
    }

private:
    const Design& design_;
    const OutcomeOracle& oracle_;
    HtWeights weights_;
    int p_;
    std::vector<std::uint8_t> w_;
};

void check_local_range(int lo, int hi) {
    if (hi - lo + 1 > kDefaultCoinCap) {
        throw Error(ErrorCode::TooManyCoins, "local enumeration would visit more than 2^" +
                                                 std::to_string(kDefaultCoinCap) + " coin settings");
    }
}

}  // namespace

EstimatorMoments moments_local(const Design& design, const OutcomeOracle& oracle, int p) {
    if (design.horizon() != oracle.horizon()) throw Error(ErrorCode::LengthMismatch, "design and oracle horizons differ");
    const int T = design.horizon();
    LocalTerms terms(design, oracle, p);

    std::vector<double> mean(static_cast<std::size_t>(T + 1), 0.0);
    for (Period t = p + 1; t <= T; ++t) {
        const auto [lo, hi] = terms.epochs(t);
        check_local_range(lo, hi);
        const std::uint64_t count = std::uint64_t{1} << (hi - lo + 1);
        double acc = 0.0;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            terms.fill(lo, hi, mask);
            acc += terms.term(t);
        }
        mean[static_cast<std::size_t>(t)] = acc / static_cast<double>(count);
    }

    double total_mean = 0.0;
    double total_cov = 0.0;
    for (Period t = p + 1; t <= T; ++t) {
        total_mean += mean[static_cast<std::size_t>(t)];
        const auto [lo_t, hi_t] = terms.epochs(t);
        for (Period u = t; u <= T; ++u) {
            const auto [lo_u, hi_u] = terms.epochs(u);
            if (lo_u > hi_t) break;
            const int lo = std::min(lo_t, lo_u);
            const int hi = std::max(hi_t, hi_u);
            check_local_range(lo, hi);
            const std::uint64_t count = std::uint64_t{1} << (hi - lo + 1);
            double acc = 0.0;
            for (std::uint64_t mask = 0; mask < count; ++mask) {
                terms.fill(lo, hi, mask);
                acc += terms.term(t) * terms.term(u);
            }
            const double cov = acc / static_cast<double>(count) -
                               mean[static_cast<std::size_t>(t)] * mean[static_cast<std::size_t>(u)];
            total_cov += u == t ? cov : 2.0 * cov;
        }
    }
    const double scale = static_cast<double>(T - p);
    return {total_mean / scale, std::max(0.0, total_cov) / (scale * scale)};
}

double variance_closed_form(const EpochPotentialSums& sums, int horizon, int m) {
    const auto& a = sums.ones;
    const auto& b = sums.zeros;
    const std::size_t last = a.size() - 1;
    double s = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
        if (k == 0 || k == last) {
            s += (a[k] + b[k]) * (a[k] + b[k]);
        } else {
            s += 3.0 * a[k] * a[k] + 3.0 * b[k] * b[k] + 2.0 * a[k] * b[k];
        }
        if (k < last) s += 2.0 * (a[k] + b[k]) * (a[k + 1] + b[k + 1]);
    }
    const double d = static_cast<double>(horizon - m);
    return s / (d * d);
}

double variance_exact(const Design& design, const OutcomeOracle& oracle, int m) {
    if (is_n_replica(design, m) && oracle.order() <= m) {
        return variance_closed_form(epoch_potential_sums(oracle, m), design.horizon(), m);
    }
    return moments_local(design, oracle, m).variance;
}

VarianceBounds variance_bounds(const EpochPotentialSums& sums, int horizon, int m) {
    const auto& a = sums.ones;
    const auto& b = sums.zeros;
    const std::size_t last = a.size() - 1;
    double u1 = 0.0;
    double u2 = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
        const bool boundary = k == 0 || k == last;
        const double sq = a[k] * a[k] + b[k] * b[k];
        u1 += (boundary ? 3.0 : 6.0) * sq;
        u2 += (boundary ? 4.0 : 8.0) * sq;
        if (k < last) u1 += 2.0 * (a[k] * a[k + 1] + b[k] * b[k + 1]);
    }
    const double d2 = static_cast<double>(horizon - m) * static_cast<double>(horizon - m);
    return {u1 / d2, u2 / d2};
}

namespace {

void require_n_replica(const Design& design, int m) {
    if (!is_n_replica(design, m)) {
        throw Error(ErrorCode::PreconditionViolated,
                    "variance bounds need T = n m (n >= 4) under the optimal design; got " + to_string(design) +
                        " with m=" + std::to_string(m));
    }
}

}  // namespace

VarianceBounds variance_bounds(const Design& design, const OutcomeOracle& oracle, int m) {
    require_n_replica(design, m);
    if (design.horizon() != oracle.horizon()) throw Error(ErrorCode::LengthMismatch, "design and oracle horizons differ");
    return variance_bounds(epoch_potential_sums(oracle, m), design.horizon(), m);
}

VarianceBounds variance_estimates_unchecked(const Design& design, std::span<const std::uint8_t> w,
                                            std::span<const double> y, int m) {
    const auto sums = epoch_sums(y, m);
    const std::size_t last = sums.size() - 1;
    const auto& pts = design.points();
    auto coin = [&](int k) { return w[static_cast<std::size_t>(pts[static_cast<std::size_t>(k)] - 1)]; };
    // Epochs whose coins fix the windows of block k: periods km+1 .. (k+2)m.
    auto lo = [&](std::size_t k) { return design.epoch_index(static_cast<int>(k) * m + 1); };
    auto hi = [&](std::size_t k) { return design.epoch_index((static_cast<int>(k) + 2) * m); };
    auto agree = [&](int from, int to) {
        for (int j = from + 1; j <= to; ++j) {
            if (coin(j) != coin(from)) return false;
        }
        return true;
    };

    double u1 = 0.0;
    double u2 = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
        const bool boundary = k == 0 || k == last;
        if (agree(lo(k), hi(k))) {
            const double inv = std::ldexp(1.0, hi(k) - lo(k) + 1);
            const double sq = sums[k] * sums[k] * inv;
            u1 += (boundary ? 3.0 : 6.0) * sq;
            u2 += (boundary ? 4.0 : 8.0) * sq;
        }
        if (k < last && agree(lo(k), hi(k + 1))) {
            u1 += 2.0 * std::ldexp(1.0, hi(k + 1) - lo(k) + 1) * sums[k] * sums[k + 1];
        }
    }
    const double d2 = static_cast<double>(design.horizon() - m) * static_cast<double>(design.horizon() - m);
    return {u1 / d2, u2 / d2};
}

VarianceBounds variance_estimates(const ExperimentData& data, int m) {
    require_n_replica(data.design, m);
    if (!is_feasible_path(data.design, data.path)) throw Error(ErrorCode::InvalidPath, "path has zero probability");
    return variance_estimates_unchecked(data.design, data.path.values(), data.observed, m);
}

void write_experiment_csv(std::ostream& out, const AssignmentPath& path, std::span<const double> observed) {
    if (static_cast<int>(observed.size()) != path.horizon()) throw Error(ErrorCode::LengthMismatch, "outcome count differs from path length");
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << "period,assignment,outcome\n" << std::setprecision(12);
    for (Period t = 1; t <= path.horizon(); ++t) {
        out << t << ',' << path.at(t) << ',' << observed[static_cast<std::size_t>(t - 1)] << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace

ExperimentTable read_experiment_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "period,assignment,outcome") {
        throw Error(ErrorCode::ParseError, "expected header 'period,assignment,outcome'");
    }
    std::vector<std::uint8_t> w;
    std::vector<double> y;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f_period, f_assign, f_outcome, extra;
        if (!std::getline(ss, f_period, ',') || !std::getline(ss, f_assign, ',') || !std::getline(ss, f_outcome, ',') ||
            std::getline(ss, extra, ',')) {
            throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": expected three fields");
        }
        try {
            std::size_t pos = 0;
            const int period = std::stoi(trim(f_period), &pos);
            if (period != static_cast<int>(w.size()) + 1) {
                throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": periods must run 1, 2, ...");
            }
            const std::string a = trim(f_assign);
            if (a != "0" && a != "1") throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": assignment must be 0 or 1");
            w.push_back(static_cast<std::uint8_t>(a == "1"));
            const std::string o = trim(f_outcome);
            const double v = std::stod(o, &pos);
            if (pos != o.size()) throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": bad outcome");
            y.push_back(v);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": unparsable number");
        }
    }
    if (w.empty()) throw Error(ErrorCode::ParseError, "no data rows");
    return {AssignmentPath(std::move(w)), std::move(y)};
}

}  // namespace switchback
