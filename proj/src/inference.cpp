#include "switchback/inference.hpp"

#include "switchback/error.hpp"
#include "switchback/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace switchback {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double probability) {
    if (!(probability > 0.0 && probability < 1.0)) {
        throw Error(ErrorCode::BadLevel, "quantile level must lie in (0, 1)");
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), probability);
}

std::string_view to_string(TestMethod method) {
    return method == TestMethod::Exact ? "exact" : "asymptotic";
}

namespace {

// Per-resample pieces of the HT statistic that the exact procedures need:
// tau_hat^[i] of the observed outcomes, of the indicator of an all-ones
// observed window, and the sum of inverse propensities over all-ones windows
// of the resampled path (all divided by T - p).
struct Resample {
    double outcome = 0.0;
    double observed_ones = 0.0;
    double resampled_ones = 0.0;
};

std::vector<Resample> resample(const ExperimentData& data, const ExactTestConfig& config, bool shifts) {
    if (config.resamples < 1) throw Error(ErrorCode::ConfigInvalid, "resamples must be at least 1");
    const HtWeights weights(data.design, data.p);
    const int T = data.design.horizon();
    const int p = data.p;
    const auto obs = data.path.values();

    std::vector<std::uint8_t> obs_ones(static_cast<std::size_t>(T), 0);
    {
        int run = 0;
        for (int i = 0; i < T; ++i) {
            run = (i > 0 && obs[static_cast<std::size_t>(i)] == obs[static_cast<std::size_t>(i - 1)]) ? run + 1 : 1;
            obs_ones[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i >= p && run > p && obs[static_cast<std::size_t>(i)] != 0);
        }
    }

    std::vector<Resample> out(static_cast<std::size_t>(config.resamples));
    const std::size_t chunks = std::min<std::size_t>(out.size(), 64);
    const int threads = config.threads > 0 ? config.threads : default_thread_count();
    parallel_for(chunks, [&](std::size_t c) {
        std::vector<std::uint8_t> w(static_cast<std::size_t>(T));
        const std::size_t begin = out.size() * c / chunks;
        const std::size_t end = out.size() * (c + 1) / chunks;
        for (std::size_t r = begin; r < end; ++r) {
            CounterRng rng(config.seed, r);
            sample_assignments(data.design, rng, w);
            Resample s;
            int run = 0;
            for (int i = 0; i < T; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                run = (i > 0 && w[ui] == w[ui - 1]) ? run + 1 : 1;
                if (i < p || run <= p) continue;
                const double inv = weights.inverse_propensity(i + 1);
                const double sign = w[ui] != 0 ? inv : -inv;
                s.outcome += data.observed[ui] * sign;
                if (shifts) {
                    if (obs_ones[ui] != 0) s.observed_ones += sign;
                    if (w[ui] != 0) s.resampled_ones += inv;
                }
            }
            const double scale = static_cast<double>(T - p);
            s.outcome /= scale;
            s.observed_ones /= scale;
            s.resampled_ones /= scale;
            out[r] = s;
        }
    }, threads);
    return out;
}

// Largest |tau_hat| any path could produce; sets the tie tolerance.
double statistic_scale(const ExperimentData& data) {
    const HtWeights weights(data.design, data.p);
    double s = 0.0;
    for (Period t = data.p + 1; t <= data.design.horizon(); ++t) {
        s += std::abs(data.observed[static_cast<std::size_t>(t - 1)]) * weights.inverse_propensity(t);
    }
    return s / static_cast<double>(data.design.horizon() - data.p);
}

constexpr double kTieTolerance = 1e-12;

}  // namespace

TestResult exact_test(const ExperimentData& data, const ExactTestConfig& config) {
    const double tau = ht_estimator(data);
    const auto draws = resample(data, config, false);
    const double tol = kTieTolerance * std::max(statistic_scale(data), 1e-300);
    std::int64_t exceed = 0;
    for (const auto& d : draws) {
        if (std::abs(d.outcome) > std::abs(tau) + tol) ++exceed;
    }
    TestResult r;
    r.statistic = tau;
    r.p_value = static_cast<double>(exceed) / static_cast<double>(config.resamples);
    r.method = TestMethod::Exact;
    r.resamples = config.resamples;
    r.seed = config.seed;
    return r;
}

TestResult asymptotic_test(double tau_hat, double sigma2_hat) {
    if (!(sigma2_hat > 0.0)) throw Error(ErrorCode::ZeroVariance, "variance estimate must be positive");
    const double z = std::abs(tau_hat) / std::sqrt(sigma2_hat);
    TestResult r;
    r.statistic = z;
    r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    r.method = TestMethod::Asymptotic;
    r.variance = sigma2_hat;
    return r;
}

Interval normal_ci(double tau_hat, double sigma2_hat, double level) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::BadLevel, "level must lie in (0, 1)");
    if (!(sigma2_hat > 0.0)) throw Error(ErrorCode::ZeroVariance, "variance estimate must be positive");
    const double half = normal_quantile(0.5 + level / 2.0) * std::sqrt(sigma2_hat);
    return {tau_hat - half, tau_hat + half};
}

std::vector<double> exact_shift_p_values(const ExperimentData& data, const ExactTestConfig& config,
                                         std::span<const double> grid) {
    if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "grid must be non-empty");
    const double tau = ht_estimator(data);
    const auto draws = resample(data, config, true);
    const double tol = kTieTolerance * std::max(statistic_scale(data), 1e-300);
    std::vector<double> p_values;
    p_values.reserve(grid.size());
    for (double tau0 : grid) {
        const double observed = std::abs(tau - tau0);
        std::int64_t exceed = 0;
        for (const auto& d : draws) {
            const double stat = d.outcome - tau0 * d.observed_ones + tau0 * d.resampled_ones - tau0;
            if (std::abs(stat) > observed + tol * (1.0 + std::abs(tau0))) ++exceed;
        }
        p_values.push_back(static_cast<double>(exceed) / static_cast<double>(config.resamples));
    }
    return p_values;
}

Interval exact_ci(const ExperimentData& data, const ExactTestConfig& config, double level,
                  std::span<const double> grid) {
    if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "grid must be non-empty");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::BadLevel, "level must lie in (0, 1)");
    const auto p_values = exact_shift_p_values(data, config, grid);
    const double alpha = 1.0 - level;
    bool any = false;
    Interval ci;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (p_values[i] < alpha) continue;
        if (!any) {
            ci = {grid[i], grid[i]};
            any = true;
        } else {
            ci.lower = std::min(ci.lower, grid[i]);
            ci.upper = std::max(ci.upper, grid[i]);
        }
    }
    if (!any) throw Error(ErrorCode::NoPointAccepted, "every grid point was rejected");
    return ci;
}

AnalysisReport analyze_experiment(const ExperimentData& data, const std::optional<ExactTestConfig>& exact,
                                  double level) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::BadLevel, "level must lie in (0, 1)");
    AnalysisReport r;
    r.p = data.p;
    r.level = level;
    r.tau_hat = ht_estimator(data);
    r.tau_hat_total = r.tau_hat * static_cast<double>(data.design.horizon() - data.p);
    if (is_n_replica(data.design, data.p)) {
        r.sigma2 = variance_estimates(data, data.p);
        if (r.sigma2->u2 > 0.0) {
            r.asymptotic = asymptotic_test(r.tau_hat, r.sigma2->u2);
            r.normal_interval = normal_ci(r.tau_hat, r.sigma2->u2, level);
        }
    }
    if (exact) r.exact = exact_test(data, *exact);
    return r;
}

TestResult identify_m_subroutine(const ExperimentSummary& s1, const ExperimentSummary& s2) {
    if (!(s1.p < s2.p)) {
        throw Error(ErrorCode::OrderNotIncreasing, "need p1 < p2, got " + std::to_string(s1.p) + " and " +
                                                       std::to_string(s2.p));
    }
    auto r = asymptotic_test(s1.tau_hat - s2.tau_hat, s1.sigma2_hat + s2.sigma2_hat);
    return r;
}

IdentifyResult identify_m_search(std::span<const int> candidates, const ExperimentRunner& runner, double alpha) {
    if (candidates.size() < 2) throw Error(ErrorCode::ConfigInvalid, "need at least two candidate orders");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::BadLevel, "alpha must lie in (0, 1)");
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i] <= candidates[i - 1]) throw Error(ErrorCode::OrderNotIncreasing, "candidates must be strictly increasing");
    }
    std::map<int, ExperimentSummary> cache;
    auto summary = [&](int p) -> const ExperimentSummary& {
        auto it = cache.find(p);
        if (it != cache.end()) return it->second;
        ExperimentSummary s;
        try {
            s = runner(p);
        } catch (const std::exception& e) {
            throw Error(ErrorCode::RunnerFailure, "runner failed at p=" + std::to_string(p) + ": " + e.what());
        }
        s.p = p;
        return cache.emplace(p, s).first->second;
    };

    IdentifyResult result;
    result.order = candidates.front();
    for (std::size_t i = candidates.size() - 1; i >= 1; --i) {
        const int lower = candidates[i - 1];
        const int upper = candidates[i];
        const auto test = identify_m_subroutine(summary(lower), summary(upper));
        const bool rejected = test.p_value < alpha;
        result.steps.push_back({lower, upper, test.p_value, rejected});
        if (rejected) {
            result.order = upper;
            return result;
        }
    }
    return result;
}

}  // namespace switchback
