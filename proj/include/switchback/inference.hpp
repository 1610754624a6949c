#pragma once

#include "switchback/estimation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace switchback {

/// Standard normal CDF via erfc; accurate far into both tails.
double normal_cdf(double z);
/// Standard normal quantile. Throws BadLevel outside (0, 1).
double normal_quantile(double probability);

enum class TestMethod { Exact, Asymptotic };
std::string_view to_string(TestMethod method);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    TestMethod method = TestMethod::Asymptotic;
    std::optional<std::int64_t> resamples;
    std::optional<std::uint64_t> seed;
    /// Variance plugged into an asymptotic test.
    std::optional<double> variance;
};

struct ExactTestConfig {
    std::int64_t resamples = 100000;
    std::uint64_t seed = 0;
    /// Worker threads; 0 picks default_thread_count().
    int threads = 0;
};

/// Fisher randomization test of the sharp null of no effect. Holds the
/// observed outcomes fixed, draws `resamples` paths from the design (resample
/// i uses CounterRng(seed, i)) and returns the fraction with |tau_hat^[i]|
/// strictly greater than |tau_hat|. Differences below 1e-12 of the largest
/// attainable |tau_hat| count as ties.
TestResult exact_test(const ExperimentData& data, const ExactTestConfig& config);

/// z = |tau_hat| / sqrt(sigma2_hat), p = 2 - 2 Phi(z). Throws ZeroVariance.
TestResult asymptotic_test(double tau_hat, double sigma2_hat);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    [[nodiscard]] bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

/// tau_hat +- z_{(1+level)/2} sqrt(sigma2_hat). Throws BadLevel, ZeroVariance.
Interval normal_ci(double tau_hat, double sigma2_hat, double level);

/// Hull of the grid points tau0 not rejected (p >= 1 - level) by the exact
/// test of the additive sharp null Y_t(1_{p+1}) - Y_t(0_{p+1}) = tau0. All
/// grid points share the same resampled paths. Throws EmptyGrid, BadLevel,
/// NoPointAccepted.
Interval exact_ci(const ExperimentData& data, const ExactTestConfig& config, double level,
                  std::span<const double> grid);

/// Per-order p-values along a grid, the building block of exact_ci.
std::vector<double> exact_shift_p_values(const ExperimentData& data, const ExactTestConfig& config,
                                         std::span<const double> grid);

/// Everything the analysis of one experiment reports. Variance estimates,
/// the asymptotic test and the normal interval need the n-replica design for
/// the assumed order and are absent otherwise.
struct AnalysisReport {
    double tau_hat = 0.0;
    double tau_hat_total = 0.0;
    int p = 0;
    std::optional<VarianceBounds> sigma2;
    std::optional<TestResult> exact;
    std::optional<TestResult> asymptotic;
    std::optional<Interval> normal_interval;
    double level = 0.95;
};

/// The asymptotic test and interval plug in sigma2_u2.
AnalysisReport analyze_experiment(const ExperimentData& data, const std::optional<ExactTestConfig>& exact,
                                  double level = 0.95);

struct ExperimentSummary {
    double tau_hat = 0.0;
    double sigma2_hat = 0.0;
    int p = 0;
    int n = 0;
};

/// Tests H0: m <= s1.p from two independent experiments run at orders
/// s1.p < s2.p: z = |tau1 - tau2| / sqrt(sigma1^2 + sigma2^2).
/// Throws OrderNotIncreasing, ZeroVariance.
TestResult identify_m_subroutine(const ExperimentSummary& s1, const ExperimentSummary& s2);

/// Runs one fresh, independent experiment assuming order p.
using ExperimentRunner = std::function<ExperimentSummary(int p)>;

struct IdentifyStep {
    int lower = 0;  // p1 in H0: m <= p1
    int upper = 0;
    double p_value = 1.0;
    bool rejected = false;
};

struct IdentifyResult {
    int order = 0;
    std::vector<IdentifyStep> steps;
};

/// Scans downward from the largest pair of candidates and returns the
/// smallest p1 whose H0: m <= p1 is not rejected at alpha. Each candidate
/// order is run at most once. Runner exceptions surface as RunnerFailure.
IdentifyResult identify_m_search(std::span<const int> candidates, const ExperimentRunner& runner, double alpha);

}  // namespace switchback
