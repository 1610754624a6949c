#pragma once

#include "switchback/design.hpp"
#include "switchback/outcomes.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace switchback {

enum class RiskMethod { ClosedForm, Enumeration, MonteCarlo, Exact };

std::string_view to_string(RiskMethod method);

/// Risk of a design. `risk` is on the average-effect scale (it carries the
/// 1/(T-p)^2 factor); `total_risk()` is the total-effect scale.
struct RiskReport {
    Design design;
    RiskMethod method = RiskMethod::ClosedForm;
    int p = 0;
    double risk = 0.0;
    /// E[tau_hat] - tau, average scale (zero for the closed form).
    double bias = 0.0;
    /// Monte Carlo standard error of `risk`; zero for exact methods.
    double standard_error = 0.0;
    std::optional<std::int64_t> replications;
    std::optional<std::uint64_t> seed;

    [[nodiscard]] double total_risk() const {
        const double s = static_cast<double>(design.horizon() - p);
        return risk * s * s;
    }
};

/// Boundary gaps a_1 = t_1 - t_0 and a_2 = t_{K+1} - t_K, interior gaps
/// g_k = t_{k+1} - t_k for k in [1, K-1].
struct GapProfile {
    int K = 0;
    int a1 = 0;
    int a2 = 0;
    std::vector<int> interior;

    static GapProfile of(const Design& design);
    [[nodiscard]] Design to_design(int horizon) const;
};

/// sum over paths of prob * (tau_hat_p - tau_p)^2. Throws OrderMismatch when
/// the oracle's order exceeds p, TooManyCoins above the cap.
RiskReport risk_enumeration(const Design& design, const OutcomeOracle& oracle, int p,
                            int max_coins = kDefaultCoinCap);

/// Var + bias^2 from the exact local moments; usable at any horizon.
RiskReport risk_exact(const Design& design, const OutcomeOracle& oracle, int p);

/// Mean squared loss over `reps` sampled paths; replicate i draws its path
/// from CounterRng(seed, i). For p below the oracle's order the loss is taken
/// against the per-path misspecified estimand.
RiskReport risk_monte_carlo(const Design& design, const OutcomeOracle& oracle, int p, std::int64_t reps,
                            std::uint64_t seed);

/// Worst-case risk of a persistent design, sup over |Y| <= B. Throws NotPersistent.
RiskReport worst_case_risk_closed_form(const Design& design, int m, double bound);

/// 4 sum_{k=0}^{K} g_k^2 + 8m(t_K - t_1) + 4m^2 K - 4m^2 + 4 sum_{k=1}^{K-1} [(m - g_k)^+]^2.
double subset_selection_objective(const Design& design, int m);
std::int64_t subset_selection_objective_exact(const Design& design, int m);

/// Minimizer of the subset-selection objective over persistent designs,
/// lexicographically smallest among ties. Throws HorizonTooShort when T < 2m + 2.
Design optimal_design(int horizon, int m);

/// Exhaustive version over all 2^{T-1} candidates. Throws HorizonTooLarge above T = 14.
Design optimal_design_bruteforce(int horizon, int m);

inline constexpr int kBruteForceMaxHorizon = 14;

/// Benchmarks: every period ({1..T}) and epochs of length m + 1 ({1, m+2, 2m+3, ...}).
Design every_period_design(int horizon);
Design fixed_epoch_design(int horizon, int epoch_length);

}  // namespace switchback
