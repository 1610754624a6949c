#pragma once

#include "switchback/design.hpp"
#include "switchback/outcomes.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace switchback {

/// One realized experiment. `observed` has one entry per period; entries for
/// t <= p are stored but never read.
struct ExperimentData {
    Design design;
    int p = 0;
    AssignmentPath path;
    std::vector<double> observed;

    /// Checks lengths, 0 <= p < T, and that the path is feasible (InvalidPath).
    static ExperimentData make(Design design, int p, AssignmentPath path, std::vector<double> observed);
};

enum class Arm { Ones, Zeros };

/// Pr(W_{t-p:t} = 1_{p+1}) = 2^{-|determining_window(t, p)|}; the same for zeros.
double propensity(const Design& design, Period t, int p, Arm arm = Arm::Ones);

/// Precomputed inverse propensities for the lag-p HT estimator under one
/// design. `estimate` assumes a feasible path and skips all validation, which
/// is what the resampling loops want.
class HtWeights {
public:
    HtWeights(const Design& design, int p);

    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] int order() const noexcept { return p_; }
    /// 1 / propensity(t) for t > p (index t-1); zero for t <= p.
    [[nodiscard]] double inverse_propensity(Period t) const { return inv_[static_cast<std::size_t>(t - 1)]; }

    /// (1/(T-p)) sum_t y_t [1{ones}/pi - 1{zeros}/pi].
    [[nodiscard]] double estimate(std::span<const std::uint8_t> w, std::span<const double> y) const noexcept;

private:
    int horizon_;
    int p_;
    std::vector<double> inv_;
};

/// Lag-p HT estimate of the average effect. Throws InvalidPath for paths the
/// design cannot produce.
double ht_estimator(const ExperimentData& data);
/// (T-p) * ht_estimator.
double ht_total_effect(const ExperimentData& data);

/// True when T = n m with n >= 4 and the design is {1, 2m+1, 3m+1, ..., (n-2)m+1}.
bool is_n_replica(const Design& design, int m);

/// Ybar_k = sum of values over t in [(k+1)m+1, (k+2)m], k = 0..n-2.
std::vector<double> epoch_sums(std::span<const double> values, int m);

struct EpochPotentialSums {
    std::vector<double> ones;   // Ybar_k(1_{m+1})
    std::vector<double> zeros;  // Ybar_k(0_{m+1})
};
EpochPotentialSums epoch_potential_sums(const OutcomeOracle& oracle, int m);

/// Mean and variance of the lag-p HT estimator over the design's path distribution.
struct EstimatorMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// By visiting all 2^{K+1} paths.
EstimatorMoments moments_enumeration(const Design& design, const OutcomeOracle& oracle, int p,
                                     int max_coins = kDefaultCoinCap);

/// Exact as well, at any horizon: each period's HT term depends only on the
/// coins of the epochs touching [t - max(m, p), t], so the mean needs one small
/// enumeration per period and the variance one per pair of periods whose coin
/// sets overlap (all other pairs are independent).
EstimatorMoments moments_local(const Design& design, const OutcomeOracle& oracle, int p);

/// Var(tau_hat_m). Uses the closed form when is_n_replica(design, m) and the
/// oracle's order is at most m; otherwise the exact local computation.
double variance_exact(const Design& design, const OutcomeOracle& oracle, int m);

/// Closed form for the n-replica design in terms of epoch potential sums.
double variance_closed_form(const EpochPotentialSums& sums, int horizon, int m);

struct VarianceBounds {
    double u1 = 0.0;
    double u2 = 0.0;
};

/// Var <= Var^U1 <= Var^U2 for the n-replica design. Throws PreconditionViolated.
VarianceBounds variance_bounds(const Design& design, const OutcomeOracle& oracle, int m);
VarianceBounds variance_bounds(const EpochPotentialSums& sums, int horizon, int m);

/// Unbiased estimators of Var^U1 and Var^U2 from one realized experiment.
/// Each coefficient is the bound's coefficient divided by the probability
/// that the coins involved all agree with the realized ones.
VarianceBounds variance_estimates(const ExperimentData& data, int m);

/// Same, from raw arrays; assumes is_n_replica was already checked.
VarianceBounds variance_estimates_unchecked(const Design& design, std::span<const std::uint8_t> w,
                                            std::span<const double> y, int m);

/// CSV with header `period,assignment,outcome`, 12 significant digits.
void write_experiment_csv(std::ostream& out, const AssignmentPath& path, std::span<const double> observed);

struct ExperimentTable {
    AssignmentPath path;
    std::vector<double> observed;
};
/// Throws ParseError on malformed input.
ExperimentTable read_experiment_csv(std::istream& in);

}  // namespace switchback
