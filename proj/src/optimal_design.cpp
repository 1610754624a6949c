#include "switchback/optimal_design.hpp"

#include "switchback/error.hpp"
#include "switchback/estimation.hpp"
#include "switchback/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace switchback {

std::string_view to_string(RiskMethod method) {
    switch (method) {
        case RiskMethod::ClosedForm: return "closed_form";
        case RiskMethod::Enumeration: return "enumeration";
        case RiskMethod::MonteCarlo: return "monte_carlo";
        case RiskMethod::Exact: return "exact";
    }
    return "unknown";
}

GapProfile GapProfile::of(const Design& design) {
    const auto& pts = design.points();
    GapProfile g;
    g.K = design.switches();
    if (g.K == 0) {
        g.a1 = design.horizon();
        return g;
    }
    g.a1 = pts[1] - pts[0];
    g.a2 = design.horizon() + 1 - pts.back();
    for (int k = 1; k < g.K; ++k) g.interior.push_back(pts[static_cast<std::size_t>(k + 1)] - pts[static_cast<std::size_t>(k)]);
    return g;
}

Design GapProfile::to_design(int horizon) const {
    std::vector<Period> pts{1};
    if (K > 0) {
        pts.push_back(1 + a1);
        for (int g : interior) pts.push_back(pts.back() + g);
    }
    return Design::validate(horizon, std::move(pts));
}

namespace {

void check_oracle_design(const Design& design, const OutcomeOracle& oracle) {
    if (design.horizon() != oracle.horizon()) throw Error(ErrorCode::LengthMismatch, "design and oracle horizons differ");
}

}  // namespace

RiskReport risk_enumeration(const Design& design, const OutcomeOracle& oracle, int p, int max_coins) {
    check_oracle_design(design, oracle);
    if (oracle.order() > p) {
        throw Error(ErrorCode::OrderMismatch, "oracle order m=" + std::to_string(oracle.order()) +
                                                  " exceeds p=" + std::to_string(p) + "; the lag-p estimand is undefined");
    }
    const double tau = lag_p_estimand(oracle, p);
    const HtWeights weights(design, p);
    double risk = 0.0;
    double mean = 0.0;
    for_each_path(
        design,
        [&](const AssignmentPath& path, double prob) {
            const auto y = realize_observed(oracle, path);
            const double est = weights.estimate(path.values(), y);
            risk += prob * (est - tau) * (est - tau);
            mean += prob * est;
        },
        max_coins);
    return RiskReport{design, RiskMethod::Enumeration, p, risk, mean - tau, 0.0, std::nullopt, std::nullopt};
}

RiskReport risk_exact(const Design& design, const OutcomeOracle& oracle, int p) {
    check_oracle_design(design, oracle);
    if (oracle.order() > p) {
        throw Error(ErrorCode::OrderMismatch, "oracle order exceeds p; the lag-p estimand is undefined");
    }
    const double tau = lag_p_estimand(oracle, p);
    const auto mom = moments_local(design, oracle, p);
    const double bias = mom.mean - tau;
    return RiskReport{design, RiskMethod::Exact, p, mom.variance + bias * bias, bias, 0.0, std::nullopt, std::nullopt};
}

RiskReport risk_monte_carlo(const Design& design, const OutcomeOracle& oracle, int p, std::int64_t reps,
                            std::uint64_t seed) {
    check_oracle_design(design, oracle);
    if (reps < 1) throw Error(ErrorCode::ConfigInvalid, "reps must be at least 1");
    const bool misspecified = p < oracle.order();
    const double tau = misspecified ? 0.0 : lag_p_estimand(oracle, p);
    const HtWeights weights(design, p);
    std::vector<double> loss(static_cast<std::size_t>(reps));
    std::vector<double> err(static_cast<std::size_t>(reps));
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t i) {
        CounterRng rng(seed, i);
        const auto path = sample_path(design, rng);
        const auto y = realize_observed(oracle, path);
        const double target = misspecified ? misspecified_estimand(oracle, p, path) : tau;
        const double e = weights.estimate(path.values(), y) - target;
        err[i] = e;
        loss[i] = e * e;
    });
    double mean = 0.0;
    double bias = 0.0;
    for (std::size_t i = 0; i < loss.size(); ++i) {
        mean += loss[i];
        bias += err[i];
    }
    const auto n = static_cast<double>(reps);
    mean /= n;
    bias /= n;
    double ss = 0.0;
    for (double l : loss) ss += (l - mean) * (l - mean);
    const double se = reps > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return RiskReport{design, RiskMethod::MonteCarlo, p, mean, bias, se, reps, seed};
}

std::int64_t subset_selection_objective_exact(const Design& design, int m) {
    const auto& pts = design.points();
    const int K = design.switches();
    const std::int64_t M = m;
    auto at = [&](int k) -> std::int64_t {
        return k == K + 1 ? design.horizon() + 1 : pts[static_cast<std::size_t>(k)];
    };
    std::int64_t sum = 0;
    for (int k = 0; k <= K; ++k) {
        const std::int64_t g = at(k + 1) - at(k);
        sum += 4 * g * g;
    }
    if (K >= 1) sum += 8 * M * (at(K) - at(1));
    sum += 4 * M * M * K - 4 * M * M;
    for (int k = 1; k <= K - 1; ++k) {
        const std::int64_t short_by = std::max<std::int64_t>(0, M - (at(k + 1) - at(k)));
        sum += 4 * short_by * short_by;
    }
    return sum;
}

double subset_selection_objective(const Design& design, int m) {
    return static_cast<double>(subset_selection_objective_exact(design, m));
}

RiskReport worst_case_risk_closed_form(const Design& design, int m, double bound) {
    if (!(bound > 0.0)) throw Error(ErrorCode::NonpositiveBound, "B must be positive");
    if (!is_persistent(design, m)) {
        throw Error(ErrorCode::NotPersistent, to_string(design) + " is not persistent for m=" + std::to_string(m));
    }
    const double d = static_cast<double>(design.horizon() - m);
    const double risk = subset_selection_objective(design, m) * bound * bound / (d * d);
    return RiskReport{design, RiskMethod::ClosedForm, m, risk, 0.0, 0.0, std::nullopt, std::nullopt};
}

namespace {

void check_horizon(int horizon, int m) {
    if (m < 0) throw Error(ErrorCode::OutOfRange, "m must be non-negative");
    if (horizon < 2 * m + 2) {
        throw Error(ErrorCode::HorizonTooShort, "no persistent design exists for T=" + std::to_string(horizon) +
                                                    " < 2m+2 with m=" + std::to_string(m));
    }
}

// Interior gaps take two values x and x+1; adjacent interior gaps must sum
// to at least m. `last` is the previously placed value (-1 for none, 0 for
// x, 1 for x+1). Says whether nb copies of x and nc of x+1 can still be laid
// out.
bool can_arrange(int nb, int nc, int last, int x, int m) {
    const int length = nb + nc;
    if (length == 0) return true;
    const bool xx = 2 * x >= m;
    const bool xy = 2 * x + 1 >= m;
    const bool yy = 2 * x + 2 >= m;
    if (xx) return true;
    if (xy) return last == 0 ? nb <= nc : nb <= nc + 1;
    if (yy) {
        if (last == 0) return false;
        if (last == 1) return nb == 0;
        return nb == 0 || length == 1;
    }
    return last == -1 && length == 1;
}

// Lexicographically smallest feasible order of the interior gaps.
std::vector<int> arrange(int nb, int nc, int x, int m) {
    std::vector<int> gaps;
    gaps.reserve(static_cast<std::size_t>(nb + nc));
    int last = -1;
    while (nb + nc > 0) {
        const bool x_fits = last == -1 || (last == 0 ? 2 * x : 2 * x + 1) >= m;
        if (nb > 0 && x_fits && can_arrange(nb - 1, nc, 0, x, m)) {
            gaps.push_back(x);
            --nb;
            last = 0;
        } else {
            gaps.push_back(x + 1);
            --nc;
            last = 1;
        }
    }
    return gaps;
}

std::vector<Period> points_from(int a1, const std::vector<int>& interior) {
    std::vector<Period> pts{1, 1 + a1};
    for (int g : interior) pts.push_back(pts.back() + g);
    return pts;
}

}  // namespace

Design optimal_design(int horizon, int m) {
    check_horizon(horizon, m);
    const std::int64_t M = m;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::vector<Period> best_points;

    for (int K = 1; K <= horizon - 1; ++K) {
        const int L = K - 1;
        for (int A = 2 * (m + 1); A <= horizon - L; ++A) {
            const int S = horizon - A;
            if (L == 0 && S != 0) continue;
            const int a1 = A / 2;
            const int a2 = A - a1;
            if (a1 < m + 1) continue;
            int x = 0;
            int nb = 0;
            int nc = 0;
            if (L > 0) {
                x = S / L;
                nc = S % L;
                nb = L - nc;
                if (x < 1) continue;
                if (!can_arrange(nb, nc, -1, x, m)) continue;
            }
            const std::int64_t X = x;
            const std::int64_t sx = std::max<std::int64_t>(0, M - X);
            const std::int64_t sy = std::max<std::int64_t>(0, M - X - 1);
            const std::int64_t obj = 4 * (std::int64_t{a1} * a1 + std::int64_t{a2} * a2) +
                                     4 * (nb * X * X + nc * (X + 1) * (X + 1)) + 8 * M * S + 4 * M * M * K -
                                     4 * M * M + 4 * (nb * sx * sx + nc * sy * sy);
            if (obj > best) continue;
            auto pts = points_from(a1, arrange(nb, nc, x, m));
            if (obj < best || pts < best_points) {
                best = obj;
                best_points = std::move(pts);
            }
        }
    }
    if (best_points.empty()) {
        throw Error(ErrorCode::HorizonTooShort, "no persistent design found for T=" + std::to_string(horizon));
    }
    return Design::validate(horizon, std::move(best_points));
}

Design optimal_design_bruteforce(int horizon, int m) {
    if (horizon > kBruteForceMaxHorizon) {
        throw Error(ErrorCode::HorizonTooLarge, "brute force supports T <= " + std::to_string(kBruteForceMaxHorizon));
    }
    check_horizon(horizon, m);
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::vector<Period> best_points;
    const std::uint32_t count = std::uint32_t{1} << (horizon - 1);
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        std::vector<Period> pts{1};
        for (int t = 2; t <= horizon; ++t) {
            if ((mask >> (t - 2)) & 1U) pts.push_back(t);
        }
        const Design d = Design::validate(horizon, pts);
        if (!is_persistent(d, m)) continue;
        const auto obj = subset_selection_objective_exact(d, m);
        if (obj < best || (obj == best && pts < best_points)) {
            best = obj;
            best_points = std::move(pts);
        }
    }
    if (best_points.empty()) {
        throw Error(ErrorCode::HorizonTooShort, "no persistent design found for T=" + std::to_string(horizon));
    }
    return Design::validate(horizon, std::move(best_points));
}

Design every_period_design(int horizon) {
    std::vector<Period> pts(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) pts[static_cast<std::size_t>(t - 1)] = t;
    return Design::validate(horizon, std::move(pts));
}

Design fixed_epoch_design(int horizon, int epoch_length) {
    if (epoch_length < 1) throw Error(ErrorCode::OutOfRange, "epoch length must be positive");
    std::vector<Period> pts;
    for (int t = 1; t <= horizon; t += epoch_length) pts.push_back(t);
    return Design::validate(horizon, std::move(pts));
}

}  // namespace switchback
