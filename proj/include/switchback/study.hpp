#pragma once

#include "switchback/serialization.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace switchback {

enum class StudyId { Table2, Table3, Table4, Table5, RejectionCurve };

std::string_view to_string(StudyId id);
StudyId study_id_from_string(std::string_view name);

/// Settings shared by all studies. Unused fields are ignored by studies that
/// do not need them. The outcome model is the linear carryover model with
/// mu = 0, alpha_t = log t and N(0, noise_sd^2) noise fixed by noise_seed.
struct StudyConfig {
    StudyId study = StudyId::Table3;
    int horizon = 120;
    int m = 2;
    int p = 2;
    std::int64_t reps = 100000;
    std::uint64_t seed = 1;
    std::uint64_t noise_seed = 2;
    double noise_sd = 1.0;
    /// Table 2 bound B.
    double bound = 10.0;
    /// Table 3 rows: lag coefficients (delta_1, delta_2, delta_3).
    std::vector<std::vector<double>> delta_rows;
    /// Tables 4, 5 and the rejection curve: delta_1 = delta_2 = delta_3 = delta.
    std::vector<double> deltas;
    /// Tables 4 and 5: assumed orders (correct, over, under).
    std::vector<int> orders;
    /// Rejection curve horizons.
    std::vector<int> horizons;
    std::int64_t exact_resamples = 100000;
    double alpha = 0.1;

    /// Defaults for `id`, matching the simulation section's parameterization.
    static StudyConfig defaults(StudyId id);
    /// Starts from defaults(study) and overrides the fields present.
    static StudyConfig from_json(const Json& j);
    [[nodiscard]] Json to_json() const;
};

/// Table with one text label per row followed by named numeric columns.
struct StudyTable {
    std::string label_column = "case";
    std::vector<std::string> columns;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;

    void add_row(std::string label, std::vector<double> values);

    [[nodiscard]] double at(std::size_t row, std::string_view column) const;
    /// Header plus rows, 12 significant digits.
    void write_csv(std::ostream& out) const;
};

struct StudyResult {
    StudyConfig config;
    StudyTable table;
};

/// Throws ConfigInvalid for inconsistent settings.
StudyResult run_study(const StudyConfig& config);

/// The three designs compared in the simulations: the optimal design for
/// (T, m), every period, and fixed epochs of length m + 1.
struct BenchmarkDesigns {
    Design optimal;
    Design every_period;
    Design fixed_epochs;
};
BenchmarkDesigns benchmark_designs(int horizon, int m);

/// Linear carryover model with mu = 0 and alpha_t = log t.
LinearCarryoverModel simulation_model(std::vector<double> deltas, double noise_sd, std::uint64_t noise_seed);

/// Replicate-level summary of the lag-p analysis of one design under one
/// outcome model, over `reps` independently sampled paths.
struct ReplicateMoments {
    double mean_tau_hat = 0.0;
    double var_tau_hat = 0.0;        // sample variance (divisor reps)
    double mean_sigma2_u1 = 0.0;     // NaN when the design is not n-replica for p
    double mean_sigma2_u2 = 0.0;
    double mean_estimand = 0.0;      // tau_p, or the per-path misspecified estimand when p < m
    double mse = 0.0;                // mean (tau_hat - estimand)^2
    double mse_se = 0.0;
};
ReplicateMoments simulate_replicates(const Design& design, const OutcomeOracle& oracle, int p, std::int64_t reps,
                                     std::uint64_t seed);

}  // namespace switchback
