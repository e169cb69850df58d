#pragma once

#include <filesystem>
#include <vector>

#include "rainfall/simulate.hpp"

namespace rainfall {

struct FrequencyRow {
    double lower = 0.0;       // bin [lower, upper); the last bin is open-ended
    double upper = 0.0;
    double empirical = 0.0;   // counts
    double simulated = 0.0;   // counts averaged over the simulations
};

struct QuantilePair {
    double level = 0.0;
    double empirical = 0.0;
    double simulated = 0.0;
};

struct AcfRow {
    std::size_t lag = 0;
    double empirical = 0.0;    // deseasonalised data
    double theoretical = 0.0;  // model
    double simulated = 0.0;    // average over simulations
};

struct MonthlyRow {
    int month = 0;
    double empirical = 0.0;  // mean rainfall per step
    double fitted = 0.0;     // monthly-mean S times E Delta Y
    double simulated = 0.0;  // average over simulations
};

struct EnsembleDiagnostics {
    std::vector<FrequencyRow> frequencies;
    std::vector<QuantilePair> quantiles;
    std::vector<AcfRow> acf;
    std::vector<MonthlyRow> monthly;
    double empirical_zero_proportion = 0.0;
    double simulated_zero_proportion = 0.0;  // average
    std::vector<double> zero_proportions;    // per simulation
};

struct DiagnosticsOptions {
    int n_sims = 20;
    std::size_t acf_lags = 10;
    int threads = 1;
};

/// Simulates n_sims series with the empirical grid (start, step, length, quantum),
/// re-applies the seasonality and compares them with the empirical series.
/// Simulation i uses seed stream_seed(config.seed, i); config.length and the
/// grid are taken from the empirical series.
EnsembleDiagnostics ensemble_diagnostics(const SimulationConfig& config, const SeasonalityModel& seasonality,
                                         const RainfallSeries& empirical, const DiagnosticsOptions& options);

/// frequencies.csv, qq.csv, acf.csv, monthly_means.csv and zero_proportion.csv in `dir`.
void write_diagnostics(const EnsembleDiagnostics& diagnostics, const std::filesystem::path& dir);

}  // namespace rainfall
