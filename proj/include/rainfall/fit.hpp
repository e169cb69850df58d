#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rainfall/carma.hpp"
#include "rainfall/hougaard.hpp"
#include "rainfall/random.hpp"
#include "rainfall/seasonality.hpp"
#include "rainfall/series.hpp"

namespace rainfall {

struct CarmaFitOptions {
    bool allow_negative_weights = false;
    int restarts = 3;           // perturbed restarts after the ACF-matched start
    int max_iterations = 2000;  // per simplex run
    double tolerance = 1e-7;    // simplex size at convergence
    std::uint64_t seed = 0x5eed;  // perturbations of the restarts
};

struct CarmaFit {
    CarmaSpec spec;
    CarmaSpec initial;
    double objective = 0.0;          // weighted SSE at spec
    double initial_objective = 0.0;  // weighted SSE at the ACF-matched start
    int evaluations = 0;
    bool converged = false;
    Warnings warnings;
};

/// Kernel matching the sample autocovariances at lags 0..2p (only lag 1 when p = 1):
/// decay rates from the geometric structure of C(h), h >= 1, then weights from the
/// amplitudes. On exact autocovariances of a CARMA model it recovers (lambda, w).
CarmaSpec initial_carma_guess(std::span<const double> acvf, int p, double delta);

/// Minimises the innovations-weighted one-step prediction SSE of the implied
/// ARMA(p, p) over log-rates and softmax weights (Nelder-Mead with restarts).
CarmaFit fit_carma_params(std::span<const double> deseasonalised, int p, double delta,
                          const CarmaFitOptions& options = {});

/// Objective of fit_carma_params at a given kernel; +inf if the implied ARMA is degenerate.
double carma_objective(const CarmaSpec& spec, double delta, std::span<const double> data);

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;      // biased
    double third_central = 0.0;  // biased
};

SampleMoments sample_moments(std::span<const double> x);

/// Method of moments for (mu, rho, kappa) given the kernel: the mean fixes mu,
/// the variance fixes rho * mu^kappa and the third cumulant then fixes kappa.
HougaardParams fit_levy_params(std::span<const double> deseasonalised, const CarmaSpec& spec, double delta);
HougaardParams levy_params_from_moments(const SampleMoments& moments, const CarmaSpec& spec, double delta);

struct FitDiagnostics {
    double objective = 0.0;
    double initial_objective = 0.0;
    int evaluations = 0;
    bool converged = false;
    SampleMoments moments;
    Warnings warnings;
};

struct FittedModel {
    SeasonalityModel seasonality;
    CarmaSpec carma;
    HougaardParams hougaard;
    double delta = 1.0;  // increment length in the time unit of the rates
    // Grid of the data the model was fitted to; one model time unit is one step.
    Duration step{std::chrono::hours(24)};
    Unit unit = Unit::mm;
    double quantum = 0.1;
    FitDiagnostics diagnostics;
};

struct ModelFitOptions {
    int p = 1;
    double delta = 1.0;
    int max_seasonality_order = 5;
    CarmaFitOptions carma;
};

/// Seasonality, then the kernel, then the Levy parameters.
FittedModel fit_model(const RainfallSeries& series, const ModelFitOptions& options);

// ---------------------------------------------------------------- bootstrap

/// Indices of one stationary-bootstrap replicate of a length-n series: each
/// position starts a new block at a uniform index with probability 1/mean_block,
/// otherwise continues the current block (wrapping around the end).
std::vector<std::size_t> stationary_bootstrap_indices(std::size_t n, double mean_block, Rng& rng);

/// B replicates; replicate r uses the stream stream_seed(seed, r).
std::vector<std::vector<double>> stationary_bootstrap(std::span<const double> series, double mean_block,
                                                      int replicates, std::uint64_t seed);

/// Linear-interpolation percentile (q in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

struct ParameterInterval {
    std::string name;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> replicates;
};

struct BootstrapResult {
    std::vector<ParameterInterval> parameters;
    int failed = 0;
    Warnings warnings;
};

struct BootstrapOptions {
    double mean_block = 10.0;
    int replicates = 500;
    std::uint64_t seed = 0;
    int threads = 1;
    CarmaFitOptions carma;
};

/// Parameter names in reporting order: w1..w_{p-1}, lambda (or lambda1..lambda_p), mu, rho, kappa.
std::vector<std::string> parameter_names(int p);
std::vector<double> parameter_vector(const CarmaSpec& spec, const HougaardParams& params);

/// Percentile 95% intervals from refitting the kernel and Levy parameters on
/// each replicate. Failed refits are dropped; more than 10% failures is an error.
BootstrapResult bootstrap_cis(std::span<const double> deseasonalised, int p, double delta,
                              const BootstrapOptions& options);

struct BlockCalibration {
    double chosen = 0.0;
    std::vector<double> candidates;
    std::vector<double> coverage;  // averaged over parameters, per candidate
};

struct BlockCalibrationOptions {
    std::vector<double> candidates{5, 10, 20, 50, 100, 200};
    int replications = 50;
    int bootstrap_replicates = 200;
    std::size_t length = 0;  // simulated series length
    std::uint64_t seed = 0;
    int threads = 1;
    CarmaFitOptions carma;
};

/// Simulates from the fitted model, bootstraps each simulated series at every
/// candidate mean block and returns the candidate whose coverage of the true
/// parameters is closest to 95% (ties go to the smaller block).
BlockCalibration calibrate_block_size(const FittedModel& model, const BlockCalibrationOptions& options);

}  // namespace rainfall
