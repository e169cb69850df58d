#pragma once

#include <span>
#include <vector>

#include "rainfall/series.hpp"

namespace rainfall {

/// Truncated Fourier series with an annual period on the monthly time scale:
///   S(t) = a0/2 + sum_i a[i] cos(2 pi (i+1) t / 12) + b[i] sin(2 pi (i+1) t / 12)
struct SeasonalityModel {
    int order = 0;
    double a0 = 2.0;
    std::vector<double> a;
    std::vector<double> b;

    static constexpr double period = 12.0;

    int parameter_count() const { return 2 * order + 1; }
    /// Throws InvalidArgument when the coefficient vectors disagree with order.
    void check() const;
};

struct SeasonalityFit {
    SeasonalityModel model;
    std::vector<double> monthly_means;  // empirical, January first
    std::vector<double> aic;            // per candidate order 0..max_order
};

/// OLS fit of the Fourier series to the 12 pooled empirical monthly means, with
/// the truncation order chosen by the Gaussian AIC N log(RSS/N) + 2k.
/// Covariates are evaluated at month centres t = m + 0.5.
SeasonalityFit fit_seasonality(const RainfallSeries& series, int max_order = 5);
/// Same, starting from the 12 monthly means directly.
SeasonalityFit fit_seasonality_to_means(std::span<const double> monthly_means, int max_order = 5);

double evaluate_seasonality(const SeasonalityModel& model, double t);

/// Average of S over calendar month `month` (1..12), i.e. over [month-1, month).
/// Throws DomainError when the average is not positive.
double monthly_mean_seasonality(const SeasonalityModel& model, int month);

/// Increment i divided by S at the left endpoint of its interval.
std::vector<double> deseasonalise(const RainfallSeries& series, const SeasonalityModel& model);

/// S(t_{i-1}) at every grid point of the series; throws DomainError if any is <= 0.
std::vector<double> seasonal_factors(const SeasonalityModel& model, TimePoint start, Duration step,
                                     std::size_t n);

}  // namespace rainfall
