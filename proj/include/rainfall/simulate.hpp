#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rainfall/carma.hpp"
#include "rainfall/hougaard.hpp"
#include "rainfall/random.hpp"
#include "rainfall/seasonality.hpp"
#include "rainfall/series.hpp"

namespace rainfall {

struct SimulationConfig {
    CarmaSpec spec;
    HougaardParams params;
    std::size_t length = 0;  // number of increments
    double delta = 1.0;      // grid step, in the time unit of the rates
    std::uint64_t seed = 0;
    /// Warm-up span before time 0; defaults to 40 / min(lambda).
    std::optional<double> burn_in;
    /// Overrides the jump arrival rate of the compound-Poisson representation.
    std::optional<double> forced_rate;

    void check() const;
    double effective_burn_in() const;
};

struct Jump {
    double time = 0.0;
    double size = 0.0;
};

/// Yields jumps in increasing time order; std::nullopt ends the stream.
using JumpSource = std::function<std::optional<Jump>()>;

/// Compound Poisson jumps with Gamma(shape, scale) sizes on (begin, end].
std::vector<Jump> compound_poisson_jumps(double rate, double shape, double scale, double begin,
                                         double end, Rng& rng);

/// Integrated increments of Y over [i delta, (i+1) delta], i = 0..length-1, for a
/// given jump stream. Jumps before time 0 build the initial state; every kernel
/// integral is evaluated in closed form.
std::vector<double> increments_from_jumps(const CarmaSpec& spec, std::span<const Jump> jumps, double delta,
                                          std::size_t length);
std::vector<double> increments_from_jumps(const CarmaSpec& spec, const JumpSource& next, double delta,
                                          std::size_t length);

/// Exact path simulation of Delta Y from the compound-Poisson representation of L,
/// started from a burn-in instead of the stationary law of X(0).
std::vector<double> simulate_increments(const SimulationConfig& config);

/// Rainfall increments S(t_{i-1}) * Delta Y_i on the grid starting at `start`.
RainfallSeries apply_seasonality(std::span<const double> increments, const SeasonalityModel& model,
                                 TimePoint start, Duration step, Unit unit, double quantum);

/// Fraction of increments that round to zero at the series quantum.
double implied_zero_proportion(const RainfallSeries& series);

}  // namespace rainfall
