#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rainfall/carma.hpp"
#include "rainfall/hougaard.hpp"
#include "rainfall/seasonality.hpp"
#include "rainfall/series.hpp"
#include "rainfall/simulate.hpp"

namespace rainfall {

// Pricing works on the model time axis: the unit is the one the decay rates are
// expressed in (one grid step of the fitted series), with the valuation time
// usually placed at 0. Interest rates are zero.

/// Piecewise-constant market price of risk theta(v).
struct EsscherMPR {
    struct Piece {
        double begin = 0.0;
        double end = 0.0;
        double theta = 0.0;
    };
    std::vector<Piece> pieces;  // contiguous and ordered

    static EsscherMPR constant(double theta, double begin, double end);

    /// Throws InvalidArgument unless the pieces are ordered, contiguous and cover [begin, end].
    void check_cover(double begin, double end) const;
    /// Throws DomainError unless sup theta < exp_moment_bound(params).
    void check_bound(const HougaardParams& params) const;
    double theta_at(double v) const;
    double sup() const;
    double sup_abs() const;
};

/// Payoff Y(tau2) - Y(tau1) observed at valuation time t < tau1 < tau2.
struct SwapContract {
    double t = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    int month = 0;  // calendar month of the accumulation window, 1..12 (0 if not a calendar month)
    std::string label;

    void check() const;
};

/// Calendar-month contract valued at `valuation`; the model step converts days to model time.
SwapContract monthly_contract(TimePoint valuation, int year, int month, Duration model_step);

/// How the F_t-measurable part (jumps up to the valuation time) enters the price.
struct ObservedState {
    enum class Kind {
        mean,        // replaced by its expectation (default)
        past_law,    // integrated out under the physical measure
        jumps,       // exact: the past jumps of L are given
        increments,  // approximate: state reconstructed from past increments
    };
    Kind kind = Kind::mean;
    std::vector<Jump> jumps;          // times <= contract.t
    std::vector<double> increments;   // consecutive Delta Y ending at contract.t
    double increment_step = 1.0;
};

struct PayoffSpec {
    enum class Kind {
        swap,         // f(x) = x
        capped_call,  // f(x) = min(max(x - strike, 0), cap)
        custom,       // f given through its dampened transform
    };
    Kind kind = Kind::swap;
    double strike = 0.0;
    double cap = 0.0;
    /// Dampening of the Fourier integral; NaN selects half of the admissible maximum.
    double dampening = std::numeric_limits<double>::quiet_NaN();
    /// int f(x) e^{-(dampening + i xi) x} dx, for Kind::custom.
    std::function<Complex(double xi)> transform;
    /// f itself, for Kind::custom; prices the point mass of the terminal value
    /// when no jump falls in the remaining window.
    std::function<double(double x)> value;

    static PayoffSpec swap();
    static PayoffSpec capped_call(double strike, double cap);
};

/// Dampened transform of the capped call: e^{-sK} (1 - e^{-sC}) / s^2 with s = dampening + i xi.
Complex capped_call_transform(double strike, double cap, double dampening, double xi);

/// Weight of a jump at time v in Y(tau2) - Y(tau1):
/// g(tau2, v) - g(tau1, v) with g(t, v) = sum_k w_k (1 - e^{-lambda_k (t - v)}) / lambda_k for v < t.
double swap_kernel(const CarmaSpec& spec, const SwapContract& contract, double v);

/// log E_Q[exp(z (Y(tau2) - Y(tau1))) | F_t] for complex z, by time quadrature of psi_theta.
Complex conditional_log_mgf(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                            const SwapContract& contract, const ObservedState& state, Complex z);

/// E_Q[f(Y(tau2) - Y(tau1)) | F_t]. The swap is valued by differentiating the
/// exponent at zero on a Cauchy contour; other payoffs by Fourier inversion with
/// dampening, after checking sup (dampening |kernel| + |theta|) < k.
double riskneutral_expectation(const PayoffSpec& payoff, const CarmaSpec& spec, const HougaardParams& params,
                               const EsscherMPR& mpr, const SwapContract& contract,
                               const ObservedState& state = {});

/// E_Q[Y(tau2) - Y(tau1) | F_t] in closed form, using -i psi_theta'(v, 0) = mu (1 - theta/k)^(-1/(kappa-1)).
double swap_expectation(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                        const SwapContract& contract, const ObservedState& state = {});

/// seasonal_factor * swap_expectation.
double futures_price(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                     const SwapContract& contract, double seasonal_factor, const ObservedState& state = {});
/// Uses the monthly average of the seasonality over contract.month.
double futures_price(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                     const SwapContract& contract, const SeasonalityModel& seasonality,
                     const ObservedState& state = {});

/// Constant theta on [t, tau2] matching the market price, by bracketed root finding
/// on (-50 k, k (1 - 1e-9)).
double calibrate_theta(double market_price, const CarmaSpec& spec, const HougaardParams& params,
                       const SwapContract& contract, double seasonal_factor, const ObservedState& state = {});
double calibrate_theta(double market_price, const CarmaSpec& spec, const HougaardParams& params,
                       const SwapContract& contract, const SeasonalityModel& seasonality,
                       const ObservedState& state = {});

/// Compound-Poisson-Gamma law of L under the Esscher measure with constant theta:
/// Gamma jumps with rate parameter 1/scale - theta and intensity rate (k / (k - theta))^shape.
CompoundPoissonGamma tilted_cpg(const HougaardParams& params, double theta);

/// Jumps of L on (begin, end] under the tilted measure.
std::vector<Jump> tilted_simulation(const HougaardParams& params, double theta, double begin, double end,
                                    std::uint64_t seed);

}  // namespace rainfall
