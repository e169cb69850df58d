#include "rainfall/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include "rainfall/error.hpp"
#include "rainfall/numerics.hpp"
#include "rainfall/random.hpp"

namespace rainfall {

// ---------------------------------------------------------------- MPR and contracts

EsscherMPR EsscherMPR::constant(double theta, double begin, double end) {
    if (!(begin < end)) throw InvalidArgument("MPR interval must have begin < end");
    return EsscherMPR{{{begin, end, theta}}};
}

void EsscherMPR::check_cover(double begin, double end) const {
    if (pieces.empty()) throw InvalidArgument("market price of risk has no pieces");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& pc = pieces[i];
        if (!std::isfinite(pc.theta)) throw InvalidArgument("market price of risk must be finite");
        if (!(pc.begin < pc.end)) throw InvalidArgument("MPR piece with begin >= end");
        if (i > 0 && pc.begin != pieces[i - 1].end) throw InvalidArgument("MPR pieces must be contiguous");
    }
    if (pieces.front().begin > begin || pieces.back().end < end)
        throw InvalidArgument("market price of risk does not cover the pricing horizon");
}

void EsscherMPR::check_bound(const HougaardParams& params) const {
    const double k = exp_moment_bound(params);
    if (!(sup() < k)) {
        std::ostringstream msg;
        msg << "market price of risk " << sup() << " is at or above the exponential-moment bound k = " << k
            << " (the price explodes)";
        throw DomainError(msg.str());
    }
}

double EsscherMPR::theta_at(double v) const {
    for (const auto& pc : pieces)
        if (v >= pc.begin && v <= pc.end) return pc.theta;
    throw InvalidArgument("market price of risk undefined at time " + std::to_string(v));
}

double EsscherMPR::sup() const {
    double s = -std::numeric_limits<double>::infinity();
    for (const auto& pc : pieces) s = std::max(s, pc.theta);
    return s;
}

double EsscherMPR::sup_abs() const {
    double s = 0.0;
    for (const auto& pc : pieces) s = std::max(s, std::abs(pc.theta));
    return s;
}

void SwapContract::check() const {
    if (!(t < tau1 && tau1 < tau2) || !std::isfinite(tau2))
        throw InvalidArgument("swap contract needs t < tau1 < tau2");
}

SwapContract monthly_contract(TimePoint valuation, int year, int month, Duration model_step) {
    using namespace std::chrono;
    if (month < 1 || month > 12) throw InvalidArgument("contract month must be in 1..12");
    if (model_step <= Duration::zero()) throw InvalidArgument("model step must be positive");
    const sys_days first{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} / 1};
    const sys_days next = first + days{days_in_month(year, month)};
    const double step = static_cast<double>(model_step.count());
    SwapContract c;
    c.t = 0.0;
    c.tau1 = static_cast<double>((TimePoint{first} - valuation).count()) / step;
    c.tau2 = static_cast<double>((TimePoint{next} - valuation).count()) / step;
    c.month = month;
    static constexpr const char* names[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                            "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    char label[16];
    std::snprintf(label, sizeof label, "%s-%02d", names[month - 1], ((year % 100) + 100) % 100);
    c.label = label;
    c.check();
    return c;
}

PayoffSpec PayoffSpec::swap() { return PayoffSpec{}; }

PayoffSpec PayoffSpec::capped_call(double strike, double cap) {
    if (!(cap > 0.0)) throw InvalidArgument("capped call needs a positive cap");
    PayoffSpec p;
    p.kind = Kind::capped_call;
    p.strike = strike;
    p.cap = cap;
    return p;
}

Complex capped_call_transform(double strike, double cap, double dampening, double xi) {
    if (!(dampening > 0.0)) throw InvalidArgument("capped call transform needs a positive dampening");
    const Complex s(dampening, xi);
    return std::exp(-s * strike) * (1.0 - std::exp(-s * cap)) / (s * s);
}

// ---------------------------------------------------------------- kernels

namespace {

double g_kernel(const CarmaSpec& spec, double tau, double v) {
    if (v >= tau) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.lambdas.size(); ++k) {
        const double l = spec.lambdas[k];
        acc -= spec.weights[k] * std::expm1(-l * (tau - v)) / l;
    }
    return acc;
}

/// Integral of swap_kernel over [a, b] within [t, tau2], in closed form.
double kernel_integral(const CarmaSpec& spec, const SwapContract& c, double a, double b) {
    // integral of g(tau, v) over [a, b] with b <= tau
    auto g_int = [&](double tau, double lo, double hi) {
        hi = std::min(hi, tau);
        if (!(hi > lo)) return 0.0;
        double acc = 0.0;
        for (std::size_t k = 0; k < spec.lambdas.size(); ++k) {
            const double l = spec.lambdas[k];
            const double e_hi = std::exp(-l * (tau - hi)), e_lo = std::exp(-l * (tau - lo));
            acc += spec.weights[k] / l * ((hi - lo) - (e_hi - e_lo) / l);
        }
        return acc;
    };
    return g_int(c.tau2, a, b) - g_int(c.tau1, a, b);
}

/// X_k(t) = integral of e^{-lambda_k (t - v)} dL(v) over v <= t, per component.
std::vector<double> past_state(const CarmaSpec& spec, const HougaardParams& params, const SwapContract& c,
                               const ObservedState& state) {
    const std::size_t p = spec.lambdas.size();
    std::vector<double> x(p);
    for (std::size_t k = 0; k < p; ++k) x[k] = params.mu / spec.lambdas[k];
    switch (state.kind) {
        case ObservedState::Kind::mean:
        case ObservedState::Kind::past_law:
            return x;
        case ObservedState::Kind::jumps:
            std::fill(x.begin(), x.end(), 0.0);
            for (const auto& j : state.jumps) {
                if (j.time > c.t) throw InvalidArgument("observed jumps must not lie after the valuation time");
                for (std::size_t k = 0; k < p; ++k) x[k] += j.size * std::exp(-spec.lambdas[k] * (c.t - j.time));
            }
            return x;
        case ObservedState::Kind::increments: {
            // Approximation: the Levy increment of each interval is placed at its midpoint,
            // starting from the stationary mean state before the first observation.
            const double d = state.increment_step;
            if (!(d > 0.0)) throw InvalidArgument("observed increment step must be positive");
            double carry = 0.0, mid = 0.0;
            std::vector<double> decay(p), half(p);
            for (std::size_t k = 0; k < p; ++k) {
                const double l = spec.lambdas[k];
                decay[k] = std::exp(-l * d);
                half[k] = std::exp(-0.5 * l * d);
                mid -= spec.weights[k] * std::expm1(-0.5 * l * d) / l;
            }
            for (double dy : state.increments) {
                carry = 0.0;
                for (std::size_t k = 0; k < p; ++k)
                    carry -= spec.weights[k] * x[k] * std::expm1(-spec.lambdas[k] * d) / spec.lambdas[k];
                const double dl = std::max(0.0, (dy - carry) / mid);
                for (std::size_t k = 0; k < p; ++k) x[k] = x[k] * decay[k] + dl * half[k];
            }
            return x;
        }
    }
    return x;
}

double past_contribution(const CarmaSpec& spec, const HougaardParams& params, const SwapContract& c,
                         const ObservedState& state) {
    const auto x = past_state(spec, params, c, state);
    double m = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double l = spec.lambdas[k];
        m += spec.weights[k] * x[k] * (std::exp(-l * (c.tau1 - c.t)) - std::exp(-l * (c.tau2 - c.t))) / l;
    }
    return m;
}

/// Breakpoints of [t, tau2]: tau1 and the MPR piece boundaries.
std::vector<double> breakpoints(const EsscherMPR& mpr, const SwapContract& c) {
    std::vector<double> pts{c.t, c.tau1, c.tau2};
    for (const auto& pc : mpr.pieces) {
        if (pc.begin > c.t && pc.begin < c.tau2) pts.push_back(pc.begin);
        if (pc.end > c.t && pc.end < c.tau2) pts.push_back(pc.end);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double kernel_sup(const CarmaSpec& spec, const SwapContract& c, bool include_past) {
    const double begin = include_past ? c.t - 40.0 / spec.lambdas.back() : c.t;
    double s = 0.0;
    constexpr int n = 4000;
    for (int i = 0; i <= n; ++i) s = std::max(s, std::abs(swap_kernel(spec, c, begin + (c.tau2 - begin) * i / n)));
    s = std::max(s, std::abs(swap_kernel(spec, c, c.tau1)));
    return 1.01 * s;
}

void check_inputs(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr, const SwapContract& c) {
    validate(spec, true);
    params.check();
    c.check();
    mpr.check_cover(c.t, c.tau2);
    mpr.check_bound(params);
}

}  // namespace

double swap_kernel(const CarmaSpec& spec, const SwapContract& contract, double v) {
    if (v >= contract.tau1) return g_kernel(spec, contract.tau2, v);
    // Before tau1 the difference of integrated kernels is formed term by term,
    // so jumps long before the window keep their tiny weight to full precision.
    const double width = contract.tau2 - contract.tau1;
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.lambdas.size(); ++k) {
        const double l = spec.lambdas[k];
        acc -= spec.weights[k] * std::exp(-l * (contract.tau1 - v)) * std::expm1(-l * width) / l;
    }
    return acc;
}

namespace {

// Exponent for validated inputs. `past` is the past part of the increment, or
// nullopt when the past is integrated out under the physical law.
Complex log_mgf_checked(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                        const SwapContract& contract, std::optional<double> past, Complex z, double rel_tol) {
    Complex total = 0.0;
    if (!past) {
        auto f = [&](double v) { return psi_theta(params, 0.0, z * swap_kernel(spec, contract, v)); };
        const double slow = 1.0 / spec.lambdas.back();
        total += numerics::integrate(f, contract.t - 40.0 * slow, contract.t - 5.0 * slow, rel_tol, 1e-15).value;
        total += numerics::integrate(f, contract.t - 5.0 * slow, contract.t, rel_tol, 1e-15).value;
    } else {
        total += z * *past;
    }
    // On [tau1, tau2] the kernel vanishes linearly at tau2, so psi_theta changes
    // over a layer of width about (k - theta) / (|z| slope) there. That segment is
    // integrated in the distance u = tau2 - v, which stays exact near tau2, on
    // pieces graded geometrically towards u = 0.
    double slope = 0.0;
    for (double w : spec.weights) slope += std::abs(w);
    const double k = exp_moment_bound(params);
    auto kernel_before_end = [&](double u) {
        double acc = 0.0;
        for (std::size_t j = 0; j < spec.lambdas.size(); ++j)
            acc -= spec.weights[j] * std::expm1(-spec.lambdas[j] * u) / spec.lambdas[j];
        return acc;
    };
    const auto pts = breakpoints(mpr, contract);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double theta = mpr.theta_at(0.5 * (pts[i] + pts[i + 1]));
        if (pts[i + 1] < contract.tau2) {
            auto f = [&](double v) { return psi_theta(params, theta, z * swap_kernel(spec, contract, v)); };
            total += numerics::integrate(f, pts[i], pts[i + 1], rel_tol, 1e-15).value;
            continue;
        }
        auto f = [&](double u) { return psi_theta(params, theta, z * kernel_before_end(u)); };
        const double layer = 0.1 * (k - theta) / std::max(std::abs(z) * slope, 1e-300);
        double hi = contract.tau2 - pts[i];
        for (; hi > 2.0 * layer; hi *= 0.5) total += numerics::integrate(f, 0.5 * hi, hi, rel_tol, 1e-15).value;
        total += numerics::integrate(f, 0.0, hi, rel_tol, 1e-15).value;
    }
    return total;
}

std::optional<double> past_part(const CarmaSpec& spec, const HougaardParams& params, const SwapContract& contract,
                                const ObservedState& state) {
    if (state.kind == ObservedState::Kind::past_law) return std::nullopt;
    return past_contribution(spec, params, contract, state);
}

}  // namespace

Complex conditional_log_mgf(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                            const SwapContract& contract, const ObservedState& state, Complex z) {
    check_inputs(spec, params, mpr, contract);
    return log_mgf_checked(spec, params, mpr, contract, past_part(spec, params, contract, state), z, 1e-12);
}

double swap_expectation(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                        const SwapContract& contract, const ObservedState& state) {
    check_inputs(spec, params, mpr, contract);
    const double k = exp_moment_bound(params);
    double value = past_contribution(spec, params, contract, state);
    const auto pts = breakpoints(mpr, contract);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double theta = mpr.theta_at(0.5 * (pts[i] + pts[i + 1]));
        const double tilted_mean = params.mu * std::pow(1.0 - theta / k, -1.0 / (params.kappa - 1.0));
        value += tilted_mean * kernel_integral(spec, contract, pts[i], pts[i + 1]);
    }
    return value;
}

double riskneutral_expectation(const PayoffSpec& payoff, const CarmaSpec& spec, const HougaardParams& params,
                               const EsscherMPR& mpr, const SwapContract& contract, const ObservedState& state) {
    check_inputs(spec, params, mpr, contract);
    const double k = exp_moment_bound(params);
    const bool past_law = state.kind == ObservedState::Kind::past_law;
    const double gmax = kernel_sup(spec, contract, past_law);
    const auto past = past_part(spec, params, contract, state);
    auto log_mgf = [&](Complex z, double rel_tol = 1e-12) {
        return log_mgf_checked(spec, params, mpr, contract, past, z, rel_tol);
    };

    if (payoff.kind == PayoffSpec::Kind::swap) {
        // Derivative of the exponent at zero from the Cauchy integral on a circle
        // inside the analyticity region |Re z| gmax + theta < k.
        const double theta_top = past_law ? std::max(mpr.sup(), 0.0) : mpr.sup();
        const double r = 0.5 * (k - theta_top) / gmax;
        constexpr int n = 64;
        Complex acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const Complex e = std::polar(1.0, 2.0 * std::numbers::pi * j / n);
            acc += log_mgf(r * e) / e;
        }
        return (acc / (static_cast<double>(n) * r)).real();
    }

    const double sup_abs = past_law ? std::max(mpr.sup_abs(), 0.0) : mpr.sup_abs();
    const double damp = std::isnan(payoff.dampening) ? 0.5 * (k - sup_abs) / gmax : payoff.dampening;
    if (!(damp > 0.0)) throw InvalidArgument("Fourier pricing needs a positive dampening");
    // Hypothesis of the Fourier representation, checked on a grid of [t, tau2].
    {
        const double begin = past_law ? contract.t - 40.0 / spec.lambdas.back() : contract.t;
        constexpr int n = 4000;
        for (int i = 0; i <= n; ++i) {
            const double v = begin + (contract.tau2 - begin) * i / n;
            const double theta = v < contract.t ? 0.0 : mpr.theta_at(v);
            if (!(damp * std::abs(swap_kernel(spec, contract, v)) + std::abs(theta) < k)) {
                std::ostringstream msg;
                msg << "Fourier hypothesis violated at v = " << v << ": dampening " << damp
                    << " times the kernel plus |theta| reaches the bound k = " << k;
                throw DomainError(msg.str());
            }
        }
    }
    std::function<Complex(double)> transform;
    if (payoff.kind == PayoffSpec::Kind::capped_call) {
        transform = [&](double xi) { return capped_call_transform(payoff.strike, payoff.cap, damp, xi); };
    } else {
        if (!payoff.transform || !payoff.value)
            throw InvalidArgument("custom payoff needs its dampened transform and its value function");
        transform = payoff.transform;
    }

    // Unless the past is integrated out, X equals its past part x0 when no jump
    // falls in [t, tau2]. That atom is priced directly: its transform does not
    // decay and would dominate the Fourier tail.
    double atom = 0.0, x0 = 0.0;
    if (!past_law) {
        x0 = *past;
        double mass = 0.0;
        const auto pts = breakpoints(mpr, contract);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            mass += tilted_cpg(params, mpr.theta_at(0.5 * (pts[i] + pts[i + 1]))).rate * (pts[i + 1] - pts[i]);
        atom = std::exp(-mass);
    }
    auto continuous_mgf = [&](double xi) {
        const Complex z(damp, xi);
        // Absolute accuracy of the exponent is what matters here.
        return std::exp(log_mgf(z, 1e-10)) - atom * std::exp(z * x0);
    };

    // E f = atom f(x0) + (1/pi) int_0^inf Re[ f_hat(xi) E_c exp((damp + i xi) X) ] dxi,
    // with f_hat the transform of exp(-damp x) f(x) and E_c the atom-free part.
    auto integrand = [&](double xi) { return (transform(xi) * continuous_mgf(xi)).real(); };
    double total = 0.0;
    double a = 0.0, b = 0.5;
    for (;;) {
        // Later segments only need absolute accuracy relative to the price so far.
        const double abs_tol = 1e-11 * std::max(std::abs(total), 1e-8);
        const double part = numerics::integrate(integrand, a, b, 1e-8, abs_tol, 15).value;
        total += part;
        // The tail oscillates, so beyond b it is bounded by the integrand size at b.
        const double envelope = std::abs(transform(b) * continuous_mgf(b));
        const double scale = std::max(std::abs(total), 1e-8);
        if (b >= 4.0 && envelope < 1e-9 * scale && std::abs(part) < 1e-9 * scale) break;
        if (b > 1e6) throw NumericError("Fourier integral did not decay by |xi| = 1e6");
        a = b;
        b *= 2.0;
    }
    if (atom > 0.0) {
        const double f0 = payoff.kind == PayoffSpec::Kind::capped_call
                              ? std::clamp(x0 - payoff.strike, 0.0, payoff.cap)
                              : payoff.value(x0);
        total += std::numbers::pi * atom * f0;
    }
    return total / std::numbers::pi;
}

double futures_price(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                     const SwapContract& contract, double seasonal_factor, const ObservedState& state) {
    if (!(seasonal_factor > 0.0)) throw InvalidArgument("seasonal factor must be positive");
    return seasonal_factor * swap_expectation(spec, params, mpr, contract, state);
}

double futures_price(const CarmaSpec& spec, const HougaardParams& params, const EsscherMPR& mpr,
                     const SwapContract& contract, const SeasonalityModel& seasonality, const ObservedState& state) {
    if (contract.month < 1 || contract.month > 12)
        throw InvalidArgument("contract has no calendar month for the seasonal factor");
    return futures_price(spec, params, mpr, contract, monthly_mean_seasonality(seasonality, contract.month), state);
}

double calibrate_theta(double market_price, const CarmaSpec& spec, const HougaardParams& params,
                       const SwapContract& contract, double seasonal_factor, const ObservedState& state) {
    if (!(market_price > 0.0)) throw InvalidArgument("market price must be positive");
    const double k = exp_moment_bound(params);
    auto price = [&](double theta) {
        return futures_price(spec, params, EsscherMPR::constant(theta, contract.t, contract.tau2), contract,
                             seasonal_factor, state);
    };
    const double lo = -50.0 * k, hi = k * (1.0 - 1e-9);
    const double p_lo = price(lo), p_hi = price(hi);
    if (!(p_lo <= market_price && market_price <= p_hi)) {
        std::ostringstream msg;
        msg << "market price " << market_price << " is not bracketed: model prices range from " << p_lo
            << " (theta = " << lo << ") to " << p_hi << " (theta = " << hi << ")";
        throw NumericError(msg.str());
    }
    // Price is increasing in theta; solve in log space for a well-scaled residual.
    return numerics::find_root([&](double th) { return std::log(price(th)) - std::log(market_price); }, lo, hi,
                               1e-15 * k, 400);
}

double calibrate_theta(double market_price, const CarmaSpec& spec, const HougaardParams& params,
                       const SwapContract& contract, const SeasonalityModel& seasonality, const ObservedState& state) {
    if (contract.month < 1 || contract.month > 12)
        throw InvalidArgument("contract has no calendar month for the seasonal factor");
    return calibrate_theta(market_price, spec, params, contract, monthly_mean_seasonality(seasonality, contract.month),
                           state);
}

CompoundPoissonGamma tilted_cpg(const HougaardParams& params, double theta) {
    auto cpg = tweedie_to_cpg(params);
    const double beta = 1.0 / cpg.scale;  // equals exp_moment_bound
    if (!(theta < beta)) throw DomainError("tilt at or beyond the exponential-moment bound");
    // Scale / (1 - theta scale) rather than 1 / (beta - theta): exact at theta = 0.
    const double shrink = 1.0 - theta * cpg.scale;
    cpg.rate *= std::pow(shrink, -cpg.shape);
    cpg.scale /= shrink;
    return cpg;
}

std::vector<Jump> tilted_simulation(const HougaardParams& params, double theta, double begin, double end,
                                    std::uint64_t seed) {
    if (!(begin < end)) throw InvalidArgument("tilted simulation needs begin < end");
    const auto cpg = tilted_cpg(params, theta);
    Rng rng(seed);
    return compound_poisson_jumps(cpg.rate, cpg.shape, cpg.scale, begin, end, rng);
}

}  // namespace rainfall
