#include "rainfall/simulate.hpp"

#include <cmath>

#include "rainfall/error.hpp"

namespace rainfall {

void SimulationConfig::check() const {
    validate(spec, true);
    params.check();
    if (length < 1) throw InvalidArgument("simulation length must be >= 1");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("simulation step must be positive");
    if (burn_in && (!(*burn_in >= 0.0) || !std::isfinite(*burn_in)))
        throw InvalidArgument("burn-in must be non-negative");
    if (forced_rate && !(*forced_rate >= 0.0)) throw InvalidArgument("forced jump rate must be non-negative");
}

double SimulationConfig::effective_burn_in() const {
    return burn_in ? *burn_in : 40.0 / spec.lambdas.back();
}

std::vector<Jump> compound_poisson_jumps(double rate, double shape, double scale, double begin,
                                         double end, Rng& rng) {
    std::vector<Jump> jumps;
    if (!(rate > 0.0)) return jumps;
    for (double t = begin + rng.exponential(rate); t <= end; t += rng.exponential(rate))
        jumps.push_back({t, rng.gamma(shape, scale)});
    return jumps;
}

std::vector<double> increments_from_jumps(const CarmaSpec& spec, const JumpSource& next, double delta,
                                          std::size_t length) {
    validate(spec, true);
    if (!(delta > 0.0)) throw InvalidArgument("increment step must be positive");
    const std::size_t p = spec.lambdas.size();
    // state[k] = sum over past jumps of J e^{-lambda_k (t - T)} at the current grid time t.
    std::vector<double> state(p, 0.0), decay(p), carry(p);
    for (std::size_t k = 0; k < p; ++k) {
        decay[k] = std::exp(-spec.lambdas[k] * delta);
        carry[k] = -spec.weights[k] * std::expm1(-spec.lambdas[k] * delta) / spec.lambdas[k];
    }

    std::optional<Jump> pending = next();
    // Warm-up: jumps before time 0 only feed the state.
    double clock = pending ? std::min(pending->time, 0.0) : 0.0;
    while (pending && pending->time <= 0.0) {
        for (std::size_t k = 0; k < p; ++k)
            state[k] = state[k] * std::exp(-spec.lambdas[k] * (pending->time - clock)) + pending->size;
        clock = pending->time;
        pending = next();
    }
    for (std::size_t k = 0; k < p; ++k) state[k] *= std::exp(-spec.lambdas[k] * (0.0 - clock));

    std::vector<double> out(length, 0.0);
    for (std::size_t i = 0; i < length; ++i) {
        const double end = static_cast<double>(i + 1) * delta;
        double inc = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            inc += carry[k] * state[k];
            state[k] *= decay[k];
        }
        while (pending && pending->time <= end) {
            const double age = end - pending->time;
            for (std::size_t k = 0; k < p; ++k) {
                const double l = spec.lambdas[k];
                inc += -spec.weights[k] * pending->size * std::expm1(-l * age) / l;
                state[k] += pending->size * std::exp(-l * age);
            }
            pending = next();
        }
        out[i] = inc;
    }
    return out;
}

std::vector<double> increments_from_jumps(const CarmaSpec& spec, std::span<const Jump> jumps, double delta,
                                          std::size_t length) {
    for (std::size_t j = 1; j < jumps.size(); ++j)
        if (jumps[j].time < jumps[j - 1].time) throw InvalidArgument("jumps must be sorted by time");
    std::size_t pos = 0;
    JumpSource source = [&]() -> std::optional<Jump> {
        if (pos < jumps.size()) return jumps[pos++];
        return std::nullopt;
    };
    return increments_from_jumps(spec, source, delta, length);
}

std::vector<double> simulate_increments(const SimulationConfig& config) {
    config.check();
    const auto cpg = tweedie_to_cpg(config.params);
    const double rate = config.forced_rate ? *config.forced_rate : cpg.rate;
    if (rate == 0.0) return std::vector<double>(config.length, 0.0);

    Rng rng(config.seed);
    const double horizon = static_cast<double>(config.length) * config.delta;
    double t = -config.effective_burn_in();
    JumpSource source = [&]() -> std::optional<Jump> {
        t += rng.exponential(rate);
        if (t > horizon) return std::nullopt;
        return Jump{t, rng.gamma(cpg.shape, cpg.scale)};
    };
    return increments_from_jumps(config.spec, source, config.delta, config.length);
}

RainfallSeries apply_seasonality(std::span<const double> increments, const SeasonalityModel& model,
                                 TimePoint start, Duration step, Unit unit, double quantum) {
    model.check();
    RainfallSeries out;
    out.start_time = start;
    out.step = step;
    out.unit = unit;
    out.quantum = quantum;
    const auto s = seasonal_factors(model, start, step, increments.size());
    out.values.resize(increments.size());
    for (std::size_t i = 0; i < increments.size(); ++i) out.values[i] = s[i] * increments[i];
    validate(out);
    return out;
}

double implied_zero_proportion(const RainfallSeries& series) {
    if (!(series.quantum > 0.0)) throw InvalidArgument("quantum must be positive");
    return zero_proportion(series.values, series.quantum);
}

}  // namespace rainfall
