#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "parallel.hpp"
#include "rainfall/error.hpp"
#include "rainfall/fit.hpp"
#include "rainfall/simulate.hpp"

namespace rainfall {

std::vector<std::size_t> stationary_bootstrap_indices(std::size_t n, double mean_block, Rng& rng) {
    if (n == 0) throw InvalidArgument("bootstrap of an empty series");
    if (!(mean_block >= 1.0)) throw InvalidArgument("mean block length must be >= 1");
    const double p_new = 1.0 / mean_block;
    std::vector<std::size_t> idx(n);
    std::size_t current = rng.below(n);
    idx[0] = current;
    for (std::size_t i = 1; i < n; ++i) {
        if (rng.uniform() < p_new) {
            current = rng.below(n);
        } else {
            current = (current + 1) % n;
        }
        idx[i] = current;
    }
    return idx;
}

std::vector<std::vector<double>> stationary_bootstrap(std::span<const double> series, double mean_block,
                                                      int replicates, std::uint64_t seed) {
    if (replicates < 1) throw InvalidArgument("bootstrap needs at least one replicate");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(replicates));
    for (std::size_t r = 0; r < out.size(); ++r) {
        Rng rng(stream_seed(seed, r));
        const auto idx = stationary_bootstrap_indices(series.size(), mean_block, rng);
        out[r].resize(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) out[r][i] = series[idx[i]];
    }
    return out;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgument("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("percentile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<std::string> parameter_names(int p) {
    std::vector<std::string> names;
    for (int i = 1; i < p; ++i) names.push_back("w" + std::to_string(i));
    if (p == 1) {
        names.push_back("lambda");
    } else {
        for (int i = 1; i <= p; ++i) names.push_back("lambda" + std::to_string(i));
    }
    names.insert(names.end(), {"mu", "rho", "kappa"});
    return names;
}

std::vector<double> parameter_vector(const CarmaSpec& spec, const HougaardParams& params) {
    std::vector<double> v(spec.weights.begin(), spec.weights.end() - 1);
    v.insert(v.end(), spec.lambdas.begin(), spec.lambdas.end());
    v.insert(v.end(), {params.mu, params.rho, params.kappa});
    return v;
}

BootstrapResult bootstrap_cis(std::span<const double> deseasonalised, int p, double delta,
                              const BootstrapOptions& options) {
    if (options.replicates < 1) throw InvalidArgument("bootstrap needs at least one replicate");
    const auto point_fit = fit_carma_params(deseasonalised, p, delta, options.carma);
    const auto point_levy = fit_levy_params(deseasonalised, point_fit.spec, delta);
    const auto estimate = parameter_vector(point_fit.spec, point_levy);

    const auto b = static_cast<std::size_t>(options.replicates);
    std::vector<std::optional<std::vector<double>>> results(b);
    std::vector<std::string> errors(b);
    detail::parallel_for(b, options.threads, [&](std::size_t r) {
        Rng rng(stream_seed(options.seed, r));
        const auto idx = stationary_bootstrap_indices(deseasonalised.size(), options.mean_block, rng);
        std::vector<double> sample(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) sample[i] = deseasonalised[idx[i]];
        try {
            const auto fit = fit_carma_params(sample, p, delta, options.carma);
            const auto levy = fit_levy_params(sample, fit.spec, delta);
            results[r] = parameter_vector(fit.spec, levy);
        } catch (const std::exception& e) {
            errors[r] = e.what();
        }
    });

    BootstrapResult out;
    const auto names = parameter_names(p);
    for (std::size_t k = 0; k < names.size(); ++k) out.parameters.push_back({names[k], estimate[k], 0.0, 0.0, {}});
    for (std::size_t r = 0; r < b; ++r) {
        if (!results[r]) {
            ++out.failed;
            out.warnings.push_back("replicate " + std::to_string(r) + " dropped: " + errors[r]);
            continue;
        }
        for (std::size_t k = 0; k < names.size(); ++k) out.parameters[k].replicates.push_back((*results[r])[k]);
    }
    if (static_cast<double>(out.failed) > 0.1 * static_cast<double>(b))
        throw NumericError(std::to_string(out.failed) + " of " + std::to_string(b) +
                           " bootstrap refits failed (more than 10%)");
    for (auto& param : out.parameters) {
        param.lower = percentile(param.replicates, 0.025);
        param.upper = percentile(param.replicates, 0.975);
    }
    return out;
}

BlockCalibration calibrate_block_size(const FittedModel& model, const BlockCalibrationOptions& options) {
    if (options.candidates.empty()) throw InvalidArgument("block-size calibration needs at least one candidate");
    for (double c : options.candidates)
        if (!(c >= 1.0)) throw InvalidArgument("candidate mean block lengths must be >= 1");
    BlockCalibration out;
    out.candidates = options.candidates;
    if (options.candidates.size() == 1) {
        out.chosen = options.candidates.front();
        out.coverage.assign(1, std::numeric_limits<double>::quiet_NaN());
        return out;
    }
    if (options.replications < 1) throw InvalidArgument("block-size calibration needs at least one replication");
    if (options.length < 100) throw InvalidArgument("block-size calibration needs simulated length >= 100");

    const auto truth = parameter_vector(model.carma, model.hougaard);
    const int p = model.carma.p();
    const auto reps = static_cast<std::size_t>(options.replications);
    const std::size_t nc = options.candidates.size();
    // hits[rep * nc + c] = fraction of parameters covered
    std::vector<double> hits(reps * nc, 0.0);
    detail::parallel_for(reps, options.threads, [&](std::size_t rep) {
        SimulationConfig sim;
        sim.spec = model.carma;
        sim.params = model.hougaard;
        sim.length = options.length;
        sim.delta = model.delta;
        sim.seed = stream_seed(options.seed, rep);
        const auto x = simulate_increments(sim);
        for (std::size_t c = 0; c < nc; ++c) {
            BootstrapOptions boot;
            boot.mean_block = options.candidates[c];
            boot.replicates = options.bootstrap_replicates;
            boot.seed = stream_seed(~options.seed, rep);  // common random numbers across candidates
            boot.threads = 1;
            boot.carma = options.carma;
            const auto ci = bootstrap_cis(x, p, model.delta, boot);
            double covered = 0.0;
            for (std::size_t k = 0; k < truth.size(); ++k)
                if (ci.parameters[k].lower <= truth[k] && truth[k] <= ci.parameters[k].upper) covered += 1.0;
            hits[rep * nc + c] = covered / static_cast<double>(truth.size());
        }
    });

    out.coverage.assign(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t rep = 0; rep < reps; ++rep) out.coverage[c] += hits[rep * nc + c];
        out.coverage[c] /= static_cast<double>(reps);
    }
    std::vector<std::size_t> order(nc);
    for (std::size_t c = 0; c < nc; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = std::abs(out.coverage[a] - 0.95), db = std::abs(out.coverage[b] - 0.95);
        if (da != db) return da < db;
        return options.candidates[a] < options.candidates[b];
    });
    out.chosen = options.candidates[order.front()];
    return out;
}

}  // namespace rainfall
