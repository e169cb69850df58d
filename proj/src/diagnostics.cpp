#include "rainfall/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "parallel.hpp"
#include "rainfall/error.hpp"

namespace rainfall {

namespace {

std::size_t bin_of(double value, double quantum, std::size_t top_bin) {
    const double k = std::floor(value / quantum + 1e-9);
    if (k >= static_cast<double>(top_bin)) return top_bin;
    return static_cast<std::size_t>(std::max(k, 0.0));
}

std::array<double, 12> monthly_means(const RainfallSeries& s) {
    std::array<double, 12> sum{}, count{};
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto m = static_cast<std::size_t>(month_of(s.time_at(i)) - 1);
        sum[m] += s.values[i];
        count[m] += 1.0;
    }
    for (std::size_t m = 0; m < 12; ++m) sum[m] = count[m] > 0 ? sum[m] / count[m] : std::nan("");
    return sum;
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(12);
    return out;
}

}  // namespace

EnsembleDiagnostics ensemble_diagnostics(const SimulationConfig& config, const SeasonalityModel& seasonality,
                                         const RainfallSeries& empirical, const DiagnosticsOptions& options) {
    if (options.n_sims < 1) throw InvalidArgument("diagnostics need n_sims >= 1");
    if (empirical.size() <= options.acf_lags) throw InvalidArgument("empirical series too short for the ACF lags");
    const auto n_sims = static_cast<std::size_t>(options.n_sims);

    std::vector<RainfallSeries> sims(n_sims);
    detail::parallel_for(n_sims, options.threads, [&](std::size_t i) {
        SimulationConfig c = config;
        c.length = empirical.size();
        c.seed = stream_seed(config.seed, i);
        const auto dy = simulate_increments(c);
        sims[i] = apply_seasonality(dy, seasonality, empirical.start_time, empirical.step, empirical.unit,
                                    empirical.quantum);
    });

    EnsembleDiagnostics out;
    const double q = empirical.quantum;

    // (a) frequency table with the top 1% of the value range grouped.
    double top = *std::max_element(empirical.values.begin(), empirical.values.end());
    for (const auto& s : sims) top = std::max(top, *std::max_element(s.values.begin(), s.values.end()));
    const auto top_bin = static_cast<std::size_t>(std::max(1.0, std::floor(0.99 * top / q)));
    out.frequencies.resize(top_bin + 1);
    for (std::size_t b = 0; b <= top_bin; ++b) {
        out.frequencies[b].lower = static_cast<double>(b) * q;
        out.frequencies[b].upper = b == top_bin ? std::numeric_limits<double>::infinity() : static_cast<double>(b + 1) * q;
    }
    for (double v : empirical.values) out.frequencies[bin_of(v, q, top_bin)].empirical += 1.0;
    for (const auto& s : sims)
        for (double v : s.values) out.frequencies[bin_of(v, q, top_bin)].simulated += 1.0 / static_cast<double>(n_sims);

    // (b) QQ pairs from pooled simulations.
    std::vector<double> pooled;
    pooled.reserve(n_sims * empirical.size());
    for (const auto& s : sims) pooled.insert(pooled.end(), s.values.begin(), s.values.end());
    std::sort(pooled.begin(), pooled.end());
    std::vector<double> emp_sorted = empirical.values;
    std::sort(emp_sorted.begin(), emp_sorted.end());
    auto sorted_quantile = [](const std::vector<double>& v, double level) {
        const double pos = level * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    for (int i = 1; i <= 999; ++i) {
        const double level = i / 1000.0;
        out.quantiles.push_back({level, sorted_quantile(emp_sorted, level), sorted_quantile(pooled, level)});
    }

    // (c) ACF of the deseasonalised data against the model and the simulations.
    const auto emp_acf = sample_acf(deseasonalise(empirical, seasonality), options.acf_lags);
    const auto theo = acvf_increments(config.spec, config.params.variance(), config.delta, options.acf_lags);
    std::vector<double> sim_acf(options.acf_lags, 0.0);
    for (const auto& s : sims) {
        const auto a = sample_acf(deseasonalise(s, seasonality), options.acf_lags);
        for (std::size_t h = 0; h < a.size(); ++h) sim_acf[h] += a[h] / static_cast<double>(n_sims);
    }
    for (std::size_t h = 1; h <= options.acf_lags; ++h)
        out.acf.push_back({h, emp_acf[h - 1], theo[h] / theo[0], sim_acf[h - 1]});

    // (d) monthly means per step.
    const double mean_dy = cumulants_increment(config.spec, config.params, config.delta, 1);
    const auto emp_months = monthly_means(empirical);
    std::array<double, 12> sim_months{};
    for (const auto& s : sims) {
        const auto m = monthly_means(s);
        for (std::size_t k = 0; k < 12; ++k) sim_months[k] += m[k] / static_cast<double>(n_sims);
    }
    for (int m = 1; m <= 12; ++m) {
        const auto k = static_cast<std::size_t>(m - 1);
        out.monthly.push_back({m, emp_months[k], monthly_mean_seasonality(seasonality, m) * mean_dy, sim_months[k]});
    }

    // (e) zero proportions.
    out.empirical_zero_proportion = zero_proportion(empirical.values, q);
    for (const auto& s : sims) out.zero_proportions.push_back(implied_zero_proportion(s));
    for (double z : out.zero_proportions) out.simulated_zero_proportion += z / static_cast<double>(n_sims);
    return out;
}

void write_diagnostics(const EnsembleDiagnostics& d, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_csv(dir / "frequencies.csv");
        out << "lower,upper,empirical_count,simulated_mean_count\n";
        for (const auto& r : d.frequencies)
            out << r.lower << ',' << (std::isinf(r.upper) ? std::string("inf") : std::to_string(r.upper)) << ','
                << r.empirical << ',' << r.simulated << '\n';
    }
    {
        auto out = open_csv(dir / "qq.csv");
        out << "level,empirical,simulated\n";
        for (const auto& r : d.quantiles) out << r.level << ',' << r.empirical << ',' << r.simulated << '\n';
    }
    {
        auto out = open_csv(dir / "acf.csv");
        out << "lag,empirical,theoretical,simulated\n";
        for (const auto& r : d.acf) out << r.lag << ',' << r.empirical << ',' << r.theoretical << ',' << r.simulated << '\n';
    }
    {
        auto out = open_csv(dir / "monthly_means.csv");
        out << "month,empirical,fitted,simulated\n";
        for (const auto& r : d.monthly) out << r.month << ',' << r.empirical << ',' << r.fitted << ',' << r.simulated << '\n';
    }
    {
        auto out = open_csv(dir / "zero_proportion.csv");
        out << "series,zero_proportion\n";
        out << "data," << d.empirical_zero_proportion << '\n';
        out << "simulation_average," << d.simulated_zero_proportion << '\n';
        for (std::size_t i = 0; i < d.zero_proportions.size(); ++i)
            out << "simulation_" << i << ',' << d.zero_proportions[i] << '\n';
    }
}

}  // namespace rainfall
