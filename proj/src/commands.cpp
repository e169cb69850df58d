#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "parallel.hpp"
#include "rainfall/diagnostics.hpp"
#include "rainfall/error.hpp"
#include "rainfall/fit.hpp"
#include "rainfall/pricing.hpp"
#include "rainfall/simulate.hpp"

namespace rainfall {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- config access

const Json& require(const Json& config, const char* name) {
    if (!config.contains(name) || config.at(name).is_null())
        throw InvalidArgument(std::string("config: missing field '") + name + "'");
    return config.at(name);
}

template <class T>
T get(const Json& config, const char* name) {
    try {
        return require(config, name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidArgument(std::string("config: field '") + name + "' has the wrong type");
    }
}

template <class T>
T get_or(const Json& config, const char* name, T fallback) {
    if (!config.contains(name) || config.at(name).is_null()) return fallback;
    return get<T>(config, name);
}

std::uint64_t require_seed(const Json& config) {
    if (!config.contains("seed") || config.at("seed").is_null())
        throw InvalidArgument("config: this command is stochastic and needs an explicit 'seed'");
    const auto& s = config.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
        throw InvalidArgument("config: 'seed' must be a non-negative integer");
    return s.get<std::uint64_t>();
}

int threads_of(const Json& config) {
    const int t = get_or<int>(config, "threads", 1);
    if (t < 1) throw InvalidArgument("config: 'threads' must be >= 1");
    return t;
}

std::optional<fs::path> out_dir(const Json& config) {
    if (!config.contains("out") || config.at("out").is_null()) return std::nullopt;
    fs::path dir = get<std::string>(config, "out");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- shared inputs

struct LoadedInput {
    RainfallSeries series;
    Warnings warnings;
};

LoadedInput load_input(const Json& config) {
    const auto path = get<std::string>(config, "input");
    const auto format = csv_format_from_json(config.contains("format") ? config.at("format") : Json());
    auto loaded = load_series(path, format);
    LoadedInput result{std::move(loaded.series), std::move(loaded.warnings)};
    const int factor = get_or<int>(config, "aggregate", 1);
    if (factor != 1) result.series = aggregate(result.series, factor, &result.warnings);
    return result;
}

FittedModel load_model(const Json& config) {
    const auto& m = require(config, "model");
    if (m.is_string()) return model_from_json(read_json_file(m.get<std::string>()));
    if (m.is_object()) return model_from_json(m);
    throw InvalidArgument("config: 'model' must be a path or an inline model object");
}

CarmaFitOptions carma_options(const Json& config) {
    CarmaFitOptions o;
    o.allow_negative_weights = get_or<bool>(config, "allow_negative_weights", o.allow_negative_weights);
    o.restarts = get_or<int>(config, "restarts", o.restarts);
    o.max_iterations = get_or<int>(config, "max_iterations", o.max_iterations);
    if (config.contains("seed") && !config.at("seed").is_null()) o.seed = require_seed(config);
    if (o.restarts < 0) throw InvalidArgument("config: 'restarts' must be >= 0");
    if (o.max_iterations < 1) throw InvalidArgument("config: 'max_iterations' must be >= 1");
    return o;
}

int order_of(const Json& config) {
    const int p = get_or<int>(config, "p", 1);
    if (p < 1 || p > 3) throw InvalidArgument("config: CARMA order 'p' must lie in 1..3, got " + std::to_string(p));
    return p;
}

double delta_of(const Json& config) {
    const double delta = get_or<double>(config, "delta", 1.0);
    if (!(delta > 0.0)) throw InvalidArgument("config: 'delta' must be positive");
    return delta;
}

// ---------------------------------------------------------------- fit

std::string fit_report(const FittedModel& model, const RainfallSeries& series) {
    std::ostringstream r;
    const auto names = parameter_names(model.carma.p());
    const auto values = parameter_vector(model.carma, model.hougaard);
    r << "CARMA(" << model.carma.p() << "," << model.carma.p() - 1 << ") model driven by a Hougaard process\n";
    r << "observations: " << series.size() << ", step: " << series.step_hours() << " h, unit: "
      << to_string(series.unit) << ", quantum: " << fmt(series.quantum) << "\n\n";
    r << "Parameter     Estimate\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        char line[64];
        std::snprintf(line, sizeof line, "%-12s  %.4f\n", names[i].c_str(), values[i]);
        r << line;
    }
    r << "\nSeasonality (order " << model.seasonality.order << "): a0 = " << fmt(model.seasonality.a0) << "\n";
    for (int i = 0; i < model.seasonality.order; ++i)
        r << "  a" << i + 1 << " = " << fmt(model.seasonality.a[i]) << ", b" << i + 1 << " = "
          << fmt(model.seasonality.b[i]) << "\n";
    const auto& d = model.diagnostics;
    r << "\nPrediction-error SSE: " << fmt(d.objective) << " (start " << fmt(d.initial_objective) << ", "
      << d.evaluations << " evaluations, " << (d.converged ? "converged" : "not converged") << ")\n";
    r << "Exponential-moment bound k: " << fmt(exp_moment_bound(model.hougaard)) << "\n";
    for (const auto& w : d.warnings) r << "warning: " << w << "\n";
    return r.str();
}

Json cmd_fit(const Json& config) {
    ModelFitOptions options;
    options.p = order_of(config);
    options.delta = delta_of(config);
    options.max_seasonality_order = get_or<int>(config, "max_seasonality_order", options.max_seasonality_order);
    options.carma = carma_options(config);
    auto input = load_input(config);
    auto model = fit_model(input.series, options);
    model.diagnostics.warnings.insert(model.diagnostics.warnings.begin(), input.warnings.begin(),
                                      input.warnings.end());
    Json j = to_json(model);
    for (double w : model.carma.weights)
        if (w < 0.0) j["allow_negative_weights"] = true;
    if (auto dir = out_dir(config)) {
        write_text_file(*dir / "model.json", dump(j));
        write_text_file(*dir / "report.txt", fit_report(model, input.series));
    }
    return j;
}

// ---------------------------------------------------------------- simulate

SimulationConfig simulation_config(const FittedModel& model, std::size_t length, std::uint64_t seed) {
    SimulationConfig c;
    c.spec = model.carma;
    c.params = model.hougaard;
    c.length = length;
    c.delta = model.delta;
    c.seed = seed;
    return c;
}

Json cmd_simulate(const Json& config) {
    const auto model = load_model(config);
    const auto seed = require_seed(config);
    const auto length_signed = get<long long>(config, "length");
    if (length_signed < 1) throw InvalidArgument("config: 'length' must be >= 1");
    const auto length = static_cast<std::size_t>(length_signed);
    const int n_sims = get_or<int>(config, "n_sims", 1);
    if (n_sims < 1) throw InvalidArgument("config: 'n_sims' must be >= 1");
    const TimePoint start = parse_timestamp(get_or<std::string>(config, "start", "2000-01-01T00:00:00"));
    const int threads = threads_of(config);
    const auto dir = out_dir(config);

    std::vector<RainfallSeries> sims(static_cast<std::size_t>(n_sims));
    detail::parallel_for(sims.size(), threads, [&](std::size_t i) {
        const auto inc = simulate_increments(simulation_config(model, length, stream_seed(seed, i)));
        sims[i] = apply_seasonality(inc, model.seasonality, start, model.step, model.unit, model.quantum);
    });

    std::vector<double> zeros;
    std::ostringstream zp;
    zp << "simulation,zero_proportion\n";
    double total = 0.0;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        zeros.push_back(implied_zero_proportion(sims[i]));
        total += zeros.back();
        zp << i + 1 << ',' << fmt(zeros.back()) << '\n';
    }
    const double average = total / static_cast<double>(sims.size());
    zp << "average," << fmt(average) << '\n';

    if (dir) {
        for (std::size_t i = 0; i < sims.size(); ++i) {
            char name[48];
            std::snprintf(name, sizeof name, "simulation_%03zu.csv", i + 1);
            write_series_csv(sims[i], *dir / name);
        }
        write_text_file(*dir / "zero_proportion.csv", zp.str());
    }
    return Json{{"n_sims", n_sims},
                {"length", length},
                {"seed", seed},
                {"zero_proportion", {{"simulation_average", average}, {"per_simulation", zeros}}}};
}

// ---------------------------------------------------------------- diagnose

Json cmd_diagnose(const Json& config) {
    const auto model = load_model(config);
    const auto seed = require_seed(config);
    const auto input = load_input(config);
    DiagnosticsOptions options;
    options.n_sims = get_or<int>(config, "n_sims", options.n_sims);
    options.acf_lags = get_or<std::size_t>(config, "acf_lags", options.acf_lags);
    options.threads = threads_of(config);
    if (options.n_sims < 1) throw InvalidArgument("config: 'n_sims' must be >= 1");
    const auto d = ensemble_diagnostics(simulation_config(model, input.series.size(), seed), model.seasonality,
                                        input.series, options);
    Json j = summary_json(d);
    if (auto dir = out_dir(config)) {
        write_diagnostics(d, *dir);
        write_text_file(*dir / "summary.json", dump(j));
    }
    return j;
}

// ---------------------------------------------------------------- price / calibrate

struct ContractInput {
    SwapContract contract;
    std::optional<double> market_price;
    double seasonal_factor = 1.0;
};

std::vector<ContractInput> contracts_of(const Json& config, const FittedModel& model) {
    const TimePoint valuation = parse_timestamp(get<std::string>(config, "valuation"));
    const auto& list = require(config, "contracts");
    if (!list.is_array() || list.empty()) throw InvalidArgument("config: 'contracts' must be a non-empty array");
    std::vector<ContractInput> out;
    for (const auto& c : list) {
        ContractInput in;
        in.contract = monthly_contract(valuation, get<int>(c, "year"), get<int>(c, "month"), model.step);
        if (c.contains("market_price") && !c.at("market_price").is_null()) in.market_price = get<double>(c, "market_price");
        if (c.contains("seasonal_factor")) {
            in.seasonal_factor = get<double>(c, "seasonal_factor");
        } else if (c.contains("baseline_price")) {
            // Seasonal level implied by a quoted model price at theta = 0.
            const auto mpr = EsscherMPR::constant(0.0, in.contract.t, in.contract.tau2);
            in.seasonal_factor =
                get<double>(c, "baseline_price") / swap_expectation(model.carma, model.hougaard, mpr, in.contract);
        } else {
            in.seasonal_factor = monthly_mean_seasonality(model.seasonality, in.contract.month);
        }
        if (!(in.seasonal_factor > 0.0)) throw InvalidArgument("config: seasonal factor must be positive");
        out.push_back(std::move(in));
    }
    return out;
}

Json cmd_price(const Json& config) {
    const auto model = load_model(config);
    const auto contracts = contracts_of(config, model);
    const auto thetas =
        get_or<std::vector<double>>(config, "theta_grid", {-0.01, 0.0, 0.01, 0.02, 0.03, 0.04});
    if (thetas.empty()) throw InvalidArgument("config: 'theta_grid' is empty");
    const std::size_t nc = contracts.size();
    std::vector<std::optional<double>> cells(thetas.size() * nc);
    std::vector<std::string> errors(cells.size());
    detail::parallel_for(cells.size(), threads_of(config), [&](std::size_t idx) {
        const auto& c = contracts[idx % nc];
        const double theta = thetas[idx / nc];
        try {
            const auto mpr = EsscherMPR::constant(theta, c.contract.t, c.contract.tau2);
            cells[idx] = futures_price(model.carma, model.hougaard, mpr, c.contract, c.seasonal_factor);
        } catch (const DomainError& e) {
            errors[idx] = e.what();
        }
    });

    Json labels = Json::array();
    for (const auto& c : contracts) labels.push_back(c.contract.label);
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "theta";
    for (const auto& c : contracts) csv << ',' << c.contract.label;
    csv << '\n';
    for (std::size_t r = 0; r < thetas.size(); ++r) {
        Json prices = Json::array();
        Json errs = Json::object();
        csv << fmt(thetas[r]);
        for (std::size_t k = 0; k < nc; ++k) {
            const auto& cell = cells[r * nc + k];
            prices.push_back(cell ? Json(*cell) : Json(nullptr));
            if (!cell) errs[contracts[k].contract.label] = "domain error: " + errors[r * nc + k];
            csv << ',' << (cell ? fmt(*cell) : std::string("domain_error"));
        }
        csv << '\n';
        Json row{{"theta", thetas[r]}, {"prices", prices}};
        if (!errs.empty()) row["errors"] = errs;
        rows.push_back(row);
    }
    Json market = Json::array();
    bool any_market = false;
    for (const auto& c : contracts) {
        market.push_back(c.market_price ? Json(*c.market_price) : Json(nullptr));
        any_market = any_market || c.market_price.has_value();
    }
    if (any_market) {
        csv << "market";
        for (const auto& c : contracts) csv << ',' << (c.market_price ? fmt(*c.market_price) : std::string("NA"));
        csv << '\n';
    }
    Json j{{"exp_moment_bound", exp_moment_bound(model.hougaard)}, {"contracts", labels}, {"rows", rows}};
    if (any_market) j["market"] = market;
    if (auto dir = out_dir(config)) {
        write_text_file(*dir / "prices.csv", csv.str());
        write_text_file(*dir / "prices.json", dump(j));
    }
    return j;
}

Json cmd_calibrate(const Json& config) {
    const auto model = load_model(config);
    const auto contracts = contracts_of(config, model);
    for (const auto& c : contracts)
        if (!c.market_price) throw InvalidArgument("config: contract " + c.contract.label + " has no market_price");
    std::vector<double> thetas(contracts.size());
    detail::parallel_for(contracts.size(), threads_of(config), [&](std::size_t i) {
        const auto& c = contracts[i];
        thetas[i] = calibrate_theta(*c.market_price, model.carma, model.hougaard, c.contract, c.seasonal_factor);
    });
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "contract,market_price,model_price_theta0,theta\n";
    for (std::size_t i = 0; i < contracts.size(); ++i) {
        const auto& c = contracts[i];
        const auto mpr = EsscherMPR::constant(0.0, c.contract.t, c.contract.tau2);
        const double base = futures_price(model.carma, model.hougaard, mpr, c.contract, c.seasonal_factor);
        rows.push_back({{"contract", c.contract.label},
                        {"market_price", *c.market_price},
                        {"model_price_theta0", base},
                        {"theta", thetas[i]}});
        csv << c.contract.label << ',' << fmt(*c.market_price) << ',' << fmt(base) << ',' << fmt(thetas[i]) << '\n';
    }
    Json j{{"exp_moment_bound", exp_moment_bound(model.hougaard)}, {"contracts", rows}};
    if (auto dir = out_dir(config)) {
        write_text_file(*dir / "calibration.csv", csv.str());
        write_text_file(*dir / "calibration.json", dump(j));
    }
    return j;
}

// ---------------------------------------------------------------- bootstrap

Json cmd_bootstrap(const Json& config) {
    const auto seed = require_seed(config);
    const int p = order_of(config);
    const double delta = delta_of(config);
    const int threads = threads_of(config);
    const auto input = load_input(config);

    FittedModel model;
    if (config.contains("model") && !config.at("model").is_null()) {
        model = load_model(config);
    } else {
        ModelFitOptions fo;
        fo.p = p;
        fo.delta = delta;
        fo.max_seasonality_order = get_or<int>(config, "max_seasonality_order", fo.max_seasonality_order);
        fo.carma = carma_options(config);
        model = fit_model(input.series, fo);
    }
    const auto x = deseasonalise(input.series, model.seasonality);

    BootstrapOptions options;
    options.replicates = get_or<int>(config, "B", options.replicates);
    options.seed = seed;
    options.threads = threads;
    options.carma = carma_options(config);
    if (options.replicates < 2) throw InvalidArgument("config: 'B' must be >= 2");

    Json j;
    if (config.contains("calibrate") && !config.at("calibrate").is_null()) {
        const auto& cal = config.at("calibrate");
        BlockCalibrationOptions co;
        co.candidates = get_or<std::vector<double>>(cal, "candidates", co.candidates);
        co.replications = get_or<int>(cal, "replications", co.replications);
        co.bootstrap_replicates = get_or<int>(cal, "bootstrap_replicates", co.bootstrap_replicates);
        co.length = get_or<std::size_t>(cal, "length", x.size());
        co.seed = seed;
        co.threads = threads;
        co.carma = options.carma;
        const auto block = calibrate_block_size(model, co);
        options.mean_block = block.chosen;
        Json coverage = Json::array();
        for (std::size_t i = 0; i < block.candidates.size(); ++i)
            coverage.push_back({{"mean_block", block.candidates[i]}, {"coverage", std::isfinite(block.coverage[i]) ? Json(block.coverage[i]) : Json(nullptr)}});
        j["block_calibration"] = {{"chosen", block.chosen}, {"candidates", coverage}};
    } else {
        options.mean_block = get_or<double>(config, "mean_block", options.mean_block);
    }
    if (!(options.mean_block >= 1.0)) throw InvalidArgument("config: 'mean_block' must be >= 1");

    const auto result = bootstrap_cis(x, p, delta, options);
    Json r = to_json(result);
    j["mean_block"] = options.mean_block;
    j["replicates"] = options.replicates;
    j["parameters"] = r["parameters"];
    j["failed_replicates"] = r["failed_replicates"];
    j["warnings"] = r["warnings"];

    if (auto dir = out_dir(config)) {
        std::ostringstream csv;
        csv << "parameter,estimate,lower,upper\n";
        for (const auto& pi : result.parameters)
            csv << pi.name << ',' << fmt(pi.estimate) << ',' << fmt(pi.lower) << ',' << fmt(pi.upper) << '\n';
        write_text_file(*dir / "bootstrap.csv", csv.str());
        write_text_file(*dir / "bootstrap.json", dump(j));
    }
    return j;
}

}  // namespace

Json run_command(const std::string& name, const Json& config) {
    if (!config.is_object()) throw InvalidArgument("config must be a JSON object");
    if (name == "fit") return cmd_fit(config);
    if (name == "simulate") return cmd_simulate(config);
    if (name == "diagnose") return cmd_diagnose(config);
    if (name == "price") return cmd_price(config);
    if (name == "calibrate") return cmd_calibrate(config);
    if (name == "bootstrap") return cmd_bootstrap(config);
    throw InvalidArgument("unknown command '" + name + "'");
}

}  // namespace rainfall
