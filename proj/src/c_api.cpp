#include "rainfall/rainfall.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "commands.hpp"
#include "json_io.hpp"
#include "rainfall/error.hpp"
#include "rainfall/fit.hpp"
#include "rainfall/pricing.hpp"
#include "rainfall/simulate.hpp"

struct rf_series {
    rainfall::RainfallSeries series;
};

struct rf_model {
    rainfall::FittedModel model;
};

namespace {

thread_local std::string last_error;

template <class F>
rf_status guarded(F&& f) {
    try {
        f();
        last_error.clear();
        return RF_OK;
    } catch (const rainfall::InvalidArgument& e) {
        last_error = e.what();
        return RF_INVALID_ARGUMENT;
    } catch (const rainfall::DomainError& e) {
        last_error = e.what();
        return RF_DOMAIN;
    } catch (const rainfall::NumericError& e) {
        last_error = e.what();
        return RF_NUMERIC;
    } catch (const rainfall::IoError& e) {
        last_error = e.what();
        return RF_IO;
    } catch (const nlohmann::json::exception& e) {
        last_error = std::string("malformed JSON: ") + e.what();
        return RF_INVALID_ARGUMENT;
    } catch (const std::filesystem::filesystem_error& e) {
        last_error = e.what();
        return RF_IO;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return RF_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return RF_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return RF_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw rainfall::InvalidArgument(what);
}

char* copy_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

rainfall::Json parse(const char* text) {
    try {
        return rainfall::Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw rainfall::InvalidArgument(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

extern "C" {

const char* rf_version(void) { return "0.1.0"; }

const char* rf_last_error(void) { return last_error.c_str(); }

void rf_string_free(char* s) { std::free(s); }

rf_status rf_series_load(const char* path, const char* format_json, rf_series** out) {
    return guarded([&] {
        require(path && out, "rf_series_load: null argument");
        const auto format = rainfall::csv_format_from_json(format_json ? parse(format_json) : rainfall::Json());
        auto loaded = rainfall::load_series(path, format);
        *out = new rf_series{std::move(loaded.series)};
    });
}

rf_status rf_series_from_values(const double* values, size_t n, const char* start, double step_hours,
                                double quantum, rf_series** out) {
    return guarded([&] {
        require((values || n == 0) && start && out, "rf_series_from_values: null argument");
        require(step_hours > 0.0, "rf_series_from_values: step must be positive");
        rainfall::RainfallSeries s;
        s.start_time = rainfall::parse_timestamp(start);
        s.step = rainfall::Duration(static_cast<long long>(step_hours * 3600.0 + 0.5));
        s.values.assign(values, values + n);
        s.quantum = quantum;
        rainfall::validate(s);
        *out = new rf_series{std::move(s)};
    });
}

rf_status rf_series_aggregate(const rf_series* series, int factor, rf_series** out) {
    return guarded([&] {
        require(series && out, "rf_series_aggregate: null argument");
        *out = new rf_series{rainfall::aggregate(series->series, factor)};
    });
}

rf_status rf_series_length(const rf_series* series, size_t* n) {
    return guarded([&] {
        require(series && n, "rf_series_length: null argument");
        *n = series->series.size();
    });
}

rf_status rf_series_values(const rf_series* series, double* values, size_t capacity) {
    return guarded([&] {
        require(series && values, "rf_series_values: null argument");
        require(capacity >= series->series.size(), "rf_series_values: buffer too small");
        std::copy(series->series.values.begin(), series->series.values.end(), values);
    });
}

rf_status rf_series_summary_json(const rf_series* series, size_t h_max, char** json) {
    return guarded([&] {
        require(series && json, "rf_series_summary_json: null argument");
        *json = copy_string(rainfall::to_json(rainfall::summarize(series->series, h_max)).dump());
    });
}

void rf_series_free(rf_series* series) { delete series; }

rf_status rf_model_fit(const rf_series* series, int p, double delta, uint64_t seed, rf_model** out) {
    return guarded([&] {
        require(series && out, "rf_model_fit: null argument");
        rainfall::ModelFitOptions options;
        options.p = p;
        options.delta = delta;
        options.carma.seed = seed;
        *out = new rf_model{rainfall::fit_model(series->series, options)};
    });
}

rf_status rf_model_from_json(const char* json, rf_model** out) {
    return guarded([&] {
        require(json && out, "rf_model_from_json: null argument");
        *out = new rf_model{rainfall::model_from_json(parse(json))};
    });
}

rf_status rf_model_to_json(const rf_model* model, char** json) {
    return guarded([&] {
        require(model && json, "rf_model_to_json: null argument");
        *json = copy_string(rainfall::to_json(model->model).dump(2));
    });
}

void rf_model_free(rf_model* model) { delete model; }

rf_status rf_exp_moment_bound(const rf_model* model, double* k) {
    return guarded([&] {
        require(model && k, "rf_exp_moment_bound: null argument");
        *k = rainfall::exp_moment_bound(model->model.hougaard);
    });
}

rf_status rf_simulate_increments(const rf_model* model, size_t n, uint64_t seed, double* out) {
    return guarded([&] {
        require(model && out, "rf_simulate_increments: null argument");
        rainfall::SimulationConfig c;
        c.spec = model->model.carma;
        c.params = model->model.hougaard;
        c.length = n;
        c.delta = model->model.delta;
        c.seed = seed;
        const auto inc = rainfall::simulate_increments(c);
        std::copy(inc.begin(), inc.end(), out);
    });
}

rf_status rf_futures_price(const rf_model* model, const char* valuation, int year, int month, double theta,
                           double seasonal_factor, double* price) {
    return guarded([&] {
        require(model && valuation && price, "rf_futures_price: null argument");
        const auto& m = model->model;
        const auto contract = rainfall::monthly_contract(rainfall::parse_timestamp(valuation), year, month, m.step);
        const auto mpr = rainfall::EsscherMPR::constant(theta, contract.t, contract.tau2);
        *price = seasonal_factor > 0.0
                     ? rainfall::futures_price(m.carma, m.hougaard, mpr, contract, seasonal_factor)
                     : rainfall::futures_price(m.carma, m.hougaard, mpr, contract, m.seasonality);
    });
}

rf_status rf_run_command(const char* command, const char* config_json, char** result_json) {
    return guarded([&] {
        require(command && config_json && result_json, "rf_run_command: null argument");
        *result_json = copy_string(rainfall::run_command(command, parse(config_json)).dump(2));
    });
}

}  // extern "C"
