/* C interface of the rainfall library. All handles are opaque; every function
 * returns an rf_status and, on failure, leaves a message readable through
 * rf_last_error() on the calling thread. Strings returned through char** must be
 * released with rf_string_free. */
#ifndef RAINFALL_RAINFALL_H
#define RAINFALL_RAINFALL_H

#include <stddef.h>
#include <stdint.h>

#if defined(RAINFALL_BUILDING_LIBRARY)
#define RF_API __attribute__((visibility("default")))
#else
#define RF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status {
    RF_OK = 0,
    RF_INVALID_ARGUMENT = 1, /* bad input, violated precondition, malformed config */
    RF_DOMAIN = 2,           /* inadmissible argument, e.g. a tilt at or above the bound */
    RF_NUMERIC = 3,          /* solver, quadrature or factorization failure */
    RF_IO = 4,               /* unreadable or unwritable file */
    RF_INTERNAL = 5          /* anything else */
} rf_status;

typedef struct rf_series rf_series;
typedef struct rf_model rf_model;

RF_API const char* rf_version(void);
/* Message of the last failed call on this thread; empty after a success. */
RF_API const char* rf_last_error(void);
RF_API void rf_string_free(char* s);

/* Series. format_json holds the CSV format object (may be NULL for defaults). */
RF_API rf_status rf_series_load(const char* path, const char* format_json, rf_series** out);
RF_API rf_status rf_series_from_values(const double* values, size_t n, const char* start, double step_hours,
                                       double quantum, rf_series** out);
RF_API rf_status rf_series_aggregate(const rf_series* series, int factor, rf_series** out);
RF_API rf_status rf_series_length(const rf_series* series, size_t* n);
RF_API rf_status rf_series_values(const rf_series* series, double* values, size_t capacity);
RF_API rf_status rf_series_summary_json(const rf_series* series, size_t h_max, char** json);
RF_API void rf_series_free(rf_series* series);

/* Models. */
RF_API rf_status rf_model_fit(const rf_series* series, int p, double delta, uint64_t seed, rf_model** out);
RF_API rf_status rf_model_from_json(const char* json, rf_model** out);
RF_API rf_status rf_model_to_json(const rf_model* model, char** json);
RF_API void rf_model_free(rf_model* model);

/* Exponential-moment bound k of the driving Levy process. */
RF_API rf_status rf_exp_moment_bound(const rf_model* model, double* k);

/* Deseasonalised increments (seasonality not applied), length n, written to out. */
RF_API rf_status rf_simulate_increments(const rf_model* model, size_t n, uint64_t seed, double* out);

/* Futures price of the calendar-month contract (year, month) valued at the
 * timestamp `valuation` under a constant Esscher tilt theta. A non-positive
 * seasonal_factor selects the model's monthly seasonal mean. */
RF_API rf_status rf_futures_price(const rf_model* model, const char* valuation, int year, int month, double theta,
                                  double seasonal_factor, double* price);

/* Runs a pipeline command ("fit", "simulate", "diagnose", "price", "calibrate",
 * "bootstrap") on a JSON configuration; the JSON summary is returned in result. */
RF_API rf_status rf_run_command(const char* command, const char* config_json, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* RAINFALL_RAINFALL_H */
