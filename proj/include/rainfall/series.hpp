#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rainfall {

using TimePoint = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;
using Warnings = std::vector<std::string>;

enum class Unit { mm, inch };

std::string to_string(Unit unit);
Unit unit_from_string(const std::string& name);

/// Accumulated rainfall on a uniform grid. values[i] is the amount that fell
/// during [time_at(i), time_at(i) + step).
struct RainfallSeries {
    TimePoint start_time{};
    Duration step{std::chrono::hours(1)};
    std::vector<double> values;
    Unit unit = Unit::mm;
    double quantum = 0.1;

    std::size_t size() const { return values.size(); }
    TimePoint time_at(std::size_t i) const { return start_time + step * static_cast<long long>(i); }
    double step_hours() const { return static_cast<double>(step.count()) / 3600.0; }
};

/// Throws InvalidArgument if the series breaks an invariant. With `raw` set,
/// every value must also be an integer multiple of the quantum.
void validate(const RainfallSeries& series, bool raw = false);

struct SeriesSummary {
    double zero_proportion = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    std::vector<double> sample_acf;  // lags 1..h_max
};

enum class GapPolicy { strict, zero_fill };

struct CsvFormat {
    std::string timestamp_column = "timestamp";
    std::string value_column = "value";
    Unit unit = Unit::mm;
    double quantum = 0.1;
    GapPolicy gaps = GapPolicy::strict;
    bool raw = false;
    /// Grid spacing. When unset, the first timestamp difference is used.
    std::optional<Duration> step;
};

struct Gap {
    TimePoint first_missing;
    std::size_t missing_steps = 0;
};

struct LoadResult {
    RainfallSeries series;
    std::vector<Gap> gaps;
    Warnings warnings;
};

LoadResult load_series(const std::filesystem::path& path, const CsvFormat& format);
/// Same as load_series, reading CSV text already in memory.
LoadResult parse_series_csv(const std::string& text, const CsvFormat& format);

void write_series_csv(const RainfallSeries& series, const std::filesystem::path& path);

/// Sums of `factor` consecutive values. A trailing remainder is dropped and
/// reported through `warnings` when given.
RainfallSeries aggregate(const RainfallSeries& series, int factor, Warnings* warnings = nullptr);

SeriesSummary summarize(const RainfallSeries& series, std::size_t h_max);

/// True when the value rounds to zero at the given measurement quantum.
bool is_zero_at_quantum(double value, double quantum);
double zero_proportion(std::span<const double> values, double quantum);

// Sample statistics shared by the fitting and diagnostics code.
double sample_mean(std::span<const double> x);
/// Biased (divide by N) central moment of order k.
double central_moment(std::span<const double> x, int k);
/// Biased sample autocovariance at lags 0..h_max.
std::vector<double> sample_acvf(std::span<const double> x, std::size_t h_max);
/// Sample autocorrelation at lags 1..h_max. Throws on zero variance.
std::vector<double> sample_acf(std::span<const double> x, std::size_t h_max);

// Calendar helpers. Time on the monthly scale: January spans [0, 1), December [11, 12).
TimePoint parse_timestamp(const std::string& text);
std::string format_timestamp(TimePoint t);
double month_time(TimePoint t);
int month_of(TimePoint t);  // 1..12
int days_in_month(int year, int month);

}  // namespace rainfall
