#include "rainfall/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rainfall/error.hpp"

namespace rainfall {

using namespace std::chrono;

std::string to_string(Unit unit) { return unit == Unit::mm ? "mm" : "inch"; }

Unit unit_from_string(const std::string& name) {
    if (name == "mm") return Unit::mm;
    if (name == "inch" || name == "in") return Unit::inch;
    throw InvalidArgument("unknown unit '" + name + "' (expected mm or inch)");
}

void validate(const RainfallSeries& series, bool raw) {
    if (series.step <= Duration::zero()) throw InvalidArgument("series step must be positive");
    if (!(series.quantum > 0.0) || !std::isfinite(series.quantum))
        throw InvalidArgument("series quantum must be positive");
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const double v = series.values[i];
        if (!std::isfinite(v) || v < 0.0)
            throw InvalidArgument("series value at index " + std::to_string(i) +
                                  " is negative or not finite");
        if (raw) {
            const double k = v / series.quantum;
            if (std::abs(k - std::round(k)) > 1e-6)
                throw InvalidArgument("raw value at index " + std::to_string(i) +
                                      " is not a multiple of the quantum");
        }
    }
}

// ---------------------------------------------------------------- calendar

int days_in_month(int y, int m) {
    const auto ymd_last = year_month_day_last{year{y} / month{static_cast<unsigned>(m)} / last};
    return static_cast<int>(static_cast<unsigned>(ymd_last.day()));
}

TimePoint parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
    char sep = 0;
    int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &hh, &mm, &ss);
    if (n < 3 || (n > 3 && sep != 'T' && sep != ' ') || n == 4)
        throw InvalidArgument("unparseable timestamp '" + text + "'");
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60)
        throw InvalidArgument("invalid calendar timestamp '" + text + "'");
    return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(TimePoint t) {
    const auto day_start = floor<days>(t);
    const year_month_day ymd{day_start};
    const hh_mm_ss hms{t - day_start};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

int month_of(TimePoint t) {
    const year_month_day ymd{floor<days>(t)};
    return static_cast<int>(static_cast<unsigned>(ymd.month()));
}

double month_time(TimePoint t) {
    const year_month_day ymd{floor<days>(t)};
    const auto month_start = sys_days{ymd.year() / ymd.month() / 1};
    const int m = static_cast<int>(static_cast<unsigned>(ymd.month()));
    const double len = days_in_month(static_cast<int>(ymd.year()), m) * 86400.0;
    const double into = static_cast<double>((t - month_start).count());
    return (m - 1) + into / len;
}

// ---------------------------------------------------------------- CSV I/O

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n\"");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_value(const std::string& text, std::size_t row) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || text.empty() || !std::isfinite(v))
        throw InvalidArgument("row " + std::to_string(row) + ": unparseable value '" + text + "'");
    if (v < 0.0)
        throw InvalidArgument("row " + std::to_string(row) + ": negative value " + text);
    return v;
}

}  // namespace

LoadResult parse_series_csv(const std::string& text, const CsvFormat& format) {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;

    std::size_t ts_col = 0, val_col = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cols = split_csv_line(line);
        auto ts = std::find(cols.begin(), cols.end(), format.timestamp_column);
        auto vc = std::find(cols.begin(), cols.end(), format.value_column);
        if (ts == cols.end() || vc == cols.end())
            throw InvalidArgument("row " + std::to_string(row) + ": header must contain columns '" +
                                  format.timestamp_column + "' and '" + format.value_column + "'");
        ts_col = static_cast<std::size_t>(ts - cols.begin());
        val_col = static_cast<std::size_t>(vc - cols.begin());
        have_header = true;
        break;
    }
    if (!have_header) throw InvalidArgument("empty CSV input");

    LoadResult result;
    RainfallSeries& s = result.series;
    s.unit = format.unit;
    s.quantum = format.quantum;
    std::optional<TimePoint> prev;
    std::optional<Duration> step = format.step;

    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cols = split_csv_line(line);
        if (cols.size() <= std::max(ts_col, val_col))
            throw InvalidArgument("row " + std::to_string(row) + ": missing columns");
        TimePoint t;
        try {
            t = parse_timestamp(cols[ts_col]);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("row " + std::to_string(row) + ": " + e.what());
        }
        const double v = parse_value(cols[val_col], row);

        if (!prev) {
            s.start_time = t;
        } else {
            const Duration diff = t - *prev;
            if (diff <= Duration::zero())
                throw InvalidArgument("row " + std::to_string(row) + ": timestamps not strictly increasing");
            if (!step) step = diff;
            if (diff % *step != Duration::zero())
                throw InvalidArgument("row " + std::to_string(row) + ": timestamp off the uniform grid");
            const auto missing = static_cast<std::size_t>(diff / *step) - 1;
            if (missing > 0) {
                if (format.gaps == GapPolicy::strict)
                    throw InvalidArgument("row " + std::to_string(row) + ": gap of " +
                                          std::to_string(missing) + " missing steps before " +
                                          format_timestamp(t) + " (strict mode)");
                result.gaps.push_back({*prev + *step, missing});
                result.warnings.push_back("filled " + std::to_string(missing) +
                                          " missing steps with zeros starting " +
                                          format_timestamp(*prev + *step));
                s.values.insert(s.values.end(), missing, 0.0);
            }
        }
        s.values.push_back(v);
        prev = t;
    }
    if (s.values.empty()) throw InvalidArgument("CSV input has no data rows");
    s.step = step.value_or(std::chrono::hours(1));
    validate(s, format.raw);
    return result;
}

LoadResult load_series(const std::filesystem::path& path, const CsvFormat& format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open series file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_series_csv(buf.str(), format);
}

void write_series_csv(const RainfallSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "timestamp,value\n";
    out.precision(17);
    for (std::size_t i = 0; i < series.size(); ++i)
        out << format_timestamp(series.time_at(i)) << ',' << series.values[i] << '\n';
}

// ---------------------------------------------------------------- transforms

RainfallSeries aggregate(const RainfallSeries& series, int factor, Warnings* warnings) {
    if (factor < 1) throw InvalidArgument("aggregation factor must be >= 1");
    RainfallSeries out = series;
    if (factor == 1) return out;
    const auto f = static_cast<std::size_t>(factor);
    const std::size_t n = series.size() / f;
    const std::size_t dropped = series.size() - n * f;
    if (dropped > 0 && warnings)
        warnings->push_back("aggregate: dropped " + std::to_string(dropped) + " trailing values");
    out.values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j) out.values[i] += series.values[i * f + j];
    out.step = series.step * factor;
    return out;
}

bool is_zero_at_quantum(double value, double quantum) {
    return std::floor(value / quantum + 1e-9) < 1.0;
}

double zero_proportion(std::span<const double> values, double quantum) {
    if (values.empty()) return 0.0;
    const auto zeros = std::count_if(values.begin(), values.end(),
                                     [quantum](double v) { return is_zero_at_quantum(v, quantum); });
    return static_cast<double>(zeros) / static_cast<double>(values.size());
}

double sample_mean(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("sample_mean: empty input");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double central_moment(std::span<const double> x, int k) {
    const double m = sample_mean(x);
    double acc = 0.0;
    for (double v : x) acc += std::pow(v - m, k);
    return acc / static_cast<double>(x.size());
}

std::vector<double> sample_acvf(std::span<const double> x, std::size_t h_max) {
    if (x.size() <= h_max) throw InvalidArgument("series too short for the requested lag count");
    const double m = sample_mean(x);
    const std::size_t n = x.size();
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - m;
    std::vector<double> out(h_max + 1, 0.0);
    for (std::size_t h = 0; h <= h_max; ++h) {
        double acc = 0.0;
        for (std::size_t i = 0; i + h < n; ++i) acc += centered[i] * centered[i + h];
        out[h] = acc / static_cast<double>(n);
    }
    return out;
}

std::vector<double> sample_acf(std::span<const double> x, std::size_t h_max) {
    auto acvf = sample_acvf(x, h_max);
    if (!(acvf[0] > 0.0)) throw InvalidArgument("zero variance: autocorrelation undefined");
    std::vector<double> out(h_max);
    for (std::size_t h = 1; h <= h_max; ++h) out[h - 1] = acvf[h] / acvf[0];
    return out;
}

SeriesSummary summarize(const RainfallSeries& series, std::size_t h_max) {
    if (series.size() <= h_max) throw InvalidArgument("series too short for the requested lag count");
    SeriesSummary out;
    out.zero_proportion = zero_proportion(series.values, series.quantum);
    out.mean = sample_mean(series.values);
    out.variance = central_moment(series.values, 2);
    if (!(out.variance > 0.0)) throw InvalidArgument("zero variance: skewness and autocorrelation undefined");
    out.skewness = central_moment(series.values, 3) / std::pow(out.variance, 1.5);
    out.sample_acf = sample_acf(series.values, h_max);
    return out;
}

}  // namespace rainfall
