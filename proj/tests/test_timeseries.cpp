#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <vector>

#include "rainfall/error.hpp"
#include "rainfall/series.hpp"

using namespace rainfall;

namespace {

RainfallSeries make_series(std::vector<double> values, Duration step = std::chrono::hours(1)) {
    RainfallSeries s;
    s.start_time = parse_timestamp("2000-01-01");
    s.step = step;
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("timestamps parse in date, T-separated and space-separated forms") {
    CHECK(format_timestamp(parse_timestamp("2010-12-31")) == "2010-12-31T00:00:00");
    CHECK(format_timestamp(parse_timestamp("2010-12-31T13:05:07")) == "2010-12-31T13:05:07");
    CHECK(format_timestamp(parse_timestamp("2010-12-31 13:05:07")) == "2010-12-31T13:05:07");
    CHECK_THROWS_AS(parse_timestamp("2010-02-30"), InvalidArgument);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), InvalidArgument);
    CHECK_THROWS_AS(parse_timestamp("2010-01-01T25:00:00"), InvalidArgument);
}

TEST_CASE("calendar helpers") {
    CHECK(days_in_month(2012, 2) == 29);
    CHECK(days_in_month(2011, 2) == 28);
    CHECK(days_in_month(2000, 2) == 29);
    CHECK(days_in_month(1900, 2) == 28);
    CHECK(days_in_month(2011, 12) == 31);
    CHECK(month_of(parse_timestamp("2011-07-15")) == 7);
    CHECK(month_time(parse_timestamp("2011-01-01")) == doctest::Approx(0.0));
    CHECK(month_time(parse_timestamp("2011-03-01")) == doctest::Approx(2.0));
    // Noon on 16 April: 15.5 of 30 days into the fourth month.
    CHECK(month_time(parse_timestamp("2011-04-16T12:00:00")) == doctest::Approx(3.0 + 15.5 / 30.0));
}

TEST_CASE("CSV parsing infers the grid and reads values") {
    const auto r = parse_series_csv("timestamp,value\n2000-01-01T00:00:00,0.2\n2000-01-01T01:00:00,0\n"
                                    "2000-01-01T02:00:00,1.4\n",
                                    {});
    CHECK(r.series.size() == 3);
    CHECK(r.series.step == std::chrono::hours(1));
    CHECK(r.series.values[2] == doctest::Approx(1.4));
    CHECK(r.gaps.empty());
    CHECK(r.warnings.empty());
}

TEST_CASE("CSV parsing honours custom column names and extra columns") {
    CsvFormat f;
    f.timestamp_column = "date";
    f.value_column = "prcp";
    f.unit = Unit::inch;
    f.quantum = 0.01;
    const auto r = parse_series_csv("station,date,prcp\nX,2000-01-01,0.10\nX,2000-01-02,0.00\n", f);
    CHECK(r.series.step == std::chrono::hours(24));
    CHECK(r.series.unit == Unit::inch);
    CHECK(r.series.quantum == 0.01);
    CHECK(r.series.values == std::vector<double>{0.10, 0.0});
}

TEST_CASE("CSV errors name the offending row") {
    auto message = [](const std::string& text, CsvFormat f = {}) {
        try {
            parse_series_csv(text, f);
        } catch (const InvalidArgument& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("timestamp,value\n2000-01-01,1\n2000-01-02,-1\n").find("row 3") != std::string::npos);
    CHECK(message("timestamp,value\n2000-01-01,1\n2000-01-02,abc\n").find("row 3") != std::string::npos);
    CHECK(message("timestamp,value\n2000-01-02,1\n2000-01-01,1\n").find("row 3") != std::string::npos);
    CHECK(message("ts,value\n2000-01-01,1\n").find("header") != std::string::npos);
    CHECK(message("timestamp,value\n").find("no data") != std::string::npos);
    // Uniform daily grid, then a half-day offset.
    CHECK(message("timestamp,value\n2000-01-01,1\n2000-01-02,1\n2000-01-03T12:00:00,1\n")
              .find("row 4") != std::string::npos);
}

TEST_CASE("gaps are rejected in strict mode and zero-filled on request") {
    const std::string text = "timestamp,value\n2000-01-01,1\n2000-01-02,2\n2000-01-05,3\n";
    CHECK_THROWS_AS(parse_series_csv(text, {}), InvalidArgument);

    CsvFormat f;
    f.gaps = GapPolicy::zero_fill;
    const auto r = parse_series_csv(text, f);
    CHECK(r.series.values == std::vector<double>{1, 2, 0, 0, 3});
    REQUIRE(r.gaps.size() == 1);
    CHECK(r.gaps[0].missing_steps == 2);
    CHECK(format_timestamp(r.gaps[0].first_missing) == "2000-01-03T00:00:00");
    CHECK(r.warnings.size() == 1);
}

TEST_CASE("raw mode requires multiples of the quantum") {
    CsvFormat f;
    f.raw = true;
    f.quantum = 0.1;
    CHECK_NOTHROW(parse_series_csv("timestamp,value\n2000-01-01,0.3\n2000-01-02,1.2\n", f));
    CHECK_THROWS_AS(parse_series_csv("timestamp,value\n2000-01-01,0.35\n2000-01-02,1.2\n", f), InvalidArgument);
}

TEST_CASE("loading a missing file is an I/O error") {
    CHECK_THROWS_AS(load_series("/nonexistent/rain.csv", {}), IoError);
}

TEST_CASE("CSV write and reload round-trips") {
    auto s = make_series({0.0, 0.1, 2.5, 0.3, 0.0}, std::chrono::hours(24));
    const auto path = std::filesystem::temp_directory_path() / "rainfall_test_roundtrip.csv";
    write_series_csv(s, path);
    const auto r = load_series(path, {});
    std::filesystem::remove(path);
    CHECK(r.series.values == s.values);
    CHECK(r.series.step == s.step);
    CHECK(r.series.start_time == s.start_time);
}

TEST_CASE("aggregation sums blocks and reports a dropped remainder") {
    const auto s = make_series({1, 2, 3, 4, 5});
    Warnings w;
    const auto a = aggregate(s, 2, &w);
    CHECK(a.values == std::vector<double>{3, 7});
    CHECK(a.step == std::chrono::hours(2));
    CHECK(w.size() == 1);
    CHECK(aggregate(s, 1).values == s.values);
    CHECK(aggregate(make_series(std::vector<double>(48, 0.0)), 24).values == std::vector<double>{0, 0});
    CHECK_THROWS_AS(aggregate(s, 0), InvalidArgument);
}

TEST_CASE("zero detection uses the measurement quantum") {
    CHECK(is_zero_at_quantum(0.0, 0.1));
    CHECK(is_zero_at_quantum(0.0999, 0.1));
    CHECK_FALSE(is_zero_at_quantum(0.1, 0.1));
    CHECK_FALSE(is_zero_at_quantum(0.3, 0.1));  // 0.3 / 0.1 is 2.9999999999999996 in binary
    const std::vector<double> v{0.0, 0.05, 0.1, 0.2};
    CHECK(zero_proportion(v, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("summary statistics match direct formulas") {
    std::mt19937_64 gen(7);
    std::gamma_distribution<double> g(0.7, 2.0);
    std::vector<double> x(500);
    for (auto& v : x) v = g(gen);
    const auto s = make_series(x);
    const auto sum = summarize(s, 5);

    const double n = static_cast<double>(x.size());
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        m2 += (v - m) * (v - m) / n;
        m3 += (v - m) * (v - m) * (v - m) / n;
    }
    CHECK(sum.mean == doctest::Approx(m).epsilon(1e-12));
    CHECK(sum.variance == doctest::Approx(m2).epsilon(1e-12));
    CHECK(sum.skewness == doctest::Approx(m3 / std::pow(m2, 1.5)).epsilon(1e-10));
    REQUIRE(sum.sample_acf.size() == 5);
    for (std::size_t h = 1; h <= 5; ++h) {
        double c = 0.0;
        for (std::size_t i = 0; i + h < x.size(); ++i) c += (x[i] - m) * (x[i + h] - m) / n;
        CHECK(sum.sample_acf[h - 1] == doctest::Approx(c / m2).epsilon(1e-10));
    }
    CHECK_THROWS_AS(summarize(make_series({1.0, 1.0, 1.0}), 1), InvalidArgument);
    CHECK_THROWS_AS(summarize(make_series({1.0, 2.0}), 2), InvalidArgument);
}

TEST_CASE("validation rejects negative and non-finite values") {
    CHECK_THROWS_AS(validate(make_series({1.0, -0.1})), InvalidArgument);
    CHECK_THROWS_AS(validate(make_series({1.0, std::nan("")})), InvalidArgument);
    auto s = make_series({1.0});
    s.quantum = 0.0;
    CHECK_THROWS_AS(validate(s), InvalidArgument);
}
