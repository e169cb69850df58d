#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rainfall/error.hpp"
#include "rainfall/seasonality.hpp"
#include "rainfall/series.hpp"

using namespace rainfall;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

SeasonalityModel order2() {
    SeasonalityModel m;
    m.order = 2;
    m.a0 = 4.0;
    m.a = {0.5, -0.2};
    m.b = {0.3, 0.1};
    return m;
}

// S written out term by term.
double direct(const SeasonalityModel& m, double t) {
    double s = m.a0 / 2.0;
    for (int i = 0; i < m.order; ++i) {
        const double k = i + 1.0;
        s += m.a[i] * std::cos(two_pi * k * t / 12.0) + m.b[i] * std::sin(two_pi * k * t / 12.0);
    }
    return s;
}

// Average over [month - 1, month] from the antiderivative.
double direct_month_average(const SeasonalityModel& m, int month) {
    const double lo = month - 1.0, hi = month;
    double s = m.a0 / 2.0;
    for (int i = 0; i < m.order; ++i) {
        const double w = two_pi * (i + 1.0) / 12.0;
        s += m.a[i] * (std::sin(w * hi) - std::sin(w * lo)) / w;
        s -= m.b[i] * (std::cos(w * hi) - std::cos(w * lo)) / w;
    }
    return s;
}

}  // namespace

TEST_CASE("evaluation matches the Fourier series") {
    const auto m = order2();
    for (double t : {0.0, 0.5, 3.3, 7.25, 11.99}) CHECK(evaluate_seasonality(m, t) == doctest::Approx(direct(m, t)));
    CHECK(evaluate_seasonality(m, 1.7) == doctest::Approx(evaluate_seasonality(m, 13.7)));
}

TEST_CASE("monthly averages match the antiderivative") {
    const auto m = order2();
    for (int month = 1; month <= 12; ++month)
        CHECK(monthly_mean_seasonality(m, month) == doctest::Approx(direct_month_average(m, month)).epsilon(1e-12));
    CHECK_THROWS_AS(monthly_mean_seasonality(m, 0), InvalidArgument);
    CHECK_THROWS_AS(monthly_mean_seasonality(m, 13), InvalidArgument);

    SeasonalityModel negative;
    negative.a0 = -1.0;
    CHECK_THROWS_AS(monthly_mean_seasonality(negative, 1), DomainError);
}

TEST_CASE("exact means at month centres are recovered with the right order") {
    const auto truth = order2();
    std::vector<double> means(12);
    for (int m = 0; m < 12; ++m) means[m] = direct(truth, m + 0.5);
    const auto fit = fit_seasonality_to_means(means, 5);
    CHECK(fit.model.order == 2);
    CHECK(fit.model.a0 == doctest::Approx(truth.a0).epsilon(1e-10));
    for (int i = 0; i < 2; ++i) {
        CHECK(fit.model.a[i] == doctest::Approx(truth.a[i]).epsilon(1e-10));
        CHECK(fit.model.b[i] == doctest::Approx(truth.b[i]).epsilon(1e-10));
    }
    CHECK(fit.aic.size() == 6);
}

TEST_CASE("a flat climate selects order zero") {
    const std::vector<double> flat(12, 2.5);
    const auto fit = fit_seasonality_to_means(flat, 5);
    CHECK(fit.model.order == 0);
    CHECK(fit.model.a0 == doctest::Approx(5.0));
}

TEST_CASE("fit arguments are validated") {
    CHECK_THROWS_AS(fit_seasonality_to_means(std::vector<double>(11, 1.0), 2), InvalidArgument);
    CHECK_THROWS_AS(fit_seasonality_to_means(std::vector<double>(12, 1.0), 6), InvalidArgument);
    CHECK_THROWS_AS(fit_seasonality_to_means(std::vector<double>(12, 1.0), -1), InvalidArgument);

    SeasonalityModel bad;
    bad.order = 2;
    bad.a = {1.0};
    bad.b = {1.0, 2.0};
    CHECK_THROWS_AS(bad.check(), InvalidArgument);
}

TEST_CASE("series fit pools calendar months") {
    // Two years of daily data whose value is the month number.
    RainfallSeries s;
    s.start_time = parse_timestamp("2001-01-01");
    s.step = std::chrono::hours(24);
    for (int d = 0; d < 730; ++d) s.values.push_back(month_of(s.time_at(d)));
    const auto fit = fit_seasonality(s, 5);
    for (int m = 0; m < 12; ++m) CHECK(fit.monthly_means[m] == doctest::Approx(m + 1.0));

    RainfallSeries short_series = s;
    short_series.values.resize(100);
    CHECK_THROWS_AS(fit_seasonality(short_series, 2), InvalidArgument);
}

TEST_CASE("deseasonalising divides by S at the left endpoint") {
    const auto m = order2();
    RainfallSeries s;
    s.start_time = parse_timestamp("2003-02-10");
    s.step = std::chrono::hours(24);
    s.values = {1.0, 2.0, 0.0, 3.5};
    const auto d = deseasonalise(s, m);
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(d[i] * direct(m, month_time(s.time_at(i))) == doctest::Approx(s.values[i]).epsilon(1e-12));

    SeasonalityModel negative;
    negative.a0 = -2.0;
    CHECK_THROWS_AS(deseasonalise(s, negative), DomainError);
}
