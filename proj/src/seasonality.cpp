#include "rainfall/seasonality.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "rainfall/error.hpp"
#include "rainfall/numerics.hpp"

namespace rainfall {

void SeasonalityModel::check() const {
    if (order < 0) throw InvalidArgument("seasonality order must be >= 0");
    if (a.size() != static_cast<std::size_t>(order) || b.size() != static_cast<std::size_t>(order))
        throw InvalidArgument("seasonality coefficient count does not match order");
}

double evaluate_seasonality(const SeasonalityModel& model, double t) {
    double s = 0.5 * model.a0;
    const double w = 2.0 * std::numbers::pi * t / SeasonalityModel::period;
    for (int i = 0; i < model.order; ++i) {
        const double k = i + 1.0;
        s += model.a[i] * std::cos(k * w) + model.b[i] * std::sin(k * w);
    }
    return s;
}

namespace {

Eigen::MatrixXd design_matrix(int order) {
    Eigen::MatrixXd x(12, 2 * order + 1);
    for (int m = 0; m < 12; ++m) {
        const double t = m + 0.5;
        x(m, 0) = 0.5;
        for (int i = 0; i < order; ++i) {
            const double w = 2.0 * std::numbers::pi * (i + 1) * t / SeasonalityModel::period;
            x(m, 1 + 2 * i) = std::cos(w);
            x(m, 2 + 2 * i) = std::sin(w);
        }
    }
    return x;
}

}  // namespace

SeasonalityFit fit_seasonality_to_means(std::span<const double> monthly_means, int max_order) {
    if (monthly_means.size() != 12) throw InvalidArgument("need exactly 12 monthly means");
    if (max_order < 0 || max_order > 5)
        throw InvalidArgument("max_order must lie in 0..5 (12 monthly points)");
    Eigen::VectorXd y(12);
    for (int m = 0; m < 12; ++m) y(m) = monthly_means[static_cast<std::size_t>(m)];

    SeasonalityFit fit;
    fit.monthly_means.assign(monthly_means.begin(), monthly_means.end());
    // An exact fit has RSS = 0 and an AIC of -inf at every higher order. Flooring
    // RSS at a rounding-level value lets the 2k penalty pick the smallest exact order.
    const double rss_floor = std::max(1e-24 * y.squaredNorm(), std::numeric_limits<double>::min());
    double best_aic = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= max_order; ++n) {
        const Eigen::MatrixXd x = design_matrix(n);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (qr.rank() < x.cols()) throw NumericError("singular seasonality design at order " + std::to_string(n));
        const Eigen::VectorXd beta = qr.solve(y);
        const double rss = std::max((y - x * beta).squaredNorm(), rss_floor);
        const double k = 2.0 * n + 1.0;
        const double aic = 12.0 * std::log(rss / 12.0) + 2.0 * k;
        fit.aic.push_back(aic);
        if (aic < best_aic) {
            best_aic = aic;
            SeasonalityModel m;
            m.order = n;
            m.a0 = beta(0);
            for (int i = 0; i < n; ++i) {
                m.a.push_back(beta(1 + 2 * i));
                m.b.push_back(beta(2 + 2 * i));
            }
            fit.model = std::move(m);
        }
    }
    return fit;
}

SeasonalityFit fit_seasonality(const RainfallSeries& series, int max_order) {
    std::array<double, 12> sum{};
    std::array<std::size_t, 12> count{};
    for (std::size_t i = 0; i < series.size(); ++i) {
        const int m = month_of(series.time_at(i)) - 1;
        sum[static_cast<std::size_t>(m)] += series.values[i];
        ++count[static_cast<std::size_t>(m)];
    }
    std::array<double, 12> means{};
    for (std::size_t m = 0; m < 12; ++m) {
        if (count[m] == 0)
            throw InvalidArgument("seasonality fit needs all 12 calendar months; month " +
                                  std::to_string(m + 1) + " has no observations");
        means[m] = sum[m] / static_cast<double>(count[m]);
    }
    return fit_seasonality_to_means(means, max_order);
}

double monthly_mean_seasonality(const SeasonalityModel& model, int month) {
    if (month < 1 || month > 12) throw InvalidArgument("month must be in 1..12");
    auto f = [&model](double t) { return evaluate_seasonality(model, t); };
    const double avg = numerics::integrate(f, month - 1.0, static_cast<double>(month), 1e-13).value;
    if (!(avg > 0.0))
        throw DomainError("non-positive monthly seasonality average for month " + std::to_string(month));
    return avg;
}

std::vector<double> seasonal_factors(const SeasonalityModel& model, TimePoint start, Duration step,
                                     std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TimePoint t = start + step * static_cast<long long>(i);
        s[i] = evaluate_seasonality(model, month_time(t));
        if (!(s[i] > 0.0))
            throw DomainError("degenerate seasonality: S <= 0 at " + format_timestamp(t));
    }
    return s;
}

std::vector<double> deseasonalise(const RainfallSeries& series, const SeasonalityModel& model) {
    model.check();
    const auto s = seasonal_factors(model, series.start_time, series.step, series.size());
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = series.values[i] / s[i];
    return out;
}

}  // namespace rainfall
