#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rainfall/error.hpp"
#include "rainfall/pricing.hpp"
#include "rainfall/random.hpp"

using namespace rainfall;

namespace {

const HougaardParams detroit{4.55, 14.85, 1.62};
const CarmaSpec one = CarmaSpec::make({4.54}, {1.0});
const CarmaSpec two = CarmaSpec::make({1.2, 0.15}, {0.7, 0.3});

oracle::Kernel kernel_of(const CarmaSpec& s) { return {s.lambdas, s.weights}; }

SwapContract window(double t, double tau1, double tau2) {
    SwapContract c;
    c.t = t;
    c.tau1 = tau1;
    c.tau2 = tau2;
    return c;
}

// Weight of a jump at time v in Y(tau2) - Y(tau1).
double weight(const oracle::Kernel& k, const SwapContract& c, double v) { return k.H(c.tau1 - v, c.tau2 - v); }

// Integral of the jump weight over [a, b], split at tau1 where it has a kink.
double weight_integral(const oracle::Kernel& k, const SwapContract& c, double a, double b) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [&](double v) { return weight(k, c, v); };
    if (a < c.tau1 && c.tau1 < b) return ts.integrate(f, a, c.tau1, 1e-13) + ts.integrate(f, c.tau1, b, 1e-13);
    return ts.integrate(f, a, b, 1e-13);
}

// Risk-neutral mean with the past replaced by its expectation: past jumps at the
// physical rate, future jumps at the tilted rate.
double oracle_swap(const CarmaSpec& s, const SwapContract& c, double theta) {
    const auto k = kernel_of(s);
    const double kb = 1.0 / oracle::CompoundPoisson::from_tweedie(detroit.mu, detroit.rho, detroit.kappa).scale;
    const double tilt = std::pow(1.0 - theta / kb, -1.0 / (detroit.kappa - 1.0));
    const double past = oracle::integrate_to(c.t, [&](double v) { return weight(k, c, v); });
    const double future = weight_integral(k, c, c.t, c.tau2);
    return detroit.mu * (past + tilt * future);
}

double price(const CarmaSpec& s, const SwapContract& c, double theta, const ObservedState& state = {}) {
    return swap_expectation(s, detroit, EsscherMPR::constant(theta, c.t, c.tau2), c, state);
}

}  // namespace

TEST_CASE("calendar-month contracts on daily and hourly model time") {
    const auto valuation = parse_timestamp("2010-12-31");
    const auto march = monthly_contract(valuation, 2011, 3, std::chrono::hours(24));
    CHECK(march.t == 0.0);
    CHECK(march.tau1 == doctest::Approx(60.0));
    CHECK(march.tau2 == doctest::Approx(91.0));
    CHECK(march.month == 3);
    CHECK(march.label == "Mar-11");
    const auto hourly = monthly_contract(valuation, 2012, 2, std::chrono::hours(1));
    CHECK(hourly.tau2 - hourly.tau1 == doctest::Approx(29.0 * 24.0));
    CHECK_THROWS_AS(monthly_contract(valuation, 2011, 13, std::chrono::hours(24)), InvalidArgument);
    CHECK_THROWS_AS(monthly_contract(valuation, 2010, 12, std::chrono::hours(24)), InvalidArgument);
    CHECK_THROWS_AS(window(1.0, 1.0, 2.0).check(), InvalidArgument);
}

TEST_CASE("market price of risk pieces") {
    EsscherMPR m;
    m.pieces = {{0.0, 5.0, 0.01}, {5.0, 10.0, -0.02}};
    CHECK_NOTHROW(m.check_cover(0.0, 10.0));
    CHECK_THROWS_AS(m.check_cover(0.0, 11.0), InvalidArgument);
    CHECK(m.theta_at(7.0) == -0.02);
    CHECK(m.sup() == 0.01);
    CHECK(m.sup_abs() == 0.02);
    CHECK_THROWS_AS(m.theta_at(12.0), InvalidArgument);
    m.pieces[1].begin = 6.0;
    CHECK_THROWS_AS(m.check_cover(0.0, 10.0), InvalidArgument);
    CHECK_THROWS_AS(EsscherMPR::constant(0.0, 2.0, 1.0), InvalidArgument);
    const double k = exp_moment_bound(detroit);
    CHECK_THROWS_AS(EsscherMPR::constant(k, 0.0, 1.0).check_bound(detroit), DomainError);
    CHECK_NOTHROW(EsscherMPR::constant(0.99 * k, 0.0, 1.0).check_bound(detroit));
}

TEST_CASE("swap kernel is the difference of integrated kernels") {
    const auto c = window(0.0, 3.0, 7.5);
    const auto k = kernel_of(two);
    for (double v : {-20.0, -1.0, 0.0, 2.9, 3.0, 5.0, 7.4, 8.0})
        CHECK(swap_kernel(two, c, v) == doctest::Approx(weight(k, c, v)).epsilon(1e-13).scale(1e-300));
}

TEST_CASE("closed-form swap expectation against the kernel integral") {
    for (const auto& s : {one, two}) {
        for (const auto& c : {window(0.0, 60.0, 91.0), window(0.0, 0.5, 2.0), window(10.0, 12.0, 40.0)}) {
            for (double theta : {-0.05, 0.0, 0.02, 0.04}) {
                CHECK(price(s, c, theta) == doctest::Approx(oracle_swap(s, c, theta)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("theta = 0 reproduces the physical mean") {
    // Far from the valuation time, the expected increment is mu * kernel mass per unit time.
    const auto c = window(0.0, 200.0, 231.0);
    CHECK(price(two, c, 0.0) == doctest::Approx(detroit.mu * two.kernel_mass() * 31.0).epsilon(1e-10));
}

TEST_CASE("price ratio far from the valuation time is the tilted mean rate") {
    const auto c = window(0.0, 300.0, 331.0);
    const double k = exp_moment_bound(detroit);
    for (double theta : {0.01, 0.03}) {
        const double expect = std::pow(1.0 - theta / k, -1.0 / 0.62);
        CHECK(price(one, c, theta) / price(one, c, 0.0) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("Cauchy-contour derivative agrees with the closed form") {
    const auto c = window(0.0, 5.0, 12.0);
    for (const auto& s : {one, two}) {
        for (double theta : {-0.02, 0.0, 0.03}) {
            const auto mpr = EsscherMPR::constant(theta, c.t, c.tau2);
            const double closed = swap_expectation(s, detroit, mpr, c);
            CHECK(riskneutral_expectation(PayoffSpec::swap(), s, detroit, mpr, c) ==
                  doctest::Approx(closed).epsilon(1e-10));
            ObservedState law;
            law.kind = ObservedState::Kind::past_law;
            CHECK(riskneutral_expectation(PayoffSpec::swap(), s, detroit, mpr, c, law) ==
                  doctest::Approx(closed).epsilon(1e-8));
        }
    }
}

TEST_CASE("piecewise market price of risk") {
    const auto c = window(0.0, 5.0, 12.0);
    EsscherMPR m;
    m.pieces = {{0.0, 8.0, 0.0}, {8.0, 12.0, 0.03}};
    const auto k = kernel_of(two);
    const double kb = exp_moment_bound(detroit);
    const double tilt = std::pow(1.0 - 0.03 / kb, -1.0 / 0.62);
    const double expect = detroit.mu * (oracle::integrate_to(0.0, [&](double v) { return weight(k, c, v); }) +
                                        weight_integral(k, c, 0.0, 8.0) + tilt * weight_integral(k, c, 8.0, 12.0));
    CHECK(swap_expectation(two, detroit, m, c) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(riskneutral_expectation(PayoffSpec::swap(), two, detroit, m, c) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("observed jumps replace the mean of the past") {
    const auto c = window(0.0, 2.0, 6.0);
    const std::vector<Jump> past{{-4.0, 10.0}, {-1.0, 3.0}, {-0.1, 25.0}, {0.0, 1.0}};
    ObservedState state;
    state.kind = ObservedState::Kind::jumps;
    state.jumps = past;
    const auto k = kernel_of(two);
    double expect = detroit.mu * weight_integral(k, c, 0.0, 6.0);
    for (const auto& j : past) expect += j.size * weight(k, c, j.time);
    CHECK(price(two, c, 0.0, state) == doctest::Approx(expect).epsilon(1e-11));
    const auto mpr = EsscherMPR::constant(0.0, c.t, c.tau2);
    CHECK(riskneutral_expectation(PayoffSpec::swap(), two, detroit, mpr, c, state) ==
          doctest::Approx(expect).epsilon(1e-10));

    state.jumps.push_back({0.5, 1.0});
    CHECK_THROWS_AS(price(two, c, 0.0, state), InvalidArgument);
}

TEST_CASE("reconstruction from no observed increments keeps the mean state") {
    const auto c = window(0.0, 2.0, 6.0);
    ObservedState state;
    state.kind = ObservedState::Kind::increments;
    CHECK(price(two, c, 0.01, state) == doctest::Approx(price(two, c, 0.01)).epsilon(1e-14));
    state.increment_step = 0.0;
    CHECK_THROWS_AS(price(two, c, 0.01, state), InvalidArgument);
}

TEST_CASE("with theta = 0 and the past integrated out the exponent is the increment CF") {
    const auto c = window(0.0, 3.0, 4.0);
    const auto mpr = EsscherMPR::constant(0.0, c.t, c.tau2);
    ObservedState law;
    law.kind = ObservedState::Kind::past_law;
    const auto o = oracle::CompoundPoisson::from_tweedie(detroit.mu, detroit.rho, detroit.kappa);
    for (const auto& s : {one, two}) {
        for (double u : {0.05, 0.7, 3.0}) {
            const Complex got = conditional_log_mgf(s, detroit, mpr, c, law, Complex(0.0, u));
            const Complex lib = log_charfn_increment(s, detroit, 1.0, u);
            const Complex expect = oracle::log_charfn_increment(kernel_of(s), o, 1.0, u);
            CHECK(std::abs(got - expect) <= 1e-8 * std::max(1.0, std::abs(expect)));
            CHECK(std::abs(got - lib) <= 1e-8 * std::max(1.0, std::abs(lib)));
        }
    }
}

TEST_CASE("capped call transform") {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double K = 2.0, C = 3.0, a = 0.4;
    for (double xi : {0.0, 0.3, 2.0}) {
        const Complex s(a, xi);
        const double re = ts.integrate([&](double x) { return (x - K) * (std::exp(-s * x)).real(); }, K, K + C, 1e-14);
        const double im = ts.integrate([&](double x) { return (x - K) * (std::exp(-s * x)).imag(); }, K, K + C, 1e-14);
        const Complex expect = Complex(re, im) + C * std::exp(-s * (K + C)) / s;
        const Complex got = capped_call_transform(K, C, a, xi);
        CHECK(std::abs(got - expect) <= 1e-12 * std::abs(expect));
    }
    CHECK_THROWS_AS(capped_call_transform(K, C, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(PayoffSpec::capped_call(1.0, 0.0), InvalidArgument);
}

TEST_CASE("capped call by Fourier inversion against Monte Carlo") {
    const auto c = window(0.0, 2.0, 6.0);
    const double theta = 0.01;
    // Strike and cap inside the bulk of the terminal distribution.
    const double mean = oracle_swap(two, c, theta);
    const double strike = 0.9 * mean, cap = 0.3 * mean;
    const auto mpr = EsscherMPR::constant(theta, c.t, c.tau2);
    const double fourier =
        riskneutral_expectation(PayoffSpec::capped_call(strike, cap), two, detroit, mpr, c);

    // Past at its mean (as in the default observed state), future jumps from the tilted law.
    const auto k = kernel_of(two);
    const double past = detroit.mu * oracle::integrate_to(0.0, [&](double v) { return weight(k, c, v); });
    const auto q = oracle::CompoundPoisson::from_tweedie(detroit.mu, detroit.rho, detroit.kappa).tilted(theta);
    std::mt19937_64 gen(2024);
    std::vector<double> payoff(200000);
    for (auto& p : payoff) {
        double x = past;
        for (const auto& j : oracle::sample_jumps(q, c.t, c.tau2, gen)) x += j.size * weight(k, c, j.time);
        p = std::clamp(x - strike, 0.0, cap);
    }
    const auto ms = oracle::mean_se(payoff);
    const auto capped = std::count(payoff.begin(), payoff.end(), cap);
    const auto zero = std::count(payoff.begin(), payoff.end(), 0.0);
    REQUIRE(capped > 1000);
    REQUIRE(zero > 1000);
    REQUIRE(capped + zero < 190000);
    CHECK(std::abs(fourier - ms.mean) < 3.0 * ms.se);

    // Same payoff through a user-supplied transform with an explicit dampening.
    PayoffSpec custom;
    custom.kind = PayoffSpec::Kind::custom;
    custom.dampening = 0.005;
    custom.transform = [&](double xi) { return capped_call_transform(strike, cap, 0.005, xi); };
    CHECK_THROWS_AS(riskneutral_expectation(custom, two, detroit, mpr, c), InvalidArgument);
    custom.value = [&](double x) { return std::clamp(x - strike, 0.0, cap); };
    CHECK(riskneutral_expectation(custom, two, detroit, mpr, c) == doctest::Approx(fourier).epsilon(1e-7));
}

TEST_CASE("Fourier pricing rejects a dampening beyond the moment bound") {
    const auto c = window(0.0, 2.0, 6.0);
    auto payoff = PayoffSpec::capped_call(1.0, 2.0);
    payoff.dampening = 10.0;
    CHECK_THROWS_AS(riskneutral_expectation(payoff, two, detroit, EsscherMPR::constant(0.0, c.t, c.tau2), c),
                    DomainError);
}

TEST_CASE("prices increase in theta and explode at the bound") {
    const auto c = window(0.0, 60.0, 91.0);
    const double k = exp_moment_bound(detroit);
    double last = 0.0;
    for (double theta = -0.05; theta < 0.042; theta += 0.004) {
        const double p = price(one, c, theta);
        CHECK(p > last);
        last = p;
    }
    CHECK(price(one, c, k * (1.0 - 1e-4)) > 5.0 * price(one, c, 0.03));
    CHECK_THROWS_AS(price(one, c, k), DomainError);
    CHECK_THROWS_AS(price(one, c, 1.1 * k), DomainError);
}

TEST_CASE("seasonal factor overloads") {
    const auto c = monthly_contract(parse_timestamp("2010-12-31"), 2011, 3, std::chrono::hours(24));
    const auto mpr = EsscherMPR::constant(0.01, c.t, c.tau2);
    SeasonalityModel s;
    s.order = 1;
    s.a0 = 1.0;
    s.a = {0.2};
    s.b = {0.1};
    CHECK(futures_price(one, detroit, mpr, c, s) ==
          doctest::Approx(monthly_mean_seasonality(s, 3) * swap_expectation(one, detroit, mpr, c)));
    CHECK_THROWS_AS(futures_price(one, detroit, mpr, c, 0.0), InvalidArgument);
    CHECK_THROWS_AS(futures_price(one, detroit, mpr, window(0.0, 1.0, 2.0), s), InvalidArgument);
}

TEST_CASE("calibration inverts the price") {
    const auto c = monthly_contract(parse_timestamp("2010-12-31"), 2011, 4, std::chrono::hours(24));
    const double sf = 0.07;
    const double p0 = futures_price(one, detroit, EsscherMPR::constant(0.0, c.t, c.tau2), c, sf);
    CHECK(std::abs(calibrate_theta(p0, one, detroit, c, sf)) < 1e-8);
    const double p2 = futures_price(one, detroit, EsscherMPR::constant(0.02, c.t, c.tau2), c, sf);
    CHECK(calibrate_theta(p2, one, detroit, c, sf) == doctest::Approx(0.02).epsilon(1e-8));
    CHECK_THROWS_AS(calibrate_theta(-1.0, one, detroit, c, sf), InvalidArgument);
    CHECK_THROWS_AS(calibrate_theta(1e-9, one, detroit, c, sf), NumericError);
}

TEST_CASE("tilted compound Poisson simulation") {
    const auto base = tweedie_to_cpg(detroit);
    Rng rng(31);
    const auto physical = compound_poisson_jumps(base.rate, base.shape, base.scale, 0.0, 50.0, rng);
    const auto untilted = tilted_simulation(detroit, 0.0, 0.0, 50.0, 31);
    REQUIRE(untilted.size() == physical.size());
    for (std::size_t i = 0; i < physical.size(); ++i) {
        CHECK(untilted[i].time == physical[i].time);
        CHECK(untilted[i].size == physical[i].size);
    }

    // Mean of L(1) under the tilt.
    const double theta = 0.02, span = 200000.0;
    const auto jumps = tilted_simulation(detroit, theta, 0.0, span, 8);
    std::vector<double> per_unit(2000, 0.0);
    for (const auto& j : jumps) per_unit[static_cast<std::size_t>(j.time / (span / 2000.0)) % 2000] += j.size;
    for (auto& v : per_unit) v /= span / 2000.0;
    const auto ms = oracle::mean_se(per_unit);
    CHECK(std::abs(ms.mean - psi_theta_derivative(detroit, theta, 0.0).real()) < 4.0 * ms.se);
    CHECK_THROWS_AS(tilted_simulation(detroit, 0.0, 1.0, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(tilted_cpg(detroit, exp_moment_bound(detroit)), DomainError);
}

TEST_CASE("the futures price is a martingale under the tilted measure") {
    // Price at 0 from observed past jumps; price at 1 from the same jumps plus the
    // tilted jumps on (0, 1]. Their mean over paths must equal the price at 0.
    const double theta = 0.015;
    const auto c0 = window(0.0, 3.0, 8.0);
    auto c1 = c0;
    c1.t = 1.0;
    Rng rng(5);
    const auto base = tweedie_to_cpg(detroit);
    const auto history = compound_poisson_jumps(base.rate, base.shape, base.scale, -30.0, 0.0, rng);
    ObservedState s0;
    s0.kind = ObservedState::Kind::jumps;
    s0.jumps = history;
    const double p0 = price(two, c0, theta, s0);

    const auto q = oracle::CompoundPoisson::from_tweedie(detroit.mu, detroit.rho, detroit.kappa).tilted(theta);
    std::mt19937_64 gen(77);
    std::vector<double> p1(20000);
    for (auto& p : p1) {
        ObservedState s1 = s0;
        auto fresh = oracle::sample_jumps(q, 0.0, 1.0, gen);
        std::sort(fresh.begin(), fresh.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
        for (const auto& j : fresh) s1.jumps.push_back({j.time, j.size});
        p = price(two, c1, theta, s1);
    }
    const auto ms = oracle::mean_se(p1);
    CHECK(std::abs(ms.mean - p0) < 3.0 * ms.se);
}
