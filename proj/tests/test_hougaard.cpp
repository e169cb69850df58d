#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "oracles.hpp"
#include "rainfall/error.hpp"
#include "rainfall/hougaard.hpp"
#include "rainfall/pricing.hpp"

using namespace rainfall;

namespace {

const HougaardParams detroit{4.55, 14.85, 1.62};
const HougaardParams heathrow{2.15, 143.01, 1.85};
const HougaardParams light{0.8, 0.5, 1.2};

oracle::Kernel kernel_of(const CarmaSpec& s) { return {s.lambdas, s.weights}; }

oracle::CompoundPoisson law_of(const HougaardParams& p) {
    return oracle::CompoundPoisson::from_tweedie(p.mu, p.rho, p.kappa);
}

bool close(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("parameter checks") {
    CHECK_NOTHROW(detroit.check());
    CHECK_THROWS_AS((HougaardParams{0.0, 1.0, 1.5}.check()), InvalidArgument);
    CHECK_THROWS_AS((HougaardParams{1.0, -1.0, 1.5}.check()), InvalidArgument);
    CHECK_THROWS_AS((HougaardParams{1.0, 1.0, 1.0}.check()), InvalidArgument);
    CHECK_THROWS_AS((HougaardParams{1.0, 1.0, 2.0}.check()), InvalidArgument);
    CHECK(detroit.variance() == doctest::Approx(14.85 * std::pow(4.55, 1.62)));
}

TEST_CASE("compound Poisson representation matches the cumulant solution") {
    for (const auto& p : {detroit, heathrow, light}) {
        const auto cpg = tweedie_to_cpg(p);
        const auto o = law_of(p);
        CHECK(cpg.rate == doctest::Approx(o.rate).epsilon(1e-12));
        CHECK(cpg.shape == doctest::Approx(o.shape).epsilon(1e-12));
        CHECK(cpg.scale == doctest::Approx(o.scale).epsilon(1e-12));
        CHECK(exp_moment_bound(p) == doctest::Approx(1.0 / o.scale).epsilon(1e-12));
    }
}

TEST_CASE("Levy density integrates to the jump rate, mean and variance") {
    boost::math::quadrature::exp_sinh<double> integrator;
    for (const auto& p : {detroit, heathrow, light}) {
        const auto o = law_of(p);
        auto moment = [&](int n) {
            return integrator.integrate([&](double y) { return std::pow(y, n) * levy_density(p, y); }, 1e-12);
        };
        CHECK(moment(0) == doctest::Approx(o.rate).epsilon(1e-8));
        CHECK(moment(1) == doctest::Approx(p.mu).epsilon(1e-8));
        CHECK(moment(2) == doctest::Approx(p.variance()).epsilon(1e-8));
    }
    CHECK_THROWS_AS(levy_density(detroit, 0.0), InvalidArgument);
}

TEST_CASE("cumulants of L(1)") {
    for (const auto& p : {detroit, heathrow, light}) {
        for (int n = 1; n <= 3; ++n)
            CHECK(levy_cumulant(p, n) == doctest::Approx(oracle::tweedie_cumulant(p.mu, p.rho, p.kappa, n)).epsilon(1e-12));
        // Fourth cumulant from the Gamma jump moments: rate E[J^4].
        const auto o = law_of(p);
        const double k4 = o.rate * o.shape * (o.shape + 1) * (o.shape + 2) * (o.shape + 3) * std::pow(o.scale, 4);
        CHECK(levy_cumulant(p, 4) == doctest::Approx(k4).epsilon(1e-12));
    }
    CHECK_THROWS_AS(levy_cumulant(detroit, 0), InvalidArgument);
}

TEST_CASE("tilted exponent matches the tilted compound Poisson law") {
    const double k = exp_moment_bound(detroit);
    const auto o = law_of(detroit);
    for (double theta : {-0.05, 0.0, 0.01, 0.03, 0.04}) {
        const auto t = o.tilted(theta);
        for (Complex z : {Complex(0.0, 0.3), Complex(0.0, -2.0), Complex(0.001, 0.0), Complex(-0.5, 1.0),
                          Complex(1e-9, 1e-9)}) {
            if (z.real() + theta >= k) continue;
            CHECK(close(psi_theta(detroit, theta, z), t.exponent(z), 1e-12));
        }
    }
    CHECK(std::abs(psi_theta(detroit, 0.02, 0.0)) == 0.0);
    CHECK_THROWS_AS(psi_theta(detroit, k, Complex(0.0, 1.0)), DomainError);
    CHECK_THROWS_AS(psi_theta(detroit, 0.0, Complex(1.01 * k, 0.0)), DomainError);
    CHECK_THROWS_AS(psi_theta_derivative(detroit, 1.5 * k, 0.0), DomainError);
}

TEST_CASE("tilted exponent against the integral of the Levy density") {
    boost::math::quadrature::exp_sinh<double> integrator;
    const double theta = 0.02;
    const Complex z(-0.2, 0.7);  // damped, so the oscillatory tail converges quickly
    // Tilted density; zero once the density itself underflows.
    auto tilted = [&](double y) {
        const double d = levy_density(detroit, y);
        return d > 0.0 ? std::exp(theta * y) * d : 0.0;
    };
    const double re = integrator.integrate(
        [&](double y) { return (std::exp(-0.2 * y) * std::cos(0.7 * y) - 1.0) * tilted(y); }, 1e-12);
    const double im =
        integrator.integrate([&](double y) { return std::exp(-0.2 * y) * std::sin(0.7 * y) * tilted(y); }, 1e-12);
    CHECK(close(psi_theta(detroit, theta, z), Complex(re, im), 1e-8));
}

TEST_CASE("derivative of the tilted exponent") {
    for (double theta : {-0.02, 0.0, 0.025}) {
        const double h = 1e-6;
        for (Complex z : {Complex(0.0, 0.0), Complex(0.0, 0.5), Complex(-0.1, -0.2)}) {
            const Complex fd = (psi_theta(detroit, theta, z + h) - psi_theta(detroit, theta, z - h)) / (2.0 * h);
            CHECK(close(psi_theta_derivative(detroit, theta, z), fd, 1e-7));
        }
    }
    // Tilted mean rate.
    const double k = exp_moment_bound(detroit);
    CHECK(psi_theta_derivative(detroit, 0.03, 0.0).real() ==
          doctest::Approx(4.55 * std::pow(1.0 - 0.03 / k, -1.0 / 0.62)).epsilon(1e-13));
}

TEST_CASE("Esscher-tilted compound Poisson parameters") {
    const auto o = law_of(detroit);
    for (double theta : {-0.3, 0.0, 0.02, 0.04}) {
        const auto t = tilted_cpg(detroit, theta);
        const auto expect = o.tilted(theta);
        CHECK(t.rate == doctest::Approx(expect.rate).epsilon(1e-12));
        CHECK(t.shape == doctest::Approx(expect.shape).epsilon(1e-12));
        CHECK(t.scale == doctest::Approx(expect.scale).epsilon(1e-12));
    }
}

TEST_CASE("kernel power integrals match quadrature of the increment weight") {
    for (const auto& s : {CarmaSpec::make({4.54}, {1.0}), CarmaSpec::make({4.79, 0.31}, {0.92, 0.08}),
                          CarmaSpec::make({2.0, 0.7, 0.05}, {0.5, 0.3, 0.2})}) {
        const auto k = kernel_of(s);
        for (double delta : {1.0, 0.25}) {
            for (int n = 1; n <= 4; ++n) {
                const double expect =
                    oracle::integrate_to(delta, [&](double u) { return std::pow(k.increment_weight(0, delta, u), n); });
                CHECK(kernel_power_integral(s, delta, n) == doctest::Approx(expect).epsilon(1e-10));
            }
        }
        // The first power integrates the full kernel mass times delta.
        CHECK(kernel_power_integral(s, 1.0, 1) == doctest::Approx(s.kernel_mass()).epsilon(1e-12));
    }
    CHECK_THROWS_AS(kernel_power_integral(CarmaSpec::make({1.0}, {1.0}), 1.0, 0), InvalidArgument);
}

TEST_CASE("increment cumulants") {
    const auto s = CarmaSpec::make({4.79, 0.31}, {0.92, 0.08});
    const auto k = kernel_of(s);
    for (int n = 1; n <= 3; ++n) {
        const double expect = oracle::increment_cumulant(k, heathrow.mu, heathrow.rho, heathrow.kappa, 1.0, n);
        CHECK(cumulants_increment(s, heathrow, 1.0, n) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("characteristic function of an increment") {
    for (const auto& [s, p] : {std::pair{CarmaSpec::make({4.54}, {1.0}), detroit},
                               std::pair{CarmaSpec::make({4.79, 0.31}, {0.92, 0.08}), heathrow}}) {
        const auto k = kernel_of(s);
        const auto o = law_of(p);
        for (double u : {0.01, 0.3, 1.0, 5.0, 40.0}) {
            const Complex expect = oracle::log_charfn_increment(k, o, 1.0, u);
            CHECK(close(log_charfn_increment(s, p, 1.0, u), expect, 1e-8));
            const Complex phi = charfn_increment(s, p, 1.0, u);
            CHECK(std::abs(phi) <= 1.0 + 1e-14);
            CHECK(close(charfn_increment(s, p, 1.0, -u), std::conj(phi), 1e-14));
        }
        CHECK(close(charfn_increment(s, p, 1.0, 0.0), 1.0, 0.0));
    }
}

TEST_CASE("log characteristic function near zero is the cumulant expansion") {
    const auto s = CarmaSpec::make({4.54}, {1.0});
    const double u = 1e-4;
    const Complex expect(-0.5 * u * u * cumulants_increment(s, detroit, 1.0, 2),
                         u * cumulants_increment(s, detroit, 1.0, 1) -
                             u * u * u / 6.0 * cumulants_increment(s, detroit, 1.0, 3));
    const Complex got = log_charfn_increment(s, detroit, 1.0, u);
    CHECK(got.imag() == doctest::Approx(expect.imag()).epsilon(1e-10));
    CHECK(got.real() == doctest::Approx(expect.real()).epsilon(1e-6));
}
