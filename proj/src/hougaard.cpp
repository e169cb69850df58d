#include "rainfall/hougaard.hpp"

#include <algorithm>
#include <cmath>

#include "rainfall/error.hpp"

namespace rainfall {

void HougaardParams::check() const {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("Hougaard mu must be positive");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("Hougaard rho must be positive");
    if (!(kappa > 1.0 && kappa < 2.0))
        throw InvalidArgument("Hougaard kappa must lie in (1, 2), got " + std::to_string(kappa));
}

double HougaardParams::variance() const { return rho * std::pow(mu, kappa); }

CompoundPoissonGamma tweedie_to_cpg(const HougaardParams& params) {
    params.check();
    const double k1 = params.kappa - 1.0;
    CompoundPoissonGamma out;
    out.shape = (2.0 - params.kappa) / k1;
    out.scale = params.rho * k1 * std::pow(params.mu, k1);
    out.rate = std::pow(params.mu, 2.0 - params.kappa) / (params.rho * (2.0 - params.kappa));

    const double mean = out.rate * out.shape * out.scale;
    const double var = out.rate * out.shape * (out.shape + 1.0) * out.scale * out.scale;
    if (std::abs(mean - params.mu) > 1e-10 * params.mu ||
        std::abs(var - params.variance()) > 1e-10 * params.variance())
        throw NumericError("compound-Poisson-Gamma conversion failed its moment check");
    return out;
}

double levy_density(const HougaardParams& params, double y) {
    params.check();
    if (!(y > 0.0)) throw InvalidArgument("levy_density: y must be positive");
    const double k1 = params.kappa - 1.0;
    const double log_norm = std::log(params.rho) / k1 + std::lgamma(params.kappa / k1) +
                            params.kappa / k1 * std::log(k1);
    return std::exp(-log_norm + (3.0 - 2.0 * params.kappa) / k1 * std::log(y) -
                    exp_moment_bound(params) * y);
}

double exp_moment_bound(const HougaardParams& params) {
    params.check();
    return std::pow(params.mu, 1.0 - params.kappa) / (params.rho * (params.kappa - 1.0));
}

double levy_cumulant(const HougaardParams& params, int n) {
    if (n < 1) throw InvalidArgument("cumulant order must be >= 1");
    const auto cpg = tweedie_to_cpg(params);
    // rate * E[J^n] for Gamma(shape, scale) jumps.
    double moment = 1.0;
    for (int j = 0; j < n; ++j) moment *= (cpg.shape + j) * cpg.scale;
    return cpg.rate * moment;
}

namespace {

// Complex log1p/expm1 built on the real ones, accurate for small arguments
// without switching branches (a switch would make the integrands jump).
Complex log1p_complex(Complex w) {
    const double x = w.real(), y = w.imag();
    return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}

Complex expm1_complex(Complex w) {
    const double x = w.real(), y = w.imag();
    const double s = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

}  // namespace

Complex psi_theta(const HougaardParams& params, double theta, Complex z) {
    const auto cpg = tweedie_to_cpg(params);
    const double k = 1.0 / cpg.scale;
    if (!(theta < k) || !(z.real() + theta < k))
        throw DomainError("Esscher tilt at or beyond the exponential-moment bound k = " + std::to_string(k) +
                          " (the price explodes)");
    // rate (1 - theta/k)^(-shape) [ (1 - z/(k - theta))^(-shape) - 1 ], written with
    // log1p/expm1 so small arguments keep full relative precision.
    const double base = std::pow(1.0 - theta / k, -cpg.shape);
    return cpg.rate * base * expm1_complex(-cpg.shape * log1p_complex(-z / (k - theta)));
}

Complex psi_theta_derivative(const HougaardParams& params, double theta, Complex z) {
    const double k = exp_moment_bound(params);
    if (!(theta < k) || !(z.real() + theta < k))
        throw DomainError("Esscher tilt at or beyond the exponential-moment bound k = " + std::to_string(k));
    return params.mu * std::pow(1.0 - (z + theta) / k, -1.0 / (params.kappa - 1.0));
}

numerics::ExpSum increment_kernel_before(const CarmaSpec& spec, double delta) {
    std::vector<numerics::ExpSum::Term> terms;
    for (std::size_t k = 0; k < spec.lambdas.size(); ++k) {
        const double l = spec.lambdas[k];
        terms.push_back({-spec.weights[k] * std::expm1(-l * delta) / l, -l});
    }
    return numerics::ExpSum(std::move(terms));
}

numerics::ExpSum increment_kernel_within(const CarmaSpec& spec) {
    std::vector<numerics::ExpSum::Term> terms;
    for (std::size_t k = 0; k < spec.lambdas.size(); ++k) {
        const double l = spec.lambdas[k];
        terms.push_back({spec.weights[k] / l, 0.0});
        terms.push_back({-spec.weights[k] / l, -l});
    }
    return numerics::ExpSum(std::move(terms));
}

double kernel_power_integral(const CarmaSpec& spec, double delta, int n) {
    if (n < 1) throw InvalidArgument("kernel power must be >= 1");
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
    const auto g1 = increment_kernel_before(spec, delta);
    const auto g2 = increment_kernel_within(spec);
    return g1.pow(n).integral_to_infinity() + g2.pow(n).integral(delta);
}

Complex log_charfn_increment(const CarmaSpec& spec, const HougaardParams& params, double delta,
                             Complex u) {
    validate(spec, true);
    params.check();
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
    if (u == 0.0) return 0.0;
    const auto g1 = increment_kernel_before(spec, delta);
    const Complex iu(-u.imag(), u.real());
    const double horizon = 40.0 / spec.lambdas.back();

    auto before = [&](double s) { return psi_theta(params, 0.0, iu * g1(s)); };
    // g2 directly in expm1 form: the exponential-sum form cancels for small s.
    auto g2_stable = [&spec](double s) {
        double v = 0.0;
        for (std::size_t k = 0; k < spec.lambdas.size(); ++k)
            v -= spec.weights[k] * std::expm1(-spec.lambdas[k] * s) / spec.lambdas[k];
        return v;
    };
    auto within = [&](double s) { return psi_theta(params, 0.0, iu * g2_stable(s)); };
    // Splitting the long range at a few e-folding times of the slowest rate keeps
    // the adaptive rule from sampling only the flat tail.
    const double knee = std::min(horizon, 5.0 / spec.lambdas.back());
    Complex total = numerics::integrate(before, 0.0, knee, 1e-12, 1e-14).value;
    total += numerics::integrate(before, knee, horizon, 1e-12, 1e-14).value;
    total += numerics::integrate(within, 0.0, delta, 1e-12, 1e-14).value;
    return total;
}

Complex charfn_increment(const CarmaSpec& spec, const HougaardParams& params, double delta, double u) {
    return std::exp(log_charfn_increment(spec, params, delta, Complex(u, 0.0)));
}

double cumulants_increment(const CarmaSpec& spec, const HougaardParams& params, double delta, int n) {
    if (n < 1 || n > 3) throw InvalidArgument("cumulant order must be 1, 2 or 3");
    validate(spec, true);
    return levy_cumulant(params, n) * kernel_power_integral(spec, delta, n);
}

}  // namespace rainfall
