#pragma once

#include "rainfall/carma.hpp"
#include "rainfall/numerics.hpp"

namespace rainfall {

/// Tweedie parameterisation of L(1): mean mu, variance rho * mu^kappa, kappa in (1, 2).
struct HougaardParams {
    double mu = 0.0;
    double rho = 0.0;
    double kappa = 0.0;

    /// Throws InvalidArgument unless mu > 0, rho > 0 and 1 < kappa < 2.
    void check() const;
    double variance() const;
};

/// The same law as a compound Poisson process with Gamma(shape, scale) jumps.
struct CompoundPoissonGamma {
    double rate = 0.0;
    double shape = 0.0;
    double scale = 0.0;
};

/// shape = (2 - kappa) / (kappa - 1), scale = rho (kappa - 1) mu^(kappa - 1),
/// rate = mu / (shape * scale). The first two moments are verified before returning.
CompoundPoissonGamma tweedie_to_cpg(const HougaardParams& params);

/// Levy density nu(y) of L, y > 0.
double levy_density(const HougaardParams& params, double y);

/// Supremum of the exponential moments of L(1): mu^(1-kappa) / (rho (kappa - 1)).
/// Equal to the Gamma jump rate 1 / scale.
double exp_moment_bound(const HougaardParams& params);

/// n-th cumulant of L(1), n >= 1.
double levy_cumulant(const HougaardParams& params, int n);

/// psi_theta(z) = integral of e^{theta y} (e^{z y} - 1) nu(dy), the exponent of the
/// Esscher-tilted Levy measure. Requires Re(z) + theta < k; throws DomainError otherwise.
Complex psi_theta(const HougaardParams& params, double theta, Complex z);
/// d psi_theta / dz. At z = 0 this is the tilted mean rate mu (1 - theta/k)^(-1/(kappa-1)).
Complex psi_theta_derivative(const HougaardParams& params, double theta, Complex z);

/// Kernels of the increment over [0, delta] as sums of exponentials:
///   g1(s) = sum_k w_k (e^{-lambda_k s} - e^{-lambda_k (delta + s)}) / lambda_k,  s >= 0
///           (jumps before the interval, s time units before its start)
///   g2(u) = sum_k w_k (1 - e^{-lambda_k u}) / lambda_k,  u in [0, delta]
///           (jumps inside the interval, u time units before its end)
numerics::ExpSum increment_kernel_before(const CarmaSpec& spec, double delta);
numerics::ExpSum increment_kernel_within(const CarmaSpec& spec);

/// Integral of g1^n over [0, inf) plus integral of g2^n over [0, delta], exactly.
double kernel_power_integral(const CarmaSpec& spec, double delta, int n);

/// log E exp(i u Delta Y) for complex u, by quadrature of psi_0 along the two kernels.
/// The infinite range is truncated at 40 / min(lambda). Requires -Im(u) sup g < k.
Complex log_charfn_increment(const CarmaSpec& spec, const HougaardParams& params, double delta,
                             Complex u);
Complex charfn_increment(const CarmaSpec& spec, const HougaardParams& params, double delta, double u);

/// n-th cumulant of Delta Y: levy_cumulant(n) * kernel_power_integral(n).
double cumulants_increment(const CarmaSpec& spec, const HougaardParams& params, double delta, int n);

}  // namespace rainfall
