#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rainfall {

/// CARMA(p, p-1) intensity kernel in spectral form, h(s) = sum_i w_i exp(-lambda_i s).
/// Rates are per step of the observation grid.
struct CarmaSpec {
    std::vector<double> lambdas;  // distinct, > 0, sorted descending
    std::vector<double> weights;  // sum to 1

    int p() const { return static_cast<int>(lambdas.size()); }

    /// Validates and sorts into canonical (descending-rate) order.
    static CarmaSpec make(std::vector<double> lambdas, std::vector<double> weights,
                          bool allow_negative_weights = false);

    double kernel(double s) const;
    /// Integral of the kernel over [0, inf): sum_i w_i / lambda_i.
    double kernel_mass() const;
};

/// Throws InvalidArgument when the spec violates an invariant. Negative weights
/// are accepted only with `allow_negative_weights`, and then the kernel must
/// still be non-negative on a dense grid.
void validate(const CarmaSpec& spec, bool allow_negative_weights = false);

/// a(x) = prod_i (x + lambda_i) and b of degree p-1 with b(-lambda_i)/a'(-lambda_i) = w_i.
/// Coefficients ascending. Because the weights sum to one, b is monic.
struct CarmaPolynomials {
    std::vector<double> a;
    std::vector<double> b;
};

/// Throws InvalidArgument when a and b share a root (a zero weight makes the
/// representation non-minimal) unless `allow_common_roots` is set.
CarmaPolynomials spectral_to_polynomials(const CarmaSpec& spec, bool allow_common_roots = false);

/// Autocovariance of the integrated increments Delta Y at lags 0..h_max, for a
/// driving Levy process with Var L(1) = sigma2 and grid step delta.
std::vector<double> acvf_increments(const CarmaSpec& spec, double sigma2, double delta,
                                    std::size_t h_max);

/// ARMA(p, q):  X_t - sum phi_i X_{t-i} = e_t + sum theta_j e_{t-j}.
struct ArmaSpec {
    std::vector<double> phi;
    std::vector<double> theta;

    int p() const { return static_cast<int>(phi.size()); }
    int q() const { return static_cast<int>(theta.size()); }
};

bool is_causal(const ArmaSpec& arma);
bool is_invertible(const ArmaSpec& arma);

struct ImpliedArma {
    ArmaSpec arma;
    double innovation_variance = 0.0;
};

/// Weak ARMA(p, p) followed by the sampled increments. For p = 1 this is the
/// closed-form map; otherwise carma_to_arma_numeric.
ImpliedArma carma_to_arma(const CarmaSpec& spec, double sigma2, double delta);

/// General path: AR roots exp(-lambda_i delta), MA part by spectral factorization
/// of the AR-filtered autocovariances, keeping the invertible root set.
ImpliedArma carma_to_arma_numeric(const CarmaSpec& spec, double sigma2, double delta);

/// The p = 1 map phi = e^{-x}, theta = -r - sqrt(r^2 - 1) with x = lambda delta.
ImpliedArma carma1_to_arma(double lambda, double sigma2, double delta);

/// Exact ARMA autocovariance at lags 0..h_max.
std::vector<double> arma_acvf(const ArmaSpec& arma, double innovation_variance, std::size_t h_max);

struct PredictionErrors {
    std::vector<double> residuals;
    std::vector<double> mse_ratio;  // r_{i-1}: normalized one-step mean-square error
    double weighted_sse = 0.0;      // sum residual^2 / r
};

/// One-step predictors by the innovations algorithm applied to the ARMA
/// transformation of the data. The data are centred by `mean`, or by the sample
/// mean when it is not given.
PredictionErrors one_step_prediction_errors(const ArmaSpec& arma, double innovation_variance,
                                            std::span<const double> data,
                                            std::optional<double> mean = std::nullopt);

}  // namespace rainfall
