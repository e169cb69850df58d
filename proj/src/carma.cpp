#include "rainfall/carma.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rainfall/error.hpp"
#include "rainfall/numerics.hpp"

namespace rainfall {

using numerics::poly_eval;

// ---------------------------------------------------------------- CarmaSpec

void validate(const CarmaSpec& spec, bool allow_negative_weights) {
    const auto p = spec.lambdas.size();
    if (p < 1) throw InvalidArgument("CARMA order p must be >= 1");
    if (p > 3) throw InvalidArgument("CARMA order p > 3 is not supported");
    if (spec.weights.size() != p) throw InvalidArgument("CARMA spec needs one weight per rate");
    for (std::size_t i = 0; i < p; ++i) {
        const double l = spec.lambdas[i];
        if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("CARMA rates must be positive and finite");
        if (!std::isfinite(spec.weights[i])) throw InvalidArgument("CARMA weights must be finite");
        if (i > 0) {
            if (!(spec.lambdas[i - 1] > l))
                throw InvalidArgument("CARMA rates must be distinct and sorted descending");
            if ((spec.lambdas[i - 1] - l) <= 1e-10 * spec.lambdas[i - 1])
                throw InvalidArgument("CARMA rates must be distinct");
        }
        if (!allow_negative_weights && spec.weights[i] < 0.0)
            throw InvalidArgument("negative CARMA weight (enable allow_negative_weights to permit)");
    }
    const double sum = std::accumulate(spec.weights.begin(), spec.weights.end(), 0.0);
    const double scale = std::accumulate(spec.weights.begin(), spec.weights.end(), 0.0,
                                         [](double acc, double w) { return acc + std::abs(w); });
    if (std::abs(sum - 1.0) > 1e-12 * std::max(1.0, scale))
        throw InvalidArgument("CARMA weights must sum to 1");
    if (allow_negative_weights) {
        const double horizon = 40.0 / spec.lambdas.back();
        for (int k = 0; k <= 4000; ++k) {
            const double s = horizon * k / 4000.0;
            if (spec.kernel(s) < -1e-12)
                throw InvalidArgument("CARMA kernel is negative at s = " + std::to_string(s));
        }
    }
}

CarmaSpec CarmaSpec::make(std::vector<double> lambdas, std::vector<double> weights,
                          bool allow_negative_weights) {
    if (lambdas.size() != weights.size()) throw InvalidArgument("CARMA spec needs one weight per rate");
    std::vector<std::size_t> idx(lambdas.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
    CarmaSpec spec;
    for (auto i : idx) {
        spec.lambdas.push_back(lambdas[i]);
        spec.weights.push_back(weights[i]);
    }
    validate(spec, allow_negative_weights);
    return spec;
}

double CarmaSpec::kernel(double s) const {
    double h = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) h += weights[i] * std::exp(-lambdas[i] * s);
    return h;
}

double CarmaSpec::kernel_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) m += weights[i] / lambdas[i];
    return m;
}

CarmaPolynomials spectral_to_polynomials(const CarmaSpec& spec, bool allow_common_roots) {
    const auto p = spec.lambdas.size();
    CarmaPolynomials out;
    out.a = {1.0};
    for (double l : spec.lambdas) {
        const double factor[] = {l, 1.0};
        out.a = numerics::poly_multiply(out.a, factor);
    }
    // Lagrange form: b(x) = sum_i w_i prod_{j != i} (x + lambda_j). Then
    // b(-lambda_i) = w_i a'(-lambda_i) and the leading coefficient is sum w_i = 1.
    out.b.assign(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        std::vector<double> term = {spec.weights[i]};
        for (std::size_t j = 0; j < p; ++j) {
            if (j == i) continue;
            const double factor[] = {spec.lambdas[j], 1.0};
            term = numerics::poly_multiply(term, factor);
        }
        for (std::size_t k = 0; k < term.size(); ++k) out.b[k] += term[k];
    }
    if (!allow_common_roots) {
        const auto da = numerics::poly_derivative(out.a);
        for (std::size_t j = 0; j < p; ++j) {
            const double x = -spec.lambdas[j];
            const double scale = std::abs(poly_eval(std::span<const double>(da), x));
            if (std::abs(poly_eval(std::span<const double>(out.b), x)) <= 1e-12 * scale)
                throw InvalidArgument("a and b share the root " + std::to_string(x) +
                                      " (zero weight: non-minimal CARMA representation)");
        }
    }
    return out;
}

std::vector<double> acvf_increments(const CarmaSpec& spec, double sigma2, double delta,
                                    std::size_t h_max) {
    if (!(sigma2 > 0.0)) throw InvalidArgument("acvf_increments: sigma2 must be positive");
    if (!(delta > 0.0)) throw InvalidArgument("acvf_increments: delta must be positive");
    const auto polys = spectral_to_polynomials(spec, true);
    const auto da = numerics::poly_derivative(polys.a);
    std::vector<double> c(h_max + 1, 0.0);
    for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
        const double l = spec.lambdas[i];
        const double beta = sigma2 * poly_eval(std::span<const double>(polys.b), -l) *
                            poly_eval(std::span<const double>(polys.b), l) /
                            (poly_eval(std::span<const double>(da), -l) *
                             poly_eval(std::span<const double>(polys.a), l));
        const double x = l * delta;
        const double em1 = std::expm1(-x);  // e^{-x} - 1
        c[0] += 2.0 * beta / (l * l) * (em1 + x);
        const double lag1 = beta / (l * l) * em1 * em1;
        const double decay = std::exp(-x);
        double term = lag1;
        for (std::size_t h = 1; h <= h_max; ++h) {
            c[h] += term;
            term *= decay;
        }
    }
    return c;
}

// ---------------------------------------------------------------- ARMA helpers

namespace {

bool roots_outside_unit_circle(const std::vector<double>& ascending) {
    std::size_t deg = ascending.size();
    while (deg > 1 && ascending[deg - 1] == 0.0) --deg;
    if (deg <= 1) return true;
    const auto roots = numerics::poly_roots(std::span<const double>(ascending).first(deg));
    return std::all_of(roots.begin(), roots.end(), [](Complex z) { return std::abs(z) > 1.0 + 1e-10; });
}

std::vector<double> ar_polynomial(const ArmaSpec& arma) {
    std::vector<double> c{1.0};
    for (double f : arma.phi) c.push_back(-f);
    return c;
}

std::vector<double> ma_polynomial(const ArmaSpec& arma) {
    std::vector<double> c{1.0};
    c.insert(c.end(), arma.theta.begin(), arma.theta.end());
    return c;
}

/// Autocovariance of U_t = phi(B) X_t at lags 0..p, given gamma_X at lags 0..2p.
std::vector<double> filtered_acvf(std::span<const double> ar, std::span<const double> gamma) {
    const auto p = ar.size() - 1;
    std::vector<double> out(p + 1, 0.0);
    for (std::size_t k = 0; k <= p; ++k)
        for (std::size_t i = 0; i <= p; ++i)
            for (std::size_t j = 0; j <= p; ++j) {
                const auto lag = static_cast<long>(k) - static_cast<long>(i) + static_cast<long>(j);
                out[k] += ar[i] * ar[j] * gamma[static_cast<std::size_t>(std::labs(lag))];
            }
    return out;
}

/// Refines (sigma2, theta_1..theta_p) so that sigma2 * sum_l theta_l theta_{l+k} = target[k].
void polish_ma_factorization(std::span<const double> target, std::vector<double>& theta, double& sigma2) {
    const auto p = theta.size();
    auto residual = [&](const std::vector<double>& th, double s) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(p + 1));
        for (std::size_t k = 0; k <= p; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l + k <= p; ++l) {
                const double a = l == 0 ? 1.0 : th[l - 1];
                const double b = (l + k) == 0 ? 1.0 : th[l + k - 1];
                acc += a * b;
            }
            r(static_cast<Eigen::Index>(k)) = s * acc - target[k];
        }
        return r;
    };
    Eigen::VectorXd r = residual(theta, sigma2);
    for (int iter = 0; iter < 6; ++iter) {
        if (r.norm() <= 1e-16 * std::abs(target[0])) break;
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p + 1), static_cast<Eigen::Index>(p + 1));
        auto th = [&](long idx) { return idx == 0 ? 1.0 : theta[static_cast<std::size_t>(idx - 1)]; };
        for (std::size_t k = 0; k <= p; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l + k <= p; ++l) acc += th(static_cast<long>(l)) * th(static_cast<long>(l + k));
            jac(static_cast<Eigen::Index>(k), 0) = acc;
            for (std::size_t m = 1; m <= p; ++m) {
                double d = 0.0;
                if (m >= k) d += th(static_cast<long>(m - k));
                if (m + k <= p) d += th(static_cast<long>(m + k));
                jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = sigma2 * d;
            }
        }
        const Eigen::VectorXd step = jac.fullPivLu().solve(-r);
        std::vector<double> trial = theta;
        for (std::size_t m = 0; m < p; ++m) trial[m] += step(static_cast<Eigen::Index>(m + 1));
        const double trial_sigma2 = sigma2 + step(0);
        const Eigen::VectorXd trial_r = residual(trial, trial_sigma2);
        if (!(trial_r.norm() < r.norm())) break;
        theta = std::move(trial);
        sigma2 = trial_sigma2;
        r = trial_r;
    }
}

}  // namespace

bool is_causal(const ArmaSpec& arma) { return roots_outside_unit_circle(ar_polynomial(arma)); }
bool is_invertible(const ArmaSpec& arma) { return roots_outside_unit_circle(ma_polynomial(arma)); }

ImpliedArma carma1_to_arma(double lambda, double sigma2, double delta) {
    if (!(lambda > 0.0) || !(delta > 0.0) || !(sigma2 > 0.0))
        throw InvalidArgument("carma1_to_arma: lambda, delta and sigma2 must be positive");
    const double x = lambda * delta;
    const double e = std::exp(-x);
    const double e2 = e * e;
    const double num = 1.0 - x - e2 * (1.0 + x);
    const double den = 1.0 - 2.0 * x * e - e2;
    ImpliedArma out;
    out.arma.phi = {e};
    double theta = 0.0;
    if (den > 0.0) {
        const double r = num / den;
        if (!(r < -1.0)) throw NumericError("carma1_to_arma: no invertible MA root (r >= -1)");
        // -r - sqrt(r^2 - 1) == 1 / (-r + sqrt(r^2 - 1)), the form without cancellation.
        theta = 1.0 / (-r + std::sqrt(r * r - 1.0));
    }
    out.arma.theta = {theta};
    const CarmaSpec spec{{lambda}, {1.0}};
    const auto c = acvf_increments(spec, sigma2, delta, 1);
    const double gamma_u0 = c[0] * (1.0 + e2) - 2.0 * e * c[1];
    out.innovation_variance = gamma_u0 / (1.0 + theta * theta);
    return out;
}

ImpliedArma carma_to_arma_numeric(const CarmaSpec& spec, double sigma2, double delta) {
    validate(spec, true);
    const auto p = static_cast<std::size_t>(spec.p());
    const auto gamma = acvf_increments(spec, sigma2, delta, 2 * p);

    std::vector<double> ar{1.0};
    for (double l : spec.lambdas) {
        const double factor[] = {1.0, -std::exp(-l * delta)};
        ar = numerics::poly_multiply(ar, factor);
    }
    const auto gu = filtered_acvf(ar, gamma);

    // z^p G(z) with G the Laurent autocovariance generating function of U.
    std::vector<double> laurent(2 * p + 1);
    for (std::size_t k = 0; k <= p; ++k) laurent[p + k] = laurent[p - k] = gu[k];
    std::size_t top = 2 * p;
    while (top > p && std::abs(laurent[top]) <= 1e-300) --top;

    std::vector<Complex> outside;
    if (top > p) {
        const auto roots = numerics::poly_roots(std::span<const double>(laurent).first(top + 1));
        for (auto z : roots) {
            const double r = std::abs(z);
            if (std::abs(r - 1.0) < 1e-9)
                throw NumericError("MA factorization: root on the unit circle, no invertible solution");
            if (r > 1.0) outside.push_back(z);
        }
    }
    // Missing roots correspond to MA coefficients that vanish (roots at infinity).
    std::vector<Complex> theta_c{1.0};
    for (auto z : outside) {
        std::vector<Complex> next(theta_c.size() + 1, 0.0);
        for (std::size_t i = 0; i < theta_c.size(); ++i) {
            next[i] += theta_c[i];
            next[i + 1] -= theta_c[i] / z;
        }
        theta_c = std::move(next);
    }
    std::vector<double> theta(p, 0.0);
    for (std::size_t j = 1; j < theta_c.size() && j <= p; ++j) theta[j - 1] = theta_c[j].real();
    double norm = 1.0;
    for (double t : theta) norm += t * t;
    double innov = gu[0] / norm;
    polish_ma_factorization(gu, theta, innov);

    ImpliedArma out;
    out.arma.phi.resize(p);
    for (std::size_t i = 0; i < p; ++i) out.arma.phi[i] = -ar[i + 1];
    out.arma.theta = std::move(theta);
    out.innovation_variance = innov;
    if (!(innov > 0.0) || !is_invertible(out.arma))
        throw NumericError("MA factorization did not produce an invertible solution");
    return out;
}

ImpliedArma carma_to_arma(const CarmaSpec& spec, double sigma2, double delta) {
    validate(spec, true);
    if (spec.p() == 1) return carma1_to_arma(spec.lambdas[0], sigma2, delta);
    return carma_to_arma_numeric(spec, sigma2, delta);
}

std::vector<double> arma_acvf(const ArmaSpec& arma, double innovation_variance, std::size_t h_max) {
    const auto p = static_cast<std::size_t>(arma.p());
    const auto q = static_cast<std::size_t>(arma.q());
    auto th = [&](std::size_t j) { return j == 0 ? 1.0 : arma.theta[j - 1]; };

    std::vector<double> psi(q + 1, 0.0);
    for (std::size_t j = 0; j <= q; ++j) {
        psi[j] = th(j);
        for (std::size_t i = 1; i <= std::min(j, p); ++i) psi[j] += arma.phi[i - 1] * psi[j - i];
    }
    auto rhs = [&](std::size_t k) {
        double acc = 0.0;
        for (std::size_t j = k; j <= q; ++j) acc += th(j) * psi[j - k];
        return innovation_variance * acc;
    };

    std::vector<double> gamma(std::max(h_max, p) + 1, 0.0);
    const auto n = static_cast<Eigen::Index>(p + 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (std::size_t k = 0; k <= p; ++k) {
        for (std::size_t i = 1; i <= p; ++i) {
            const auto lag = static_cast<std::size_t>(std::labs(static_cast<long>(k) - static_cast<long>(i)));
            a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(lag)) -= arma.phi[i - 1];
        }
        b(static_cast<Eigen::Index>(k)) = rhs(k);
    }
    const Eigen::VectorXd g = a.fullPivLu().solve(b);
    for (std::size_t k = 0; k <= p; ++k) gamma[k] = g(static_cast<Eigen::Index>(k));
    for (std::size_t k = p + 1; k < gamma.size(); ++k) {
        double acc = rhs(k);
        for (std::size_t i = 1; i <= p; ++i) acc += arma.phi[i - 1] * gamma[k - i];
        gamma[k] = acc;
    }
    gamma.resize(h_max + 1);
    return gamma;
}

PredictionErrors one_step_prediction_errors(const ArmaSpec& arma, double innovation_variance,
                                            std::span<const double> data, std::optional<double> mean) {
    if (!(innovation_variance > 0.0)) throw InvalidArgument("innovation variance must be positive");
    if (!is_causal(arma)) throw InvalidArgument("ARMA model is not causal");
    if (!is_invertible(arma)) throw InvalidArgument("ARMA model is not invertible");
    const std::size_t n = data.size();
    PredictionErrors out;
    if (n == 0) return out;

    const auto p = static_cast<std::size_t>(arma.p());
    const auto q = static_cast<std::size_t>(arma.q());
    const std::size_t m = std::max<std::size_t>({p, q, 1});
    const double mu = mean ? *mean : std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n);
    const auto gamma = arma_acvf(arma, innovation_variance, m + p + 1);
    auto th = [&](std::size_t j) { return j == 0 ? 1.0 : (j <= q ? arma.theta[j - 1] : 0.0); };

    // Autocovariance of the transformed process W (1-based indices).
    auto kappa = [&](std::size_t i, std::size_t j) {
        const std::size_t lo = std::min(i, j), hi = std::max(i, j), d = hi - lo;
        if (hi <= m) return gamma[d] / innovation_variance;
        if (lo <= m) {
            if (hi > 2 * m) return 0.0;
            double acc = gamma[d];
            for (std::size_t r = 1; r <= p; ++r) {
                const auto lag = static_cast<std::size_t>(std::labs(static_cast<long>(r) - static_cast<long>(d)));
                acc -= arma.phi[r - 1] * gamma[lag];
            }
            return acc / innovation_variance;
        }
        if (d > q) return 0.0;
        double acc = 0.0;
        for (std::size_t r = 0; r + d <= q; ++r) acc += th(r) * th(r + d);
        return acc;
    };

    // theta_{k,j} for j = 1..m is stored at coef[k * (m + 1) + j].
    std::vector<double> coef(n * (m + 1), 0.0);
    std::vector<double> v(n, 0.0);
    auto theta_at = [&](std::size_t k, std::size_t j) -> double& { return coef[k * (m + 1) + j]; };

    v[0] = kappa(1, 1);
    for (std::size_t nn = 1; nn < n; ++nn) {
        const std::size_t start = nn > m ? nn - m : 0;
        for (std::size_t k = start; k < nn; ++k) {
            double s = kappa(nn + 1, k + 1);
            for (std::size_t j = start; j < k; ++j) s -= theta_at(k, k - j) * theta_at(nn, nn - j) * v[j];
            theta_at(nn, nn - k) = s / v[k];
        }
        double s = kappa(nn + 1, nn + 1);
        for (std::size_t j = start; j < nn; ++j) {
            const double t = theta_at(nn, nn - j);
            s -= t * t * v[j];
        }
        v[nn] = s;
        if (!(v[nn] > 0.0)) throw NumericError("innovations recursion lost positive definiteness");
    }

    out.residuals.resize(n);
    out.mse_ratio = v;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = data[i] - mu;
    for (std::size_t nn = 0; nn < n; ++nn) {
        // Predict x[nn] (the (nn+1)-th observation) from x[0..nn-1].
        double pred = 0.0;
        const std::size_t lim = std::min(nn, m);
        if (nn >= m) {
            for (std::size_t i = 1; i <= p; ++i) pred += arma.phi[i - 1] * x[nn - i];
        }
        for (std::size_t j = 1; j <= lim; ++j) pred += theta_at(nn, j) * out.residuals[nn - j];
        out.residuals[nn] = x[nn] - pred;
        out.weighted_sse += out.residuals[nn] * out.residuals[nn] / v[nn];
    }
    return out;
}

}  // namespace rainfall
