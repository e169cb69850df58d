#include "rainfall/fit.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "rainfall/error.hpp"
#include "rainfall/numerics.hpp"
#include "rainfall/random.hpp"

namespace rainfall {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Lag-1 autocorrelation of the increments of an integrated OU process with x = lambda delta.
double ou_increment_acf1(double x) {
    const double em1 = std::expm1(-x);
    return em1 * em1 / (2.0 * (em1 + x));
}

double lambda_from_acf1(double r1, double delta) {
    constexpr double x_lo = 1e-6, x_hi = 50.0;
    if (!(r1 > ou_increment_acf1(x_hi))) return x_hi / delta;
    if (!(r1 < ou_increment_acf1(x_lo))) return x_lo / delta;
    return numerics::find_root([r1](double x) { return ou_increment_acf1(x) - r1; }, x_lo, x_hi, 1e-14) / delta;
}

/// Weights (summing to one) and scale s with beta_j = s w_j sum_i w_i / (lambda_i + lambda_j).
std::optional<std::vector<double>> weights_from_betas(const std::vector<double>& lambdas,
                                                      const std::vector<double>& betas) {
    const std::size_t p = lambdas.size();
    if (std::any_of(betas.begin(), betas.end(), [](double b) { return !(b > 0.0); })) return std::nullopt;
    Eigen::VectorXd u(static_cast<Eigen::Index>(p + 1));
    double total = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        u(static_cast<Eigen::Index>(j)) = std::sqrt(2.0 * lambdas[j] * betas[j]);
        total += u(static_cast<Eigen::Index>(j));
    }
    for (std::size_t j = 0; j < p; ++j) u(static_cast<Eigen::Index>(j)) /= total;
    u(static_cast<Eigen::Index>(p)) = total * total;
    const double beta_scale = *std::max_element(betas.begin(), betas.end());

    auto residual = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(p + 1));
        double sum = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            double inner = 0.0;
            for (std::size_t i = 0; i < p; ++i) inner += v(static_cast<Eigen::Index>(i)) / (lambdas[i] + lambdas[j]);
            r(static_cast<Eigen::Index>(j)) =
                (v(static_cast<Eigen::Index>(p)) * v(static_cast<Eigen::Index>(j)) * inner - betas[j]) / beta_scale;
            sum += v(static_cast<Eigen::Index>(j));
        }
        r(static_cast<Eigen::Index>(p)) = sum - 1.0;
        return r;
    };
    Eigen::VectorXd r = residual(u);
    for (int iter = 0; iter < 100 && r.norm() > 1e-15; ++iter) {
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(p + 1), static_cast<Eigen::Index>(p + 1));
        const double h = 1e-7;
        for (Eigen::Index c = 0; c <= static_cast<Eigen::Index>(p); ++c) {
            Eigen::VectorXd up = u, dn = u;
            const double step = h * std::max(1.0, std::abs(u(c)));
            up(c) += step;
            dn(c) -= step;
            jac.col(c) = (residual(up) - residual(dn)) / (2.0 * step);
        }
        Eigen::VectorXd delta = jac.fullPivLu().solve(-r);
        double damping = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 30; ++halving, damping *= 0.5) {
            const Eigen::VectorXd trial = u + damping * delta;
            const Eigen::VectorXd trial_r = residual(trial);
            if (trial_r.norm() < r.norm()) {
                u = trial;
                r = trial_r;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (r.norm() > 1e-8) return std::nullopt;
    std::vector<double> w(p);
    for (std::size_t j = 0; j < p; ++j) w[j] = u(static_cast<Eigen::Index>(j));
    return w;
}

/// Prony step: C(h) = sum_i c_i r_i^{h-1} for h >= 1.
std::optional<CarmaSpec> prony_guess(std::span<const double> acvf, int p, double delta) {
    const auto n = static_cast<std::size_t>(p);
    if (acvf.size() < 2 * n + 1) return std::nullopt;
    const auto y = acvf.subspan(1);  // y[j] = C(j + 1)
    Eigen::MatrixXd hankel(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t m = 0; m < n; ++m) hankel(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) = y[j + m];
        rhs(static_cast<Eigen::Index>(j)) = -y[j + n];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(hankel);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXd a = lu.solve(rhs);
    std::vector<double> poly(n + 1, 1.0);
    for (std::size_t m = 0; m < n; ++m) poly[m] = a(static_cast<Eigen::Index>(m));
    const auto roots = numerics::poly_roots(poly);

    std::vector<double> r;
    for (auto z : roots) {
        if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z))) return std::nullopt;
        if (!(z.real() > 0.0 && z.real() < 1.0)) return std::nullopt;
        r.push_back(z.real());
    }
    std::sort(r.begin(), r.end());  // ascending r = descending lambda
    for (std::size_t i = 1; i < n; ++i)
        if (r[i] - r[i - 1] < 1e-8) return std::nullopt;

    Eigen::MatrixXd vander(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd yy(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            vander(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::pow(r[i], static_cast<double>(j));
        yy(static_cast<Eigen::Index>(j)) = y[j];
    }
    const Eigen::VectorXd c = vander.fullPivLu().solve(yy);

    std::vector<double> lambdas(n), betas(n);
    for (std::size_t i = 0; i < n; ++i) {
        lambdas[i] = -std::log(r[i]) / delta;
        const double em1 = std::expm1(-lambdas[i] * delta);
        betas[i] = c(static_cast<Eigen::Index>(i)) * lambdas[i] * lambdas[i] / (em1 * em1);
    }
    const auto w = weights_from_betas(lambdas, betas);
    if (!w) return std::nullopt;
    try {
        return CarmaSpec::make(lambdas, *w, true);
    } catch (const InvalidArgument&) {
        return std::nullopt;
    }
}

struct Parameterization {
    int p;
    bool allow_negative;

    std::size_t size() const { return static_cast<std::size_t>(2 * p - 1); }

    std::vector<double> encode(const CarmaSpec& spec) const {
        std::vector<double> x;
        for (double l : spec.lambdas) x.push_back(std::log(l));
        const double last = std::max(spec.weights.back(), 1e-6);
        for (int i = 0; i + 1 < p; ++i) {
            const double w = spec.weights[static_cast<std::size_t>(i)];
            x.push_back(allow_negative ? w : std::log(std::max(w, 1e-6) / last));
        }
        return x;
    }

    /// Throws InvalidArgument for an inadmissible point.
    CarmaSpec decode(std::span<const double> x) const {
        std::vector<double> lambdas(x.begin(), x.begin() + p);
        for (double& l : lambdas) {
            if (!std::isfinite(l) || std::abs(l) > 30.0) throw InvalidArgument("rate out of range");
            l = std::exp(l);
        }
        std::vector<double> w(static_cast<std::size_t>(p));
        if (allow_negative) {
            double sum = 0.0;
            for (int i = 0; i + 1 < p; ++i) sum += w[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(p + i)];
            w.back() = 1.0 - sum;
        } else {
            double top = 0.0;
            for (int i = 0; i + 1 < p; ++i) top = std::max(top, x[static_cast<std::size_t>(p + i)]);
            double norm = std::exp(-top);
            w.back() = std::exp(-top);
            for (int i = 0; i + 1 < p; ++i) {
                w[static_cast<std::size_t>(i)] = std::exp(x[static_cast<std::size_t>(p + i)] - top);
                norm += w[static_cast<std::size_t>(i)];
            }
            for (double& v : w) v /= norm;
            // Renormalise the sum to one in floating point.
            w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
            if (w.back() < 0.0) w.back() = 0.0;
        }
        return CarmaSpec::make(std::move(lambdas), std::move(w), allow_negative);
    }
};

struct ObjectiveContext {
    const Parameterization* param;
    double delta;
    std::span<const double> data;
    int evaluations = 0;
};

double gsl_objective(const gsl_vector* v, void* raw) {
    auto* ctx = static_cast<ObjectiveContext*>(raw);
    ++ctx->evaluations;
    std::vector<double> x(v->size);
    for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
    try {
        const double f = carma_objective(ctx->param->decode(x), ctx->delta, ctx->data);
        return std::isfinite(f) ? f : 1e300;
    } catch (const std::exception&) {
        return 1e300;
    }
}

struct SimplexResult {
    std::vector<double> x;
    double f = kInf;
    bool converged = false;
};

SimplexResult run_simplex(ObjectiveContext& ctx, const std::vector<double>& start, const CarmaFitOptions& options) {
    const std::size_t n = start.size();
    gsl_multimin_function fn{&gsl_objective, n, &ctx};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n), gsl_vector_free);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x.get(), i, start[i]);
        gsl_vector_set(step.get(), i, i < static_cast<std::size_t>(ctx.param->p) ? 0.3 : 0.5);
    }
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get());

    SimplexResult out;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), options.tolerance) == GSL_SUCCESS) {
            out.converged = true;
            break;
        }
    }
    out.f = gsl_multimin_fminimizer_minimum(solver.get());
    const gsl_vector* best = gsl_multimin_fminimizer_x(solver.get());
    for (std::size_t i = 0; i < n; ++i) out.x.push_back(gsl_vector_get(best, i));
    return out;
}

}  // namespace

CarmaSpec initial_carma_guess(std::span<const double> acvf, int p, double delta) {
    if (p < 1 || p > 3) throw InvalidArgument("CARMA order p must lie in 1..3");
    if (acvf.size() < 2 || !(acvf[0] > 0.0)) throw InvalidArgument("initial guess needs a positive variance");
    const double lambda1 = lambda_from_acf1(acvf[1] / acvf[0], delta);
    if (p == 1) return CarmaSpec::make({lambda1}, {1.0});
    if (auto spec = prony_guess(acvf, p, delta)) {
        if (std::all_of(spec->weights.begin(), spec->weights.end(), [](double w) { return w >= 0.0; })) return *spec;
    }
    // Fallback: a fast component around the lag-1 rate and progressively slower ones.
    std::vector<double> lambdas, weights;
    double remaining = 1.0;
    for (int i = 0; i < p; ++i) {
        lambdas.push_back(lambda1 * 3.0 * std::pow(0.1, i));
        const double w = (i + 1 < p) ? 0.9 * remaining : remaining;
        weights.push_back(w);
        remaining -= w;
    }
    return CarmaSpec::make(lambdas, weights);
}

double carma_objective(const CarmaSpec& spec, double delta, std::span<const double> data) {
    try {
        const auto implied = carma_to_arma(spec, 1.0, delta);
        return one_step_prediction_errors(implied.arma, implied.innovation_variance, data).weighted_sse;
    } catch (const std::exception&) {
        return kInf;
    }
}

CarmaFit fit_carma_params(std::span<const double> deseasonalised, int p, double delta, const CarmaFitOptions& options) {
    if (p < 1 || p > 3) throw InvalidArgument("CARMA order p must lie in 1..3, got " + std::to_string(p));
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
    if (deseasonalised.size() < 100) throw InvalidArgument("CARMA fit needs at least 100 observations");
    if (options.restarts < 0 || options.max_iterations < 1) throw InvalidArgument("invalid optimizer settings");

    const auto acvf = sample_acvf(deseasonalised, static_cast<std::size_t>(2 * p));
    CarmaFit out;
    out.initial = initial_carma_guess(acvf, p, delta);
    out.initial_objective = carma_objective(out.initial, delta, deseasonalised);
    if (!std::isfinite(out.initial_objective))
        throw NumericError("CARMA objective undefined at the ACF-matched initial point");

    const Parameterization param{p, options.allow_negative_weights};
    ObjectiveContext ctx{&param, delta, deseasonalised};
    const auto x0 = param.encode(out.initial);

    out.spec = out.initial;
    out.objective = out.initial_objective;
    Rng rng(options.seed);
    for (int run = 0; run <= options.restarts; ++run) {
        auto start = x0;
        if (run > 0)
            for (double& v : start) v += 0.3 * rng.normal();
        const auto result = run_simplex(ctx, start, options);
        if (result.f < out.objective) {
            try {
                out.spec = param.decode(result.x);
                out.objective = result.f;
                out.converged = result.converged;
            } catch (const InvalidArgument&) {
            }
        } else if (run == 0) {
            out.converged = result.converged;
        }
    }
    out.evaluations = ctx.evaluations;
    if (!out.converged)
        out.warnings.push_back("simplex reached its iteration cap; the best point found is returned");
    for (int i = 0; i < p && p > 1; ++i) {
        const double w = out.spec.weights[static_cast<std::size_t>(i)];
        if (std::abs(w) < 0.01) {
            std::ostringstream msg;
            msg << "weight w" << (i + 1) << " = " << w << " is close to 0: the kernel is effectively of order "
                << (p - 1) << "; consider refitting with p = " << (p - 1);
            out.warnings.push_back(msg.str());
        }
    }
    return out;
}

SampleMoments sample_moments(std::span<const double> x) {
    SampleMoments m;
    m.mean = sample_mean(x);
    m.variance = central_moment(x, 2);
    m.third_central = central_moment(x, 3);
    return m;
}

HougaardParams levy_params_from_moments(const SampleMoments& moments, const CarmaSpec& spec, double delta) {
    validate(spec, true);
    if (!(moments.mean > 0.0)) throw InvalidArgument("Levy fit needs a positive sample mean");
    if (!(moments.variance > 0.0)) throw InvalidArgument("Levy fit needs a positive sample variance");
    if (!(moments.third_central > 0.0))
        throw InvalidArgument("Levy fit needs positive sample skewness (the Hougaard increments are right-skewed)");
    const double g1 = kernel_power_integral(spec, delta, 1);
    const double g2 = kernel_power_integral(spec, delta, 2);
    const double g3 = kernel_power_integral(spec, delta, 3);

    HougaardParams out;
    out.mu = moments.mean / g1;
    // With rho eliminated through the variance equation the third-cumulant equation
    // kappa * (m2 / g2)^2 / mu * g3 = m3 is linear in kappa.
    const double slope = moments.variance * moments.variance * g3 / (g2 * g2 * out.mu);
    out.kappa = moments.third_central / slope;
    if (!(out.kappa > 1.0 && out.kappa < 2.0)) {
        std::ostringstream msg;
        msg << "no kappa in (1, 2) solves the moment equations: third-cumulant residual is "
            << (slope - moments.third_central) << " at kappa = 1 and " << (2.0 * slope - moments.third_central)
            << " at kappa = 2 (same sign)";
        throw NumericError(msg.str());
    }
    out.rho = moments.variance / (g2 * std::pow(out.mu, out.kappa));
    out.check();
    return out;
}

HougaardParams fit_levy_params(std::span<const double> deseasonalised, const CarmaSpec& spec, double delta) {
    if (deseasonalised.size() < 3) throw InvalidArgument("Levy fit needs at least 3 observations");
    return levy_params_from_moments(sample_moments(deseasonalised), spec, delta);
}

FittedModel fit_model(const RainfallSeries& series, const ModelFitOptions& options) {
    if (options.p < 1 || options.p > 3) throw InvalidArgument("CARMA order p must lie in 1..3, got " + std::to_string(options.p));
    FittedModel model;
    model.delta = options.delta;
    model.step = series.step;
    model.unit = series.unit;
    model.quantum = series.quantum;
    model.seasonality = fit_seasonality(series, options.max_seasonality_order).model;
    const auto x = deseasonalise(series, model.seasonality);
    const auto carma = fit_carma_params(x, options.p, options.delta, options.carma);
    model.carma = carma.spec;
    model.hougaard = fit_levy_params(x, carma.spec, options.delta);
    auto& d = model.diagnostics;
    d.objective = carma.objective;
    d.initial_objective = carma.initial_objective;
    d.evaluations = carma.evaluations;
    d.converged = carma.converged;
    d.moments = sample_moments(x);
    d.warnings = carma.warnings;
    return model;
}

}  // namespace rainfall
