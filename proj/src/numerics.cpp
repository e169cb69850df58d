#include "rainfall/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rainfall::numerics {

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                 std::uintmax_t max_iter) {
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (!std::isfinite(f_lo) || !std::isfinite(f_hi) || (f_lo > 0) == (f_hi > 0)) {
        throw NumericError("root not bracketed: f(" + std::to_string(lo) + ") = " +
                           std::to_string(f_lo) + ", f(" + std::to_string(hi) +
                           ") = " + std::to_string(f_hi));
    }
    auto tol = [x_tol](double a, double b) { return std::abs(b - a) <= x_tol; };
    std::uintmax_t iters = max_iter;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
    if (iters >= max_iter) throw NumericError("root finder hit its iteration cap");
    return 0.5 * (r.first + r.second);
}

std::vector<double> poly_multiply(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> poly_derivative(std::span<const double> c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> out(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) out[i - 1] = static_cast<double>(i) * c[i];
    return out;
}

double poly_eval(std::span<const double> c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Complex poly_eval(std::span<const double> c, Complex x) {
    Complex acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Complex poly_eval(std::span<const Complex> c, Complex x) {
    Complex acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<Complex> poly_roots(std::span<const double> c) {
    std::size_t deg = c.size();
    while (deg > 0 && c[deg - 1] == 0.0) --deg;
    if (deg == 0) throw InvalidArgument("poly_roots: zero polynomial");
    deg -= 1;
    if (deg == 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg),
                                                      static_cast<Eigen::Index>(deg));
    const double lead = c[deg];
    for (std::size_t i = 0; i < deg; ++i) {
        companion(0, static_cast<Eigen::Index>(i)) = -c[deg - 1 - i] / lead;
        if (i + 1 < deg) companion(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) throw NumericError("companion eigenvalue solve failed");
    std::vector<Complex> roots;
    roots.reserve(deg);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        // One Newton polish step on the original polynomial.
        Complex z = solver.eigenvalues()[i];
        auto dc = poly_derivative(c.first(deg + 1));
        for (int k = 0; k < 3; ++k) {
            Complex fz = poly_eval(c.first(deg + 1), z);
            Complex dz = poly_eval(std::span<const double>(dc), z);
            if (std::abs(dz) == 0.0) break;
            Complex step = fz / dz;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            z -= step;
            if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(z)) break;
        }
        roots.push_back(z);
    }
    return roots;
}

ExpSum::ExpSum(std::vector<Term> terms) : terms_(std::move(terms)) { compact(); }

double ExpSum::operator()(double s) const {
    double acc = 0.0;
    for (const auto& t : terms_) acc += t.coef * std::exp(t.rate * s);
    return acc;
}

ExpSum ExpSum::operator*(const ExpSum& other) const {
    std::vector<Term> out;
    out.reserve(terms_.size() * other.terms_.size());
    for (const auto& a : terms_)
        for (const auto& b : other.terms_) out.push_back({a.coef * b.coef, a.rate + b.rate});
    return ExpSum(std::move(out));
}

ExpSum ExpSum::pow(int n) const {
    if (n < 0) throw InvalidArgument("ExpSum::pow: negative exponent");
    ExpSum out({{1.0, 0.0}});
    for (int i = 0; i < n; ++i) out = out * *this;
    return out;
}

double ExpSum::integral(double b) const {
    double acc = 0.0;
    for (const auto& t : terms_) {
        const double x = t.rate * b;
        // (e^{x} - 1) / rate, computed stably for small |x|
        acc += (std::abs(x) < 1e-8) ? t.coef * b * (1.0 + 0.5 * x) : t.coef * std::expm1(x) / t.rate;
    }
    return acc;
}

double ExpSum::integral_to_infinity() const {
    double acc = 0.0;
    for (const auto& t : terms_) {
        if (t.coef == 0.0) continue;
        if (!(t.rate < 0.0)) throw DomainError("ExpSum: divergent integral to infinity");
        acc += -t.coef / t.rate;
    }
    return acc;
}

void ExpSum::compact() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.rate < b.rate; });
    std::vector<Term> merged;
    for (const auto& t : terms_) {
        if (!merged.empty() &&
            std::abs(merged.back().rate - t.rate) <= 1e-14 * std::max(1.0, std::abs(t.rate))) {
            merged.back().coef += t.coef;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    terms_ = std::move(merged);
}

}  // namespace rainfall::numerics
