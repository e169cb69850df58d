#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rainfall/error.hpp"

namespace rainfall {

using Complex = std::complex<double>;

namespace numerics {

/// Compact scientific formatting for diagnostics.
std::string fmt_sci(double v);

template <class T>
struct QuadratureResult {
    T value{};
    double error = 0.0;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature on a finite interval.
///
/// Works for real- and complex-valued integrands. The subinterval with the
/// largest error estimate is bisected until the summed estimate is below
/// `rel_tol` times the L1 norm of the integrand or below `abs_tol`; no piece is
/// made narrower than (b - a) / 2^max_depth. Throws NumericError if neither
/// tolerance is reached.
template <class F>
auto integrate(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 1e-14,
               unsigned max_depth = 20) {
    using T = decltype(f(a));
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    struct Piece {
        double lo, hi;
        T value;
        double error, l1;
        unsigned depth;
    };
    auto rule = [&](double lo, double hi, unsigned depth) {
        Piece p{lo, hi, T{}, 0.0, 0.0, depth};
        p.value = GK::integrate(f, lo, hi, 0, 0.0, &p.error, &p.l1);
        return p;
    };
    QuadratureResult<T> out;
    if (a == b) return out;
    auto by_error = [](const Piece& x, const Piece& y) { return x.error < y.error; };
    std::vector<Piece> heap{rule(a, b, 0)};
    double error = heap.front().error, l1 = heap.front().l1;
    while (!(error <= std::max(abs_tol, rel_tol * l1))) {
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Piece worst = heap.back();
        if (worst.depth >= max_depth) {
            throw NumericError("quadrature did not converge on [" + fmt_sci(a) + ", " + fmt_sci(b) +
                               "]: achieved error " + fmt_sci(error));
        }
        heap.pop_back();
        const double mid = 0.5 * (worst.lo + worst.hi);
        for (const Piece& p : {rule(worst.lo, mid, worst.depth + 1), rule(mid, worst.hi, worst.depth + 1)}) {
            error += p.error;
            l1 += p.l1;
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end(), by_error);
        }
        error -= worst.error;
        l1 -= worst.l1;
    }
    for (const Piece& p : heap) out.value += p.value;
    out.error = error;
    return out;
}

/// Bracketed root of a continuous function by TOMS 748. The endpoint values
/// must have opposite signs (or one of them vanish).
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol = 1e-12, std::uintmax_t max_iter = 200);

// Polynomials are stored with ascending coefficients: p(x) = c[0] + c[1] x + ...
std::vector<double> poly_multiply(std::span<const double> a, std::span<const double> b);
std::vector<double> poly_derivative(std::span<const double> c);
double poly_eval(std::span<const double> c, double x);
Complex poly_eval(std::span<const double> c, Complex x);
Complex poly_eval(std::span<const Complex> c, Complex x);

/// All complex roots of a polynomial, via eigenvalues of the companion matrix.
/// The leading coefficient must be non-zero.
std::vector<Complex> poly_roots(std::span<const double> c);

/// Sum of exponentials f(s) = sum_j coef_j * exp(rate_j * s). Powers and
/// integrals of such sums are exact, which makes them the primary path for the
/// g-function moment integrals.
class ExpSum {
public:
    struct Term {
        double coef;
        double rate;
    };

    ExpSum() = default;
    explicit ExpSum(std::vector<Term> terms);

    const std::vector<Term>& terms() const { return terms_; }
    double operator()(double s) const;
    ExpSum operator*(const ExpSum& other) const;
    ExpSum pow(int n) const;

    /// Integral over [0, b].
    double integral(double b) const;
    /// Integral over [0, inf). Requires every non-zero term to have rate < 0.
    double integral_to_infinity() const;

private:
    void compact();
    std::vector<Term> terms_;
};

}  // namespace numerics
}  // namespace rainfall
