#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace lsv {

/// Raised when an iterative method fails to meet its tolerance. The message
/// carries the diagnostics (bracket history, residuals, iteration counts).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace numerics {

using ScalarFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (G10/K21) quadrature on a finite interval.
/// Converged when the error estimate is below max(abs_tol, rel_tol |I|).
double integrate(const ScalarFn& f, double a, double b, double abs_tol = 1e-11,
                 double rel_tol = 1e-13);

/// Bracketed root (TOMS 748) of f on [lo, hi]; f(lo), f(hi) must differ in sign.
double find_root(const ScalarFn& f, double lo, double hi, double f_lo, double f_hi,
                 double rel_tol = 1e-15);

struct Minimum {
    double x = 0.0;
    double f = 0.0;
};

/// Brent (golden section + parabolic) minimisation on [lo, hi].
Minimum minimize(const ScalarFn& f, double lo, double hi);

/// Lagrange interpolation through (xs[i], ys[i]) evaluated at x.
double lagrange(const double* xs, const double* ys, int n, double x);

}  // namespace numerics
}  // namespace lsv
