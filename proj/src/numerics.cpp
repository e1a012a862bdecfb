#include "lsv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace lsv::numerics {

namespace {

struct Piece {
    double value;
    double error;
};

// Recursive bisection driven by the G10/K21 rule. A piece is accepted once its
// error estimate meets its share of the target or sits at the roundoff floor.
Piece integrate_piece(const ScalarFn& f, double a, double b, double target, int depth) {
    double error = 0.0;
    double l1 = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &error, &l1);
    if (error <= target || error <= 50 * std::numeric_limits<double>::epsilon() * l1 || depth == 0 ||
        !std::isfinite(value)) {
        return {value, error};
    }
    const double mid = 0.5 * (a + b);
    const Piece left = integrate_piece(f, a, mid, 0.5 * target, depth - 1);
    const Piece right = integrate_piece(f, mid, b, 0.5 * target, depth - 1);
    return {left.value + right.value, left.error + right.error};
}

}  // namespace

double integrate(const ScalarFn& f, double a, double b, double abs_tol, double rel_tol) {
    if (a == b) return 0.0;
    double error = 0.0;
    double l1 = 0.0;
    const double first =
        boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &error, &l1);
    const double target = std::max(abs_tol, rel_tol * std::abs(first));
    const Piece p = integrate_piece(f, a, b, target, 30);
    if (!std::isfinite(p.value)) {
        std::ostringstream msg;
        msg << "quadrature on [" << a << ", " << b << "] produced a non-finite value";
        throw NumericalError(msg.str());
    }
    if (p.error > target && p.error > 64 * std::numeric_limits<double>::epsilon() * l1) {
        std::ostringstream msg;
        msg << "quadrature on [" << a << ", " << b << "] did not converge: estimate " << p.value
            << ", error " << p.error << ", target " << target;
        throw NumericalError(msg.str());
    }
    return p.value;
}

double find_root(const ScalarFn& f, double lo, double hi, double f_lo, double f_hi,
                 double rel_tol) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0) == (f_hi > 0)) {
        std::ostringstream msg;
        msg << "find_root: no sign change on [" << lo << ", " << hi << "] (f = " << f_lo
            << ", " << f_hi << ")";
        throw NumericalError(msg.str());
    }
    std::uintmax_t max_iter = 200;
    auto tol = [rel_tol](double a, double b) {
        return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b)) ||
               std::abs(b - a) <= std::numeric_limits<double>::min();
    };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, max_iter);
    return 0.5 * (a + b);
}

Minimum minimize(const ScalarFn& f, double lo, double hi) {
    std::uintmax_t max_iter = 500;
    const auto [x, fx] = boost::math::tools::brent_find_minima(
        f, lo, hi, std::numeric_limits<double>::digits, max_iter);
    return {x, fx};
}

double lagrange(const double* xs, const double* ys, int n, double x) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double w = 1.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) w *= (x - xs[j]) / (xs[i] - xs[j]);
        }
        sum += w * ys[i];
    }
    return sum;
}

}  // namespace lsv::numerics
