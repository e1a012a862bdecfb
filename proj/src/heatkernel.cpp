#include "lsv/heatkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lsv/numerics.hpp"

namespace lsv {

namespace {

constexpr double kPi = 3.14159265358979323846;

double mu_over_alpha2_integral(const ModelSpec& m, double y_from, double y_to) {
    if (m.mu.kind == FamilyKind::mu_zero) return 0.0;
    return numerics::integrate(
        [&](double w) {
            const double u = std::exp(w);
            const double a = m.alpha_at(u).v;
            return m.mu_at(u).v / (a * a) * u;
        },
        std::log(y_from), std::log(y_to), 1e-13, 1e-13);
}

}  // namespace

std::array<double, 2> drift_field(const ModelSpec& m, double x, double y) {
    const Jet s = m.sigma_at(x);
    const Jet a = m.alpha_at(y);
    return {-0.5 * s.v * s.v * y * y - 0.5 * s.v * s.d1 * y * y,
            m.mu_at(y).v - 0.5 * (a.v * a.d1 - a.v * a.v / y)};
}

double work_term_A_separable(const ModelSpec& m, Point p, Point q) {
    if (m.rho != 0.0) throw std::invalid_argument("work_term_A_separable requires rho = 0");
    const double ax = -0.5 * (q.x - p.x) - 0.5 * std::log(m.sigma_at(q.x).v / m.sigma_at(p.x).v);
    const double ay = mu_over_alpha2_integral(m, p.y, q.y) -
                      0.5 * std::log(m.alpha_at(q.y).v / m.alpha_at(p.y).v) +
                      0.5 * std::log(q.y / p.y);
    return ax + ay;
}

double work_term_A_path(const ModelSpec& m, const GeodesicPath& path) {
    const std::size_t n = path.size();
    if (n < 3 || n % 2 == 0) {
        throw std::invalid_argument("work_term_A_path: needs an odd number (>= 3) of samples");
    }
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PathSample& s = path[i];
        const MetricPoint g = metric_tensor(m, s.x, s.y);
        const auto A = drift_field(m, s.x, s.y);
        f[i] = g.g[0][0] * A[0] * s.vx + g.g[0][1] * (A[0] * s.vy + A[1] * s.vx) +
               g.g[1][1] * A[1] * s.vy;
    }
    double fine = 0.0, coarse = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) fine += 0.5 * (f[i] + f[i + 1]) * (path[i + 1].s - path[i].s);
    for (std::size_t i = 0; i + 2 < n; i += 2) coarse += 0.5 * (f[i] + f[i + 2]) * (path[i + 2].s - path[i].s);
    return (4.0 * fine - coarse) / 3.0;
}

double work_term_A(const ModelSpec& m, const LineGeodesic& geo) {
    if (m.rho == 0.0) {
        bool monotone = true;
        const double sx = geo.x1 > m.x0 ? 1.0 : -1.0;
        for (const auto& s : geo.path) {
            if (s.vx * sx < 0.0 || s.vy < -1e-12) {
                monotone = false;
                break;
            }
        }
        if (monotone) return work_term_A_separable(m, m.start(), {geo.x1, geo.y1_star});
    }
    return work_term_A_path(m, geo.path);
}

KernelFactors kernel_factors(const ModelSpec& m, const LineGeodesic& geo) {
    KernelFactors k;
    k.u0 = jacobi_u0(m, geo.path);
    k.A = work_term_A(m, geo);
    k.P = std::exp(k.A);
    k.sqrt_g = sqrt_det_g(m, geo.x1, geo.y1_star);
    k.psi = geo.y1_star * geo.y1_star * k.P * k.u0 * k.sqrt_g;
    k.phi = 0.5 * geo.d * geo.d;
    k.phi_second = phi_second_jacobi(m, geo);
    return k;
}

double bellaiche_density(const ModelSpec& m, Point p, Point q, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("bellaiche_density: t must be > 0");
    if (p.x == q.x && p.y == q.y) throw std::invalid_argument("bellaiche_density: p == q");
    const PointGeodesic geo = geodesic_point(m, p, q, 257);
    const double u0 = jacobi_u0(m, geo.path);
    const double A = m.rho == 0.0 ? work_term_A_separable(m, p, q) : work_term_A_path(m, geo.path);
    return u0 * std::exp(-0.5 * geo.d * geo.d / t + A) * sqrt_det_g(m, q.x, q.y) / (2.0 * kPi * t);
}

double mckean_kernel(double d, double t) {
    if (!(d >= 0.0) || !(t > 0.0)) throw std::invalid_argument("mckean_kernel: need d >= 0, t > 0");
    // r = d + u^2; exp(-d^2/2t) is factored out of the integrand
    auto f = [d, t](double u) {
        const double u2 = u * u;
        const double r = d + u2;
        if (u == 0.0) return d > 0.0 ? 2.0 * d / std::sqrt(std::sinh(d)) : 0.0;
        // cosh(r) - cosh(d) without cancellation
        const double gap = 2.0 * std::sinh(d + 0.5 * u2) * std::sinh(0.5 * u2);
        return 2.0 * u * r * std::exp(-(2.0 * d * u2 + u2 * u2) / (2.0 * t)) / std::sqrt(gap);
    };
    // locate the truncation point where the integrand drops below 1e-16 of its peak
    double peak = f(0.0);
    double u = std::sqrt(t) / 8.0;
    double hi = u;
    for (int i = 0; i < 2000; ++i, u *= 1.25) {
        const double v = f(u);
        peak = std::max(peak, v);
        hi = u;
        if (v < 1e-16 * peak && u > std::sqrt(t)) break;
    }
    const double scale = std::exp(-d * d / (2.0 * t));
    // split at the scale of the Gaussian width for the quadrature
    const double mid = std::min(hi, std::sqrt(t));
    const double I = numerics::integrate(f, 0.0, mid, 0.0, 1e-12) +
                     numerics::integrate(f, mid, hi, 0.0, 1e-12);
    return std::sqrt(2.0) * std::exp(-t / 8.0) / std::pow(2.0 * kPi * t, 1.5) * I * scale;
}

double vvm_determinant(const ModelSpec& m, Point p, Point q) {
    if (p.x == q.x && p.y == q.y) throw std::invalid_argument("vvm_determinant: p == q");
    const double h = 1e-4;
    // coordinates (x, l = log y)
    auto phi = [&](double px, double pl, double qx, double ql) {
        const double d = distance_point(m, {px, std::exp(pl)}, {qx, std::exp(ql)});
        return 0.5 * d * d;
    };
    const double P[2] = {p.x, std::log(p.y)};
    const double Q[2] = {q.x, std::log(q.y)};
    double M[2][2];
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (int si = -1; si <= 1; si += 2) {
                for (int sj = -1; sj <= 1; sj += 2) {
                    double a[2] = {P[0], P[1]}, b[2] = {Q[0], Q[1]};
                    a[i] += si * h;
                    b[j] += sj * h;
                    acc += si * sj * phi(a[0], a[1], b[0], b[1]);
                }
            }
            M[i][j] = acc / (4.0 * h * h);
            if (!std::isfinite(M[i][j])) throw NumericalError("vvm_determinant: non-finite entry");
        }
    }
    const double det_neg = M[0][0] * M[1][1] - M[0][1] * M[1][0];  // det(-M) = det(M) in 2-D
    const double gp = metric_tensor(m, p.x, p.y).det_g * p.y * p.y;
    const double gq = metric_tensor(m, q.x, q.y).det_g * q.y * q.y;
    return det_neg / std::sqrt(gp * gq);
}

}  // namespace lsv
