#include "lsv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint/integrate/integrate_adaptive.hpp>
#include <boost/numeric/odeint/integrate/integrate_times.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "lsv/numerics.hpp"

namespace lsv {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kOdeAbsTol = 1e-14;
constexpr double kOdeRelTol = 1e-13;
constexpr long kMaxRhsCalls = 4'000'000;

void require_y(double y) {
    if (!(y > 0.0) || !std::isfinite(y)) {
        std::ostringstream msg;
        msg << "y must be > 0 (got " << y << ")";
        throw std::invalid_argument(msg.str());
    }
}

void require_rho(const ModelSpec& m) {
    if (!(std::abs(m.rho) < 1.0)) throw std::invalid_argument("|rho| must be < 1");
}

}  // namespace

MetricPoint metric_tensor(const ModelSpec& m, double x, double y) {
    require_y(y);
    require_rho(m);
    const double s = m.sigma_at(x).v;
    const double a = m.alpha_at(y).v;
    const double rb2 = 1.0 - m.rho * m.rho;
    MetricPoint out;
    out.g[0][0] = 1.0 / (rb2 * s * s * y * y);
    out.g[0][1] = out.g[1][0] = -m.rho / (rb2 * s * y * a);
    out.g[1][1] = 1.0 / (rb2 * a * a);
    out.det_g = 1.0 / (rb2 * s * s * y * y * a * a);
    return out;
}

double sqrt_det_g(const ModelSpec& m, double x, double y) {
    require_y(y);
    return 1.0 / (m.sigma_at(x).v * y * m.alpha_at(y).v * m.rho_bar());
}

MetricPartials metric_partials(const ModelSpec& m, double x, double y) {
    require_y(y);
    require_rho(m);
    const Jet s = m.sigma_at(x);
    const Jet a = m.alpha_at(y);
    const double rb2 = 1.0 - m.rho * m.rho;
    const double ls1 = s.d1 / s.v;  // sigma'/sigma
    const double ls2 = s.d2 / s.v;
    const double la1 = a.d1 / a.v;
    const double la2 = a.d2 / a.v;
    const double q1 = 1.0 / y + la1;                     // (y alpha)'/(y alpha)
    const double q2 = 2.0 * a.d1 / (y * a.v) + la2;      // (y alpha)''/(y alpha)

    MetricPartials p;
    p.E = 1.0 / (rb2 * s.v * s.v * y * y);
    p.E_x = -2.0 * ls1 * p.E;
    p.E_y = -2.0 / y * p.E;
    p.E_xx = (6.0 * ls1 * ls1 - 2.0 * ls2) * p.E;
    p.E_xy = 4.0 * ls1 / y * p.E;
    p.E_yy = 6.0 / (y * y) * p.E;

    p.F = -m.rho / (rb2 * s.v * y * a.v);
    p.F_x = -ls1 * p.F;
    p.F_y = -q1 * p.F;
    p.F_xx = (2.0 * ls1 * ls1 - ls2) * p.F;
    p.F_xy = ls1 * q1 * p.F;
    p.F_yy = (2.0 * q1 * q1 - q2) * p.F;

    p.G = 1.0 / (rb2 * a.v * a.v);
    p.G_y = -2.0 * la1 * p.G;
    p.G_yy = (6.0 * la1 * la1 - 2.0 * la2) * p.G;
    return p;
}

Christoffel christoffel(const ModelSpec& m, double x, double y) {
    const MetricPartials p = metric_partials(m, x, y);
    // dg[k][i][j] = d_k g_ij
    const double dg[2][2][2] = {{{p.E_x, p.F_x}, {p.F_x, p.G_x}},
                                {{p.E_y, p.F_y}, {p.F_y, p.G_y}}};
    const double s = m.sigma_at(x).v;
    const double a = m.alpha_at(y).v;
    const double inv[2][2] = {{s * s * y * y, m.rho * s * y * a}, {m.rho * s * y * a, a * a}};
    double lowered[2][2][2];
    for (int l = 0; l < 2; ++l)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                lowered[l][i][j] = 0.5 * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
    Christoffel G{};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                G[k][i][j] = inv[k][0] * lowered[0][i][j] + inv[k][1] * lowered[1][i][j];
    return G;
}

double gauss_curvature_brioschi(const ModelSpec& m, double x, double y) {
    const MetricPartials p = metric_partials(m, x, y);
    const double m11 = -0.5 * p.E_yy + p.F_xy - 0.5 * p.G_xx;
    const double m12 = 0.5 * p.E_x;
    const double m13 = p.F_x - 0.5 * p.E_y;
    const double m21 = p.F_y - 0.5 * p.G_x;
    const double m31 = 0.5 * p.G_y;
    const double det1 = m11 * (p.E * p.G - p.F * p.F) - m12 * (m21 * p.G - p.F * m31) +
                        m13 * (m21 * p.F - p.E * m31);
    const double n12 = 0.5 * p.E_y;
    const double n13 = 0.5 * p.G_x;
    const double det2 = -n12 * (n12 * p.G - p.F * n13) + n13 * (n12 * p.F - p.E * n13);
    const double eg = p.E * p.G - p.F * p.F;
    return (det1 - det2) / (eg * eg);
}

double gauss_curvature(const ModelSpec& m, double x, double y) {
    require_y(y);
    if (m.rho != 0.0) return gauss_curvature_brioschi(m, x, y);
    const Jet a = m.alpha_at(y);
    return a.v * (y * a.d1 - 2.0 * a.v) / (y * y);
}

// ---------------------------------------------------------------------------
// Geodesic ODE

namespace {

using State4 = std::array<double, 4>;
using State6 = std::array<double, 6>;

struct GeodesicRhs {
    const ModelSpec* model;
    long* calls;

    template <class S>
    void operator()(const S& s, S& ds, double) const {
        if (++*calls > kMaxRhsCalls) throw NumericalError("geodesic integration exceeded step budget");
        if (!(s[1] > 0.0) || !std::isfinite(s[0]) || !std::isfinite(s[2]) || !std::isfinite(s[3])) {
            throw NumericalError("geodesic left the upper half-plane");
        }
        const Christoffel G = christoffel(*model, s[0], s[1]);
        const double v[2] = {s[2], s[3]};
        ds[0] = v[0];
        ds[1] = v[1];
        for (int k = 0; k < 2; ++k) {
            ds[2 + k] = -(G[k][0][0] * v[0] * v[0] + 2.0 * G[k][0][1] * v[0] * v[1] +
                          G[k][1][1] * v[1] * v[1]);
        }
        if constexpr (std::tuple_size<S>::value == 6) {
            // Jacobi field along the geodesic: J'' = -kappa J
            ds[4] = s[5];
            ds[5] = -gauss_curvature(*model, s[0], s[1]) * s[4];
        }
    }
};

template <class S>
auto make_stepper() {
    return odeint::make_controlled(kOdeAbsTol, kOdeRelTol, odeint::runge_kutta_fehlberg78<S>());
}

State4 geodesic_endpoint(const ModelSpec& m, Point start, double vx, double vy, double length) {
    State4 s{start.x, start.y, vx, vy};
    if (length == 0.0) return s;
    long calls = 0;
    odeint::integrate_adaptive(make_stepper<State4>(), GeodesicRhs{&m, &calls}, s, 0.0, length,
                               length / 16.0);
    return s;
}

}  // namespace

GeodesicPath integrate_geodesic(const ModelSpec& m, Point start, double vx, double vy,
                                double length, int samples) {
    if (samples < 2) throw std::invalid_argument("integrate_geodesic: need >= 2 samples");
    if (!(length >= 0.0)) throw std::invalid_argument("integrate_geodesic: length must be >= 0");
    GeodesicPath path;
    path.reserve(samples);
    State4 s{start.x, start.y, vx, vy};
    if (length == 0.0) {
        for (int i = 0; i < samples; ++i) path.push_back({0.0, start.x, start.y, vx, vy});
        return path;
    }
    std::vector<double> times(samples);
    for (int i = 0; i < samples; ++i) times[i] = length * i / (samples - 1);
    times.back() = length;
    long calls = 0;
    odeint::integrate_times(make_stepper<State4>(), GeodesicRhs{&m, &calls}, s, times.begin(),
                            times.end(), length / 16.0, [&](const State4& st, double t) {
                                path.push_back({t, st[0], st[1], st[2], st[3]});
                            });
    return path;
}

// ---------------------------------------------------------------------------
// Point-to-point shooting

namespace {

struct Frame {
    double e1[2];
    double e2[2];
};

Frame orthonormal_frame(const ModelSpec& m, Point p) {
    const MetricPoint g = metric_tensor(m, p.x, p.y);
    const double E = g.g[0][0], F = g.g[0][1], G = g.g[1][1];
    Frame f{};
    f.e1[0] = 1.0 / std::sqrt(E);
    f.e1[1] = 0.0;
    const double n = std::sqrt((E * G - F * F) / E);
    f.e2[0] = -F / E / n;
    f.e2[1] = 1.0 / n;
    return f;
}

struct ShotGuess {
    double theta = 0.0;
    double L = 0.0;
};

struct ShotResult {
    bool ok = false;
    double theta = 0.0;
    double L = 0.0;
    double residual = std::numeric_limits<double>::infinity();
};

bool endpoint_residual(const ModelSpec& m, Point p, Point q, const Frame& f, double theta, double L,
                       double r[2]) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double vx = c * f.e1[0] + s * f.e2[0];
    const double vy = c * f.e1[1] + s * f.e2[1];
    try {
        const State4 end = geodesic_endpoint(m, p, vx, vy, L);
        if (!(end[1] > 0.0) || !std::isfinite(end[0])) return false;
        r[0] = end[0] - q.x;
        r[1] = std::log(end[1]) - std::log(q.y);
        return std::isfinite(r[0]) && std::isfinite(r[1]);
    } catch (const NumericalError&) {
        return false;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

ShotResult newton_shoot(const ModelSpec& m, Point p, Point q, const Frame& f, ShotGuess g) {
    ShotResult out;
    double theta = g.theta, L = g.L;
    double r[2];
    if (!endpoint_residual(m, p, q, f, theta, L, r)) return out;
    double norm = std::hypot(r[0], r[1]);
    for (int it = 0; it < 60 && norm > 1e-14; ++it) {
        const double ht = 1e-7;
        const double hl = 1e-7 * std::max(L, 1e-3);
        double rt[2], rl[2];
        if (!endpoint_residual(m, p, q, f, theta + ht, L, rt)) return out;
        if (!endpoint_residual(m, p, q, f, theta, L + hl, rl)) return out;
        const double j00 = (rt[0] - r[0]) / ht, j10 = (rt[1] - r[1]) / ht;
        const double j01 = (rl[0] - r[0]) / hl, j11 = (rl[1] - r[1]) / hl;
        const double det = j00 * j11 - j01 * j10;
        if (!std::isfinite(det) || det == 0.0) return out;
        const double dt = -(j11 * r[0] - j01 * r[1]) / det;
        const double dl = -(-j10 * r[0] + j00 * r[1]) / det;
        double step = 1.0;
        bool improved = false;
        for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
            double t_new = theta + step * dt;
            double l_new = L + step * dl;
            if (l_new <= 0.0) continue;
            double rn[2];
            if (!endpoint_residual(m, p, q, f, t_new, l_new, rn)) continue;
            const double nn = std::hypot(rn[0], rn[1]);
            if (nn < norm) {
                theta = t_new;
                L = l_new;
                r[0] = rn[0];
                r[1] = rn[1];
                improved = true;
                norm = nn;
                break;
            }
        }
        if (!improved) break;
    }
    out.theta = theta;
    out.L = L;
    out.residual = norm;
    out.ok = norm < 1e-9;
    return out;
}

ShotGuess straight_line_guess(const ModelSpec& m, Point p, Point q, const Frame& f) {
    const MetricPoint gm = metric_tensor(m, 0.5 * (p.x + q.x), std::sqrt(p.y * q.y));
    const double dx = q.x - p.x, dy = q.y - p.y;
    const double L = std::sqrt(gm.g[0][0] * dx * dx + 2.0 * gm.g[0][1] * dx * dy +
                               gm.g[1][1] * dy * dy);
    // tangent direction, expressed in the orthonormal frame at p
    const MetricPoint gp = metric_tensor(m, p.x, p.y);
    auto inner = [&](const double* u, double vx, double vy) {
        return gp.g[0][0] * u[0] * vx + gp.g[0][1] * (u[0] * vy + u[1] * vx) +
               gp.g[1][1] * u[1] * vy;
    };
    return {std::atan2(inner(f.e2, dx, dy), inner(f.e1, dx, dy)), L};
}

PointGeodesic shoot(const ModelSpec& m, Point p, Point q, int samples, const ShotGuess* warm) {
    require_y(p.y);
    require_y(q.y);
    PointGeodesic out;
    const Frame f = orthonormal_frame(m, p);
    if (p.x == q.x && p.y == q.y) {
        out.path = integrate_geodesic(m, p, f.e1[0], f.e1[1], 0.0, std::max(samples, 2));
        return out;
    }
    const ShotGuess base = straight_line_guess(m, p, q, f);
    std::vector<ShotGuess> guesses;
    if (warm) guesses.push_back(*warm);
    guesses.push_back(base);
    constexpr double kPi = 3.14159265358979323846;
    for (int k = 1; k < 8; ++k) guesses.push_back({base.theta + k * kPi / 4.0, base.L});
    ShotResult best;
    std::ostringstream history;
    for (const auto& g : guesses) {
        const ShotResult r = newton_shoot(m, p, q, f, g);
        history << " [theta0=" << g.theta << " L0=" << g.L << " -> residual " << r.residual << "]";
        if (r.ok) {
            best = r;
            break;
        }
    }
    if (!best.ok) {
        std::ostringstream msg;
        msg << "distance_point: shooting from (" << p.x << ", " << p.y << ") to (" << q.x << ", "
            << q.y << ") did not converge;" << history.str();
        throw NumericalError(msg.str());
    }
    const double c = std::cos(best.theta), s = std::sin(best.theta);
    out.d = best.L;
    out.theta = best.theta;
    out.path = integrate_geodesic(m, p, c * f.e1[0] + s * f.e2[0], c * f.e1[1] + s * f.e2[1],
                                  best.L, std::max(samples, 2));
    return out;
}

}  // namespace

PointGeodesic geodesic_point(const ModelSpec& m, Point p, Point q, int samples) {
    return shoot(m, p, q, samples, nullptr);
}

double distance_point(const ModelSpec& m, Point p, Point q) {
    return shoot(m, p, q, 2, nullptr).d;
}

double endpoint_y_momentum(const ModelSpec& m, Point p, Point q) {
    const PointGeodesic geo = shoot(m, p, q, 2, nullptr);
    const PathSample& e = geo.path.back();
    const MetricPoint g = metric_tensor(m, e.x, e.y);
    return g.g[0][1] * e.vx + g.g[1][1] * e.vy;
}

// ---------------------------------------------------------------------------
// Point-to-line

namespace {

constexpr int kLineSamples = 1025;

double z_of_x(const ModelSpec& m, double x0, double x1) {
    if (m.sigma_is_constant()) return (x1 - x0) / m.sigma.values[0];
    return numerics::integrate([&](double u) { return 1.0 / m.sigma_at(u).v; }, x0, x1, 1e-13, 1e-14);
}

// For the unit-speed geodesic with top Y = y0 / cos(beta), parameterize y = Y cos(phi), phi in [0, beta].
double z_integral(const ModelSpec& m, double beta) {
    const double Y = m.y0 / std::cos(beta);
    return numerics::integrate(
        [&](double phi) {
            const double y = Y * std::cos(phi);
            return y * y / m.alpha_at(y).v;
        },
        0.0, beta, 1e-14, 1e-14);
}

double d_integral(const ModelSpec& m, double beta) {
    const double Y = m.y0 / std::cos(beta);
    return numerics::integrate([&](double phi) { return Y / m.alpha_at(Y * std::cos(phi)).v; }, 0.0,
                               beta, 1e-14, 1e-14);
}

LineGeodesic line_geodesic_uncorrelated(const ModelSpec& m, double x1) {
    const double z1 = std::abs(z_of_x(m, m.x0, x1));
    auto F = [&](double beta) { return z_integral(m, beta) - z1; };

    // bracket in Y = y0 / cos(beta): doubling from 2 y0 up to 2^20 y0
    double hi_beta = 0.0, f_hi = 0.0;
    std::ostringstream history;
    bool found = false;
    for (int k = 1; k <= 20; ++k) {
        hi_beta = std::acos(std::ldexp(1.0, -k));
        f_hi = F(hi_beta);
        history << " Y=" << std::ldexp(m.y0, k) << ":" << f_hi;
        if (f_hi > 0.0) {
            found = true;
            break;
        }
    }
    if (!found) {
        throw NumericalError("solve_line_geodesic: no root bracket for y1* up to 2^20 y0;" +
                             history.str());
    }
    const double beta = numerics::find_root(F, 0.0, hi_beta, -z1, f_hi, 1e-15);
    const double Y = m.y0 / std::cos(beta);

    LineGeodesic out;
    out.x1 = x1;
    out.y1_star = Y;
    out.d = d_integral(m, beta);
    out.E = out.d * out.d;
    const double sign = x1 > m.x0 ? 1.0 : -1.0;
    out.K1 = sign * out.d / Y;
    const double vx = sign * m.sigma_at(m.x0).v * m.y0 * m.y0 / Y;
    const double vy = m.alpha_at(m.y0).v * std::sin(beta);
    out.path = integrate_geodesic(m, m.start(), vx, vy, out.d, kLineSamples);
    return out;
}

LineGeodesic line_geodesic_correlated(const ModelSpec& m, double x1) {
    const Point p = m.start();
    auto f = [&](double u) { return distance_point(m, p, {x1, std::exp(u)}); };

    // downhill bracket search in u = log y1
    double a = std::log(m.y0);
    double fa = f(a);
    double step = 0.1;
    double b = a + step, fb = f(b);
    if (fb > fa) {
        step = -step;
        std::swap(a, b);
        std::swap(fa, fb);
        b = a + step;
        fb = f(b);
        if (fb > fa) {
            // a is within one step of the minimum
            b = a - step;
            fb = f(b);
        }
    }
    double c = b + step, fc = f(c);
    for (int k = 0; k < 60 && fc < fb; ++k) {
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        step *= 1.6;
        c = b + step;
        fc = f(c);
    }
    if (fc < fb) throw NumericalError("solve_line_geodesic: no bracket for the minimising y1");
    const double lo = std::min(a, c), hi = std::max(a, c);
    const numerics::Minimum mn = numerics::minimize(f, lo, hi);

    // polish y1* on the transversality residual, which is d'(y1)
    double u_star = mn.x;
    auto residual = [&](double u) { return endpoint_y_momentum(m, p, {x1, std::exp(u)}); };
    const double du = 1e-5;
    const double r_lo = residual(u_star - du), r_hi = residual(u_star + du);
    if ((r_lo < 0.0) != (r_hi < 0.0)) {
        u_star = numerics::find_root(residual, u_star - du, u_star + du, r_lo, r_hi, 1e-15);
    }

    LineGeodesic out;
    out.x1 = x1;
    out.y1_star = std::exp(u_star);
    const PointGeodesic pg = geodesic_point(m, p, {x1, out.y1_star}, kLineSamples);
    out.d = pg.d;
    out.E = out.d * out.d;
    const MetricPoint g0 = metric_tensor(m, p.x, p.y);
    const PathSample& s0 = pg.path.front();
    out.K1 = out.d * m.sigma.values[0] * (g0.g[0][0] * s0.vx + g0.g[0][1] * s0.vy);
    out.path = pg.path;
    return out;
}

}  // namespace

LineGeodesic solve_line_geodesic(const ModelSpec& m, double x1) {
    if (!std::isfinite(x1)) throw std::invalid_argument("x1 must be finite");
    if (x1 == m.x0) throw std::invalid_argument("solve_line_geodesic: x1 must differ from x0");
    return m.rho == 0.0 ? line_geodesic_uncorrelated(m, x1) : line_geodesic_correlated(m, x1);
}

// ---------------------------------------------------------------------------

double phi_second(const ModelSpec& m, const LineGeodesic& geo) {
    if (std::abs(geo.x1 - m.x0) < 1e-6) {
        throw std::invalid_argument("phi_second: |x1 - x0| < 1e-6 is degenerate");
    }
    const Point p = m.start();
    const double Y = geo.y1_star;
    const PathSample& s0 = geo.path.front();
    const Frame fr = orthonormal_frame(m, p);
    const MetricPoint gp = metric_tensor(m, p.x, p.y);
    auto inner = [&](const double* u) {
        return gp.g[0][0] * u[0] * s0.vx + gp.g[0][1] * (u[0] * s0.vy + u[1] * s0.vx) +
               gp.g[1][1] * u[1] * s0.vy;
    };
    const ShotGuess warm{std::atan2(inner(fr.e2), inner(fr.e1)), geo.d};
    auto f = [&](double y1) {
        const double d = shoot(m, p, {geo.x1, y1}, 2, &warm).d;
        return 0.5 * d * d;
    };
    const double h = 1e-3 * Y;
    const double f0 = f(Y);
    const double fp = f(Y + h), fm = f(Y - h);
    const double fp2 = f(Y + 0.5 * h), fm2 = f(Y - 0.5 * h);
    const double D1 = (fp - 2.0 * f0 + fm) / (h * h);
    const double D2 = (fp2 - 2.0 * f0 + fm2) / (0.25 * h * h);
    const double second = (4.0 * D2 - D1) / 3.0;
    const double g1 = (fp - fm) / (2.0 * h);
    const double g2 = (fp2 - fm2) / h;
    const double first = (4.0 * g2 - g1) / 3.0;
    if (std::abs(first) > 1e-6) {
        std::ostringstream msg;
        msg << "phi_second: transversality check failed, d/dy1 (d^2/2) = " << first << " at y1* = " << Y;
        throw NumericalError(msg.str());
    }
    if (!(second > 0.0) || !std::isfinite(second)) {
        std::ostringstream msg;
        msg << "phi_second: non-positive second derivative " << second;
        throw NumericalError(msg.str());
    }
    return second;
}

namespace {

// geodesic and normal Jacobi field (J(0) = 0, J'(0) = 1) integrated to the path end
State6 jacobi_end(const ModelSpec& m, const GeodesicPath& path, const char* who) {
    if (path.size() < 200) throw std::invalid_argument(std::string(who) + ": path needs >= 200 samples");
    const PathSample& a = path.front();
    const double d = path.back().s - a.s;
    if (!(d > 0.0)) throw std::invalid_argument(std::string(who) + ": zero-length path");
    State6 s{a.x, a.y, a.vx, a.vy, 0.0, 1.0};
    long calls = 0;
    odeint::integrate_adaptive(make_stepper<State6>(), GeodesicRhs{&m, &calls}, s, 0.0, d, d / 16.0);
    if (!(s[4] > 0.0)) {
        std::ostringstream msg;
        msg << who << ": J(d) = " << s[4] << " <= 0";
        throw NumericalError(msg.str());
    }
    return s;
}

}  // namespace

double jacobi_u0(const ModelSpec& m, const GeodesicPath& path) {
    const State6 s = jacobi_end(m, path, "jacobi_u0");
    return std::pow(s[4] / (path.back().s - path.front().s), -0.5);
}

double phi_second_jacobi(const ModelSpec& m, const LineGeodesic& geo) {
    if (std::abs(geo.x1 - m.x0) < 1e-6) {
        throw std::invalid_argument("phi_second_jacobi: |x1 - x0| < 1e-6 is degenerate");
    }
    const State6 s = jacobi_end(m, geo.path, "phi_second_jacobi");
    // d^2 r/dy^2 = Hess r(dy, dy) + Gamma^k_yy dr/dx^k, with dy orthogonal to the tangent
    // at y1* so that Hess r(dy, dy) = g_yy J'/J
    const MetricPoint g = metric_tensor(m, s[0], s[1]);
    const Christoffel G = christoffel(m, s[0], s[1]);
    const double r_x = g.g[0][0] * s[2] + g.g[0][1] * s[3];
    const double r_yy = g.g[1][1] * s[5] / s[4] + G[0][1][1] * r_x;
    const double second = geo.d * r_yy;
    if (!(second > 0.0) || !std::isfinite(second)) {
        std::ostringstream msg;
        msg << "phi_second_jacobi: non-positive second derivative " << second;
        throw NumericalError(msg.str());
    }
    return second;
}

double jacobi_u0(const std::function<double(double)>& kappa_of_s, double length) {
    if (!(length > 0.0)) throw std::invalid_argument("jacobi_u0: length must be > 0");
    using State2 = std::array<double, 2>;
    State2 s{0.0, 1.0};
    odeint::integrate_adaptive(
        make_stepper<State2>(),
        [&](const State2& st, State2& ds, double t) {
            ds[0] = st[1];
            ds[1] = -kappa_of_s(t) * st[0];
        },
        s, 0.0, length, length / 16.0);
    if (!(s[0] > 0.0)) throw NumericalError("jacobi_u0: J(d) <= 0");
    return std::pow(s[0] / length, -0.5);
}

SabrReference sabr_reference(double x1, double y0, double nu) {
    if (x1 == 0.0 || !std::isfinite(x1)) throw std::invalid_argument("sabr_reference: x1 must be nonzero");
    if (!(y0 > 0.0) || !(nu > 0.0)) throw std::invalid_argument("sabr_reference: y0, nu must be > 0");
    const double u = nu * x1 / y0;
    SabrReference r;
    r.y1_star = std::sqrt(nu * nu * x1 * x1 + y0 * y0);
    const double D = std::asinh(std::abs(u));
    r.d = D / nu;
    r.u0 = std::pow(std::sinh(D) / D, -0.5);
    r.phi_second = D / (nu * nu * y0 * r.y1_star * std::sinh(D));
    r.A = -0.5 * x1;
    r.A_SV = std::exp(x1) * std::exp(-0.5 * x1) * std::sqrt(y0 * r.y1_star) / (r.d * r.d);
    return r;
}

double sabr_distance(double nu, double rho, double sigma0, Point p, Point q) {
    require_y(p.y);
    require_y(q.y);
    const double rb = std::sqrt(1.0 - rho * rho);
    const double wp = (nu * p.x / sigma0 - rho * p.y) / rb;
    const double wq = (nu * q.x / sigma0 - rho * q.y) / rb;
    const double dw = wq - wp, dy = q.y - p.y;
    return std::acosh(1.0 + (dw * dw + dy * dy) / (2.0 * p.y * q.y)) / nu;
}

double tail_distance_estimate(const ModelSpec& m, double y1, TailEnd end) {
    require_y(y1);
    const GrowthConstants g = m.growth();
    const double rb = m.rho_bar();
    if (end == TailEnd::zero) return std::abs(std::log(y1)) / (rb * g.A1);
    if (g.p == 1.0) return std::log(y1) / (rb * g.B1);
    return std::pow(y1, 1.0 - g.p) / (rb * g.B1 * (1.0 - g.p));
}

}  // namespace lsv
