#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lsv/geometry.hpp"
#include "lsv/model.hpp"
#include "lsv/numerics.hpp"

namespace lsv {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
    for (double& e : v) e = std::exp(e);
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::string fmt(std::initializer_list<std::pair<const char*, double>> items) {
    std::ostringstream out;
    out.precision(10);
    bool first = true;
    for (const auto& [k, v] : items) {
        if (!first) out << ", ";
        out << k << "=" << v;
        first = false;
    }
    return out.str();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Analytic limits of Vbar at the two ends (rho = 0); NaN when no closed form applies.
std::pair<double, double> vbar_limits(const ModelSpec& m) {
    const GrowthConstants g = m.growth();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (m.mu.kind == FamilyKind::mu_prop45 || m.rho != 0.0) return {nan, nan};
    const double zero = g.p < 1.0 ? kInf : 0.5 * g.mu0 * (1.0 - g.mu0 / (g.A1 * g.A1));
    double inf;
    if (g.p == 1.0) {
        inf = -0.5 * g.kappa - g.kappa * g.kappa / (2.0 * g.B1 * g.B1);
    } else {
        inf = g.kappa > 0.0 ? -kInf : 0.0;
    }
    return {zero, inf};
}

}  // namespace

double alpha_growth_exponent(const ModelSpec& m, double y) {
    return std::log(m.alpha_at(2.0 * y).v / m.alpha_at(y).v) / std::log(2.0);
}

AuditReport audit_assumptions(const ModelSpec& m, const AuditGrid& grid) {
    AuditReport rep;
    rep.grid = grid;
    const auto xs = linspace(grid.x_lo, grid.x_hi, grid.x_points);
    const auto ys = logspace(grid.y_lo, grid.y_hi, grid.y_points);

    // (i) non-positive curvature
    {
        AuditCheck c{"negative_curvature", true, false, {}};
        double worst = -kInf, wx = 0, wy = 0;
        for (double x : xs) {
            for (double y : ys) {
                const double k = gauss_curvature(m, x, y);
                if (!(k <= worst) || std::isnan(k)) {
                    worst = k;
                    wx = x;
                    wy = y;
                }
            }
        }
        c.pass = worst <= 0.0;
        c.witness = fmt({{"max_kappa", worst}, {"x", wx}, {"y", wy}});
        rep.checks.push_back(c);
    }

    // (ii) sigma bounds and skew condition
    {
        AuditCheck c{"sigma_bounds_skew", true, false, {}};
        double lo = kInf, hi = -kInf, worst = kInf, wx = 0;
        for (double x : xs) {
            const Jet s = m.sigma_at(x);
            lo = std::min(lo, s.v);
            hi = std::max(hi, s.v);
            const double skew = s.v * s.v + s.d1 * s.d1 - 2.0 * s.v * s.d2;
            if (skew < worst) {
                worst = skew;
                wx = x;
            }
        }
        c.pass = lo > 0.0 && std::isfinite(hi) && worst > 0.0;
        c.witness = fmt({{"sigma_min", lo}, {"sigma_max", hi}, {"min_skew", worst}, {"x", wx}});
        rep.checks.push_back(c);
    }

    // (iii) -2 alpha + y alpha' <= 0
    {
        AuditCheck c{"alpha_sublinear", true, false, {}};
        double worst = -kInf, wy = 0;
        for (double y : ys) {
            const Jet a = m.alpha_at(y);
            const double v = -2.0 * a.v + y * a.d1;
            if (v > worst) {
                worst = v;
                wy = y;
            }
        }
        c.pass = worst <= 0.0;
        c.witness = fmt({{"max_value", worst}, {"y", wy}});
        rep.checks.push_back(c);
    }

    // (iv) growth exponents at both ends
    {
        AuditCheck c{"growth_exponents", true, false, {}};
        const GrowthConstants g = m.growth();
        const double s0 = alpha_growth_exponent(m, 1e-5);
        const double s1 = alpha_growth_exponent(m, 1e4);
        const double a1 = m.alpha_at(1e-5).v / 1e-5;
        const double b1 = m.alpha_at(1e4).v / std::pow(1e4, s1);
        c.pass = std::abs(s0 - 1.0) < 1e-3 && std::abs(s1 - g.p) < 1e-3 && s1 <= 1.0 + 1e-3 &&
                 s1 > 0.0;
        c.witness = fmt({{"slope_small", s0}, {"A1_est", a1}, {"slope_large", s1}, {"p", g.p},
                         {"B1_est", b1}});
        rep.checks.push_back(c);
    }

    // (v) potential bounded above
    {
        AuditCheck c{"potential_bounded", true, false, {}};
        double vmax = -kInf, wx = 0, wy = 0;
        bool finite = true;
        for (double x : xs) {
            for (double y : ys) {
                const double v = gauge_potential(m, x, y);
                if (!std::isfinite(v)) finite = false;
                if (v > vmax) {
                    vmax = v;
                    wx = x;
                    wy = y;
                }
            }
        }
        rep.v_max = vmax;
        const auto [lz, li] = vbar_limits(m);
        // without a closed form, report the grid-end values of V at x0
        rep.vbar_limit_zero = std::isnan(lz) ? gauge_potential(m, m.x0, ys.front()) : lz;
        rep.vbar_limit_inf = std::isnan(li) ? gauge_potential(m, m.x0, ys.back()) : li;
        bool diverges = rep.vbar_limit_zero == kInf || rep.vbar_limit_inf == kInf;
        if (std::isnan(lz) || std::isnan(li)) {
            // divergence probe along the ends of the grid: growing by decades and large
            auto grows = [&](double y_end, double factor) {
                const double v0 = gauge_potential(m, m.x0, y_end);
                const double v1 = gauge_potential(m, m.x0, y_end * factor);
                const double v2 = gauge_potential(m, m.x0, y_end * factor * factor);
                return v0 > v1 && v1 > v2 && v0 > 1e3 * std::max(1.0, std::abs(v2));
            };
            diverges = diverges || grows(ys.front(), 10.0) || grows(ys.back(), 0.1);
        }
        c.pass = finite && !diverges;
        c.witness = fmt({{"V_max", vmax}, {"x", wx}, {"y", wy}, {"Vbar_0", rep.vbar_limit_zero},
                         {"Vbar_inf", rep.vbar_limit_inf}});
        rep.checks.push_back(c);
    }

    // mu0 > 0 is admitted but outside the tail argument's setting
    {
        const GrowthConstants g = m.growth();
        AuditCheck c{"mu0_zero", true, g.mu0 > 0.0, fmt({{"mu0", g.mu0}})};
        rep.checks.push_back(c);
    }
    return rep;
}

bool AuditReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.pass; });
}

const AuditCheck* AuditReport::find(std::string_view name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

void require_positive_y(double y) {
    if (!(y > 0.0) || !std::isfinite(y)) throw std::invalid_argument("y must be > 0");
}

// g(y) = -mu/alpha^2 + (alpha'/alpha - 1/y)/2 and its derivative
std::pair<double, double> gauge_g(const ModelSpec& m, double y) {
    const Jet a = m.alpha_at(y);
    const Jet mu = m.mu_at(y);
    const double a2 = a.v * a.v;
    const double g = -mu.v / a2 + 0.5 * (a.d1 / a.v - 1.0 / y);
    const double gp = -mu.d1 / a2 + 2.0 * mu.v * a.d1 / (a2 * a.v) +
                      0.5 * (a.d2 / a.v - a.d1 * a.d1 / a2 + 1.0 / (y * y));
    return {g, gp};
}

}  // namespace

double gauge_chi(const ModelSpec& m, double x, double y) {
    require_positive_y(y);
    if (m.rho != 0.0) throw std::invalid_argument("gauge_chi requires rho = 0");
    // int_1^y mu/alpha^2 du with u = e^w
    const double w = std::log(y);
    const double inner = numerics::integrate(
        [&](double s) {
            const double u = std::exp(s);
            const double a = m.alpha_at(u).v;
            return m.mu_at(u).v / (a * a) * u;
        },
        0.0, w, 1e-10, 1e-12);
    return std::sqrt(m.sigma_at(x).v) * std::exp(0.5 * x) * std::sqrt(m.alpha_at(y).v / y) *
           std::exp(-inner);
}

double gauge_potential_bar(const ModelSpec& m, double y) {
    require_positive_y(y);
    const auto [g, gp] = gauge_g(m, y);
    const double a = m.alpha_at(y).v;
    return m.mu_at(y).v * g + 0.5 * a * a * (g * g + gp);
}

double gauge_potential(const ModelSpec& m, double x, double y) {
    require_positive_y(y);
    if (m.rho == 0.0) {
        const Jet s = m.sigma_at(x);
        return -0.125 * y * y * (s.v * s.v + s.d1 * s.d1 - 2.0 * s.v * s.d2) +
               gauge_potential_bar(m, y);
    }
    if (!m.sigma_is_constant() || m.mu.kind != FamilyKind::mu_prop45) {
        throw std::invalid_argument(
            "gauge_potential: rho != 0 needs constant sigma and the prop45 drift");
    }
    const double s0 = m.sigma.values[0];
    const double c = m.mu.values[0];
    const double rho = m.rho;
    const double rb2 = 1.0 - rho * rho;
    const Jet a = m.alpha_at(y);
    const double k = (2.0 * c - rho * s0) / (2.0 * rb2);
    const double g = k * y / a.v;
    const double gp = k * (a.v - y * a.d1) / (a.v * a.v);
    const double C = (s0 - 2.0 * rho * c) / (2.0 * s0 * rb2);
    return 0.5 * s0 * s0 * y * y * C * (C - 1.0) + rho * s0 * y * a.v * C * g +
           0.5 * a.v * a.v * (g * g + gp) + m.mu_at(y).v * g;
}

}  // namespace lsv
