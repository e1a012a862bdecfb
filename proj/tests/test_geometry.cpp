#include <cmath>
#include <random>

#include "doctest.h"
#include "lsv/geometry.hpp"

using namespace lsv;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double energy(const ModelSpec& m, const PathSample& s) {
    const MetricPoint g = metric_tensor(m, s.x, s.y);
    return g.g[0][0] * s.vx * s.vx + 2 * g.g[0][1] * s.vx * s.vy + g.g[1][1] * s.vy * s.vy;
}

ModelSpec logistic_model() {
    ModelSpec m = ModelSpec::sabr(0.25);
    m.sigma = CoefficientFamily::sigma_logistic(0.6, 1.4, 2.0, 0.05);
    m.alpha = CoefficientFamily::alpha_power(0.9, 0.7);
    m.mu = CoefficientFamily::mu_rational(0.0, 0.3);
    return m;
}

}  // namespace

TEST_CASE("metric tensor") {
    const ModelSpec sabr = ModelSpec::sabr(0.2);
    const MetricPoint g = metric_tensor(sabr, 0.0, 2.0);
    CHECK(g.g[0][0] == doctest::Approx(0.25));
    CHECK(g.g[1][1] == doctest::Approx(0.25));
    CHECK(g.g[0][1] == 0.0);
    CHECK(rel(sqrt_det_g(sabr, 0.3, 0.7), 1 / 0.49) < 1e-14);

    const ModelSpec c = ModelSpec::sabr(1.0, 1.0, -0.5);
    const MetricPoint gc = metric_tensor(c, 0.0, 1.0);
    CHECK(rel(gc.g[0][0], 4.0 / 3) < 1e-14);
    CHECK(rel(gc.g[0][1], 2.0 / 3) < 1e-14);
    CHECK(rel(gc.g[1][1], 4.0 / 3) < 1e-14);
    CHECK(rel(gc.det_g, 4.0 / 3) < 1e-14);
    CHECK_THROWS_AS(metric_tensor(sabr, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("Gaussian curvature") {
    const ModelSpec sabr = ModelSpec::sabr(0.2);
    CHECK(gauss_curvature(sabr, 0.3, 0.8) == -1.0);
    ModelSpec m = sabr;
    m.alpha = CoefficientFamily::alpha_power(1.0, 0.5);
    CHECK(rel(gauss_curvature(m, 0.0, 4.0), -0.375) < 1e-14);
    // kappa ~ -B1^2 (2 - p) y^(2(p-1)) at large y
    CHECK(rel(gauss_curvature(m, 0.0, 1e3), -1.5 * std::pow(1e3, -1.0)) < 0.01);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double nu = 0.2 + 2 * U(rng);
        const double x = -1 + 2 * U(rng), y = std::exp(-4 + 6 * U(rng));
        CHECK(std::abs(gauss_curvature(ModelSpec::sabr(0.2, nu), x, y) + nu * nu) < 1e-12);
        // correlated SABR is hyperbolic with the same curvature
        const ModelSpec c = ModelSpec::sabr(0.2, nu, -0.9 * U(rng));
        CHECK(std::abs(gauss_curvature(c, x, y) + nu * nu) < 1e-10 * nu * nu);
    }
    const ModelSpec lm = logistic_model();
    for (int i = 0; i < 50; ++i) {
        const double x = -1 + 2 * U(rng), y = std::exp(-4 + 6 * U(rng));
        CHECK(rel(gauss_curvature_brioschi(lm, x, y), gauss_curvature(lm, x, y)) < 1e-8);
    }
}

TEST_CASE("line geodesic matches SABR closed forms") {
    const ModelSpec sabr = ModelSpec::sabr(0.2);
    const LineGeodesic g = solve_line_geodesic(sabr, 0.2);
    CHECK(rel(g.y1_star, std::sqrt(0.08)) < 1e-12);
    CHECK(rel(g.d, std::log(1 + std::sqrt(2.0))) < 1e-12);
    CHECK(rel(g.E, g.d * g.d) < 1e-15);
    CHECK(rel(g.K1 * g.K1 * g.y1_star * g.y1_star, g.E) < 1e-12);
    CHECK(g.path.size() >= 512);
    CHECK(std::abs(g.path.back().x - 0.2) < 1e-9);
    CHECK(std::abs(g.path.back().y - g.y1_star) < 1e-9);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double y0 = 0.05 + U(rng);
        const double nu = 0.3 + 1.5 * U(rng);
        const double x1 = (U(rng) < 0.5 ? -1 : 1) * (0.01 + 0.5 * U(rng));
        const SabrReference r = sabr_reference(x1, y0, nu);
        const LineGeodesic l = solve_line_geodesic(ModelSpec::sabr(y0, nu), x1);
        CHECK(rel(l.y1_star, r.y1_star) < 1e-8);
        CHECK(rel(l.d, r.d) < 1e-8);
    }
    CHECK_THROWS_AS(solve_line_geodesic(sabr, 0.0), std::invalid_argument);
}

TEST_CASE("tiny strikes stay well conditioned") {
    const ModelSpec sabr = ModelSpec::sabr(0.2);
    const LineGeodesic g = solve_line_geodesic(sabr, 1e-6);
    CHECK(rel(g.d, std::asinh(1e-6 / 0.2)) < 1e-10);
    CHECK(std::abs(1e-6 / g.d - 0.2) < 1e-9);
}

TEST_CASE("conservation laws and transversality") {
    for (const ModelSpec& m : {ModelSpec::sabr(0.2), logistic_model()}) {
        for (double x1 : {-0.3, 0.15}) {
            const LineGeodesic g = solve_line_geodesic(m, x1);
            const double e0 = energy(m, g.path.front());
            CHECK(std::abs(e0 - 1.0) < 1e-12);
            for (const auto& s : g.path) CHECK(std::abs(energy(m, s) / e0 - 1.0) < 1e-7);
            // momentum conjugate to z = int dx / sigma
            for (const auto& s : g.path) {
                const double k = g.d * s.vx / m.sigma_at(s.x).v / (s.y * s.y);
                CHECK(std::abs(k / g.K1 - 1.0) < 1e-6);
            }
            const PathSample& e = g.path.back();
            const MetricPoint gm = metric_tensor(m, e.x, e.y);
            CHECK(std::abs(gm.g[0][1] * e.vx + gm.g[1][1] * e.vy) < 1e-6);
            CHECK(std::abs(e.x - x1) < 1e-8);
        }
    }
}

TEST_CASE("point-to-point distance") {
    const ModelSpec sabr = ModelSpec::sabr(0.2);
    CHECK(rel(distance_point(sabr, {0, 0.2}, {0.2, std::sqrt(0.08)}), std::log(1 + std::sqrt(2.0))) < 1e-10);
    CHECK(rel(distance_point(sabr, {0, 0.2}, {0.1, 0.25}), std::acosh(1.125)) < 1e-10);
    CHECK(distance_point(sabr, {0.1, 0.3}, {0.1, 0.3}) == 0.0);

    const ModelSpec lm = logistic_model();
    const Point p{-0.1, 0.3}, q{0.35, 0.12};
    CHECK(std::abs(distance_point(lm, p, q) - distance_point(lm, q, p)) < 1e-8);

    const PointGeodesic pg = geodesic_point(lm, p, q);
    for (const auto& s : pg.path) CHECK(std::abs(energy(lm, s) - 1.0) < 1e-7);

    // correlated SABR against its hyperbolic closed form
    for (double rho : {-0.3, -0.7}) {
        const ModelSpec c = ModelSpec::sabr(0.2, 0.8, rho);
        const Point a{0.0, 0.2}, b{0.15, 0.31};
        CHECK(rel(distance_point(c, a, b), sabr_distance(0.8, rho, 1.0, a, b)) < 1e-9);
    }
}

TEST_CASE("correlated point-to-line geodesic") {
    const double nu = 1.0, rho = -0.5;
    const ModelSpec c = ModelSpec::sabr(0.2, nu, rho);
    const double x1 = 0.1;
    const LineGeodesic g = solve_line_geodesic(c, x1);
    // golden-section minimum of the closed-form distance along the line
    auto f = [&](double y) { return sabr_distance(nu, rho, 1.0, {0, 0.2}, {x1, y}); };
    double a = 0.05, b = 1.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1);
    for (int i = 0; i < 200; ++i) {
        const double c = b - r * (b - a), d = a + r * (b - a);
        if (f(c) < f(d)) b = d; else a = c;
    }
    CHECK(rel(g.d, f(0.5 * (a + b))) < 1e-10);
    CHECK(rel(g.y1_star, 0.5 * (a + b)) < 1e-6);
    const PathSample& e = g.path.back();
    const MetricPoint gm = metric_tensor(c, e.x, e.y);
    CHECK(std::abs(gm.g[0][1] * e.vx + gm.g[1][1] * e.vy) < 1e-6);
    CHECK(phi_second(c, g) > 0.0);
}

TEST_CASE("phi_second and u0 against SABR closed forms") {
    const ModelSpec sabr = ModelSpec::sabr(0.2);
    const LineGeodesic g = solve_line_geodesic(sabr, 0.2);
    CHECK(rel(phi_second(sabr, g), 0.881373587019543 / (0.2 * std::sqrt(0.08))) < 1e-6);
    CHECK(rel(phi_second(sabr, solve_line_geodesic(sabr, 0.04)), 24.35396033242033) < 1e-6);
    CHECK(rel(jacobi_u0(sabr, g.path), 0.9388149908366094) < 1e-9);
    CHECK_THROWS_AS(phi_second(sabr, solve_line_geodesic(sabr, 5e-7)), std::invalid_argument);

    for (double x1 : {-0.3, -0.05, 0.07, 0.25, 0.6}) {
        const SabrReference r = sabr_reference(x1, 0.2, 1.0);
        const LineGeodesic l = solve_line_geodesic(sabr, x1);
        CHECK(rel(jacobi_u0(sabr, l.path), r.u0) < 1e-9);
        CHECK(rel(phi_second(sabr, l), r.phi_second) < 1e-6);
        CHECK(rel(phi_second_jacobi(sabr, l), r.phi_second) < 1e-11);
    }
}

TEST_CASE("second variation and finite differences agree on phi_second") {
    for (const ModelSpec& m : {logistic_model(), ModelSpec::sabr(0.3, 0.8, -0.5)}) {
        for (double x1 : {-0.2, 0.15, 0.4}) {
            const LineGeodesic l = solve_line_geodesic(m, x1);
            CHECK(rel(phi_second_jacobi(m, l), phi_second(m, l)) < 1e-6);
        }
    }
}

TEST_CASE("Jacobi field oracles") {
    CHECK(jacobi_u0([](double) { return 0.0; }, 0.7) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rel(jacobi_u0([](double) { return -1.0; }, 0.5), std::pow(std::sinh(0.5) / 0.5, -0.5)) < 1e-12);
    // u0 = 1 + kappa d^2 / 12 + o(d^2)
    const ModelSpec sabr = ModelSpec::sabr(0.2);
    double prev = 0.0;
    for (double d : {0.02, 0.01, 0.005}) {
        const double u0 = jacobi_u0([](double) { return -1.0; }, d);
        const double rem = std::abs(u0 - (1.0 - d * d / 12));
        if (prev > 0.0) CHECK(std::log(prev / rem) / std::log(2.0) >= 3.5);
        prev = rem;
    }
    const double d = 0.01;
    const PointGeodesic pg = geodesic_point(sabr, {0, 0.2}, {0.2 * std::sinh(d), 0.2 * std::cosh(d)}, 256);
    CHECK(std::abs(jacobi_u0(sabr, pg.path) - (1 - d * d / 12)) < 1e-9);
}

TEST_CASE("sabr_reference") {
    const SabrReference r = sabr_reference(0.2, 0.2, 1.0);
    CHECK(rel(r.y1_star, 0.28284271247461901) < 1e-15);
    CHECK(rel(r.d, 0.88137358701954303) < 1e-15);
    CHECK(r.A == doctest::Approx(-0.1));
    CHECK(rel(r.A_SV, 0.33837391786202) < 1e-13);
    CHECK_THROWS_AS(sabr_reference(0.0, 0.2, 1.0), std::invalid_argument);
}

TEST_CASE("tail distance estimates") {
    const ModelSpec sabr = ModelSpec::sabr(1.0);
    CHECK(rel(tail_distance_estimate(sabr, std::exp(5.0), TailEnd::infinity), 5.0) < 1e-14);
    CHECK(rel(tail_distance_estimate(sabr, std::exp(-3.0), TailEnd::zero), 3.0) < 1e-14);
    ModelSpec m = sabr;
    m.alpha = CoefficientFamily::alpha_power(1.0, 0.5);
    CHECK(rel(tail_distance_estimate(m, 100.0, TailEnd::infinity), 20.0) < 1e-14);
    ModelSpec c = ModelSpec::sabr(1.0, 1.0, -0.6);
    CHECK(rel(tail_distance_estimate(c, std::exp(1.0), TailEnd::infinity), 1.25) < 1e-14);

    const double ratio = distance_point(sabr, {0, 1.0}, {0, 1e3}) /
                         tail_distance_estimate(sabr, 1e3, TailEnd::infinity);
    CHECK(std::abs(ratio - 1.0) < 0.05);
}
