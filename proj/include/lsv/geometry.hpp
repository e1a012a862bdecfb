#pragma once

#include <array>
#include <functional>
#include <vector>

#include "lsv/model.hpp"

namespace lsv {

/// Metric g = a^{-1}, a the diffusion matrix [[s^2 y^2, rho s y alpha], [rho s y alpha, alpha^2]].
struct MetricPoint {
    std::array<std::array<double, 2>, 2> g{};
    double det_g = 0.0;
};

/// Metric components E = g11, F = g12, G = g22 with first and second partials.
struct MetricPartials {
    double E = 0, F = 0, G = 0;
    double E_x = 0, E_y = 0, F_x = 0, F_y = 0, G_x = 0, G_y = 0;
    double E_xx = 0, E_xy = 0, E_yy = 0;
    double F_xx = 0, F_xy = 0, F_yy = 0;
    double G_xx = 0, G_xy = 0, G_yy = 0;
};

/// Christoffel symbols of the second kind, gamma[k][i][j] = Gamma^k_{ij}.
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;

MetricPoint metric_tensor(const ModelSpec& model, double x, double y);
MetricPartials metric_partials(const ModelSpec& model, double x, double y);
double sqrt_det_g(const ModelSpec& model, double x, double y);
Christoffel christoffel(const ModelSpec& model, double x, double y);

/// Gaussian curvature: closed form alpha (y alpha' - 2 alpha) / y^2 for rho = 0,
/// Brioschi otherwise.
double gauss_curvature(const ModelSpec& model, double x, double y);
/// Brioschi formula from the analytic metric partials (any rho).
double gauss_curvature_brioschi(const ModelSpec& model, double x, double y);

/// Arclength sample of a unit-speed geodesic: position and coordinate tangent.
struct PathSample {
    double s = 0, x = 0, y = 0, vx = 0, vy = 0;
};
using GeodesicPath = std::vector<PathSample>;

/// Integrates the geodesic equation from `start` with coordinate velocity
/// (vx, vy) over arclength [0, length], returning `samples` equally spaced points.
/// The velocity should have unit g-norm for s to be arclength.
GeodesicPath integrate_geodesic(const ModelSpec& model, Point start, double vx, double vy,
                                double length, int samples);

/// Shortest geodesic from the model start point to the vertical line x = x1.
struct LineGeodesic {
    double x1 = 0.0;
    double y1_star = 0.0;
    double d = 0.0;
    double E = 0.0;   // d^2
    double K1 = 0.0;  // x-momentum on the unit-time parameterization, scaled by sigma0 (signed)
    GeodesicPath path;
};

LineGeodesic solve_line_geodesic(const ModelSpec& model, double x1);

/// Shortest geodesic between two points, found by shooting.
struct PointGeodesic {
    double d = 0.0;
    double theta = 0.0;  // initial angle in the g-orthonormal frame at p
    GeodesicPath path;
};

PointGeodesic geodesic_point(const ModelSpec& model, Point p, Point q, int samples = 513);
double distance_point(const ModelSpec& model, Point p, Point q);

/// g(gamma', d/dy) at the end of the point geodesic p -> q with unit-speed tangent;
/// equals the derivative of d(p, (qx, y)) in y at y = qy.
double endpoint_y_momentum(const ModelSpec& model, Point p, Point q);

/// Second derivative of y1 -> d((x0,y0),(x1,y1))^2 / 2 at y1*, by a Richardson-extrapolated
/// central difference (h = 1e-3 y1*) of re-shot distances. Also checks transversality.
double phi_second(const ModelSpec& model, const LineGeodesic& geo);

/// The same second derivative from the second variation of distance: d (g_yy J'/J +
/// Gamma^x_yy dr/dx) at the path end. Accurate to ODE tolerance.
double phi_second_jacobi(const ModelSpec& model, const LineGeodesic& geo);

/// u0 = (J(d)/d)^{-1/2} with J'' = -kappa J, J(0) = 0, J'(0) = 1 along the path.
double jacobi_u0(const ModelSpec& model, const GeodesicPath& path);
/// Same, for a prescribed curvature profile kappa(s) on [0, length].
double jacobi_u0(const std::function<double(double)>& kappa_of_s, double length);

/// Closed forms for SABR with vol-of-vol nu (alpha = nu y, sigma = 1, mu = 0, rho = 0).
struct SabrReference {
    double y1_star = 0, d = 0, u0 = 0, phi_second = 0, A = 0, A_SV = 0;
};
SabrReference sabr_reference(double x1, double y0, double nu = 1.0);

/// Closed-form distance in the correlated SABR metric (alpha = nu y, sigma = sigma0).
double sabr_distance(double nu, double rho, double sigma0, Point p, Point q);

enum class TailEnd { zero, infinity };

/// Asymptotic distance from the line y = 1 to y1 as y1 -> 0 or y1 -> infinity.
double tail_distance_estimate(const ModelSpec& model, double y1, TailEnd end);

}  // namespace lsv
