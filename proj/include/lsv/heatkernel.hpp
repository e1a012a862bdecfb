#pragma once

#include <array>

#include "lsv/geometry.hpp"

namespace lsv {

/// Leading-order kernel ingredients at the point-to-line minimiser (x1, y1*).
struct KernelFactors {
    double u0 = 0.0;
    double A = 0.0;
    double P = 1.0;  // exp(A)
    double psi = 0.0;
    double phi = 0.0;  // d^2 / 2
    double phi_second = 0.0;
    double sqrt_g = 0.0;  // sqrt|g| at (x1, y1*)
};

/// Drift vector field b - |g|^{-1/2} d_j(sqrt|g| g^{ij}) / 2 at (x, y), without jumps.
std::array<double, 2> drift_field(const ModelSpec& model, double x, double y);

/// Work term A = int g(drift, gamma') along the point-to-line geodesic.
/// rho = 0 with a monotone path uses the separable closed form; otherwise the line integral.
double work_term_A(const ModelSpec& model, const LineGeodesic& geo);

/// Separable form for rho = 0 between two points (the integrand is an exact differential).
double work_term_A_separable(const ModelSpec& model, Point p, Point q);

/// Line integral of g(drift, T) over an arclength-sampled path (trapezoid plus one
/// Richardson step; needs an odd sample count >= 3).
double work_term_A_path(const ModelSpec& model, const GeodesicPath& path);

KernelFactors kernel_factors(const ModelSpec& model, const LineGeodesic& geo);

/// Leading-order transition density with respect to dx dy:
/// (2 pi t)^{-1} u0 exp(-d^2/(2t) + A) sqrt|g|(q).
double bellaiche_density(const ModelSpec& model, Point p, Point q, double t);

/// Exact heat kernel of (1/2) Laplacian on the hyperbolic plane at distance d.
double mckean_kernel(double d, double t);

/// van Vleck-Morette determinant of phi = d^2/2 by central differences in (x, log y).
double vvm_determinant(const ModelSpec& model, Point p, Point q);

}  // namespace lsv
