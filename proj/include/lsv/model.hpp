#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lsv/config.hpp"

namespace lsv {

/// Value and first three derivatives of a scalar coefficient at one point.
struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

/// Closed set of coefficient families. Each family supplies analytic
/// derivatives so curvature, Christoffel symbols and audits are exact.
///
/// Adding a family means: a new enumerator, its parameter names in
/// `family_param_names`, its evaluation in model.cpp, and (if it should run
/// on the Monte Carlo fast path) its lowering in pricing_oracle.cpp.
enum class FamilyKind {
    sigma_constant,  // sigma(x) = sigma0
    sigma_logistic,  // sigma(x) = lo + (hi - lo) / (1 + exp(-slope (x - center)))
    alpha_power,     // alpha(y) = nu y^p
    mu_zero,         // mu(y) = 0
    mu_rational,     // mu(y) = (mu0 y - kappa y^3) / (1 + y^2)
    mu_prop45,       // mu(y) = alpha alpha' / 2 - alpha^2 / (2y) - c y alpha
};

std::string_view family_name(FamilyKind kind);
std::vector<std::string_view> family_param_names(FamilyKind kind);

struct CoefficientFamily {
    FamilyKind kind = FamilyKind::mu_zero;
    std::array<double, 4> values{};  // ordered as family_param_names(kind)

    double param(std::string_view name) const;

    static CoefficientFamily sigma_constant(double sigma0);
    static CoefficientFamily sigma_logistic(double lo, double hi, double slope, double center);
    static CoefficientFamily alpha_power(double nu, double p);
    static CoefficientFamily mu_zero();
    static CoefficientFamily mu_rational(double mu0, double kappa);
    static CoefficientFamily mu_prop45(double c);
};

/// Small- and large-y growth constants of alpha and mu:
/// alpha ~ A1 y (y -> 0), alpha ~ B1 y^p (y -> inf), mu ~ mu0 y, mu ~ -kappa y.
struct GrowthConstants {
    double A1 = 0.0;
    double B1 = 0.0;
    double p = 1.0;
    double mu0 = 0.0;
    double kappa = 0.0;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct ModelSpec {
    CoefficientFamily sigma = CoefficientFamily::sigma_constant(1.0);
    CoefficientFamily alpha = CoefficientFamily::alpha_power(1.0, 1.0);
    CoefficientFamily mu = CoefficientFamily::mu_zero();
    double rho = 0.0;
    double lambda = 0.0;  // jump-to-default intensity, 1/time
    double x0 = 0.0;      // log initial forward
    double y0 = 0.2;      // initial volatility

    Jet sigma_at(double x) const;
    Jet alpha_at(double y) const;
    Jet mu_at(double y) const;

    Point start() const { return {x0, y0}; }
    double rho_bar() const;
    bool sigma_is_constant() const { return sigma.kind == FamilyKind::sigma_constant; }
    /// rho = 0, sigma constant, alpha linear, mu zero: the beta = 1 SABR family.
    bool is_sabr() const;
    GrowthConstants growth() const;

    /// The beta = 1 SABR model with vol-of-vol nu.
    static ModelSpec sabr(double y0, double nu = 1.0, double rho = 0.0);
};

/// Structural validation; throws std::invalid_argument naming the offending field.
void validate_model(const ModelSpec& model);

/// Builds and validates a model from a parsed config document (see config.hpp
/// for the file format).
ModelSpec build_model(const ConfigDocument& config);
ModelSpec load_model(const std::string& path);

/// Renders a model back into config text that build_model accepts.
std::string model_to_config(const ModelSpec& model);

// ---------------------------------------------------------------------------
// Assumption audit

struct AuditGrid {
    double x_lo = -1.0;
    double x_hi = 1.0;
    int x_points = 41;
    double y_lo = 1e-4;
    double y_hi = 1e4;
    int y_points = 161;  // log-spaced
};

struct AuditCheck {
    std::string name;
    bool pass = true;
    bool warning = false;
    std::string witness;  // human-readable values explaining the outcome
};

struct AuditReport {
    AuditGrid grid;
    std::vector<AuditCheck> checks;
    double v_max = 0.0;             // grid supremum of V(x, y)
    double vbar_limit_zero = 0.0;   // analytic limit of Vbar as y -> 0
    double vbar_limit_inf = 0.0;    // analytic limit of Vbar as y -> inf

    bool all_pass() const;
    const AuditCheck* find(std::string_view name) const;
};

/// Numeric audit of the model assumptions on a grid. Failures are recorded, never thrown.
AuditReport audit_assumptions(const ModelSpec& model, const AuditGrid& grid = {});

/// Growth-exponent probe: two-point log-log slope of alpha at y and 2y.
double alpha_growth_exponent(const ModelSpec& model, double y);

// ---------------------------------------------------------------------------
// Gauge transformation

/// chi(x, y) = sqrt(sigma(x)) e^{x/2} sqrt(alpha(y)/y) exp(-int_1^y mu/alpha^2 du). Requires rho = 0.
double gauge_chi(const ModelSpec& model, double x, double y);

/// Potential V = ((A + Delta/2) chi) / chi of the gauge-transformed generator.
/// For rho != 0 the model must have constant sigma and the prop45 drift.
double gauge_potential(const ModelSpec& model, double x, double y);

/// y-only part of V for rho = 0 (V without the sigma term); V <= Vbar everywhere.
double gauge_potential_bar(const ModelSpec& model, double y);

}  // namespace lsv
