#include "lsv/model.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace lsv {

std::string_view family_name(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::sigma_constant: return "constant";
        case FamilyKind::sigma_logistic: return "logistic";
        case FamilyKind::alpha_power: return "power";
        case FamilyKind::mu_zero: return "zero";
        case FamilyKind::mu_rational: return "rational";
        case FamilyKind::mu_prop45: return "prop45";
    }
    return "?";
}

std::vector<std::string_view> family_param_names(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::sigma_constant: return {"sigma0"};
        case FamilyKind::sigma_logistic: return {"lo", "hi", "slope", "center"};
        case FamilyKind::alpha_power: return {"nu", "p"};
        case FamilyKind::mu_zero: return {};
        case FamilyKind::mu_rational: return {"mu0", "kappa"};
        case FamilyKind::mu_prop45: return {"c"};
    }
    return {};
}

double CoefficientFamily::param(std::string_view name) const {
    const auto names = family_param_names(kind);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values[i];
    }
    throw std::invalid_argument("family '" + std::string(family_name(kind)) +
                                "' has no parameter '" + std::string(name) + "'");
}

CoefficientFamily CoefficientFamily::sigma_constant(double sigma0) {
    return {FamilyKind::sigma_constant, {sigma0, 0, 0, 0}};
}
CoefficientFamily CoefficientFamily::sigma_logistic(double lo, double hi, double slope,
                                                    double center) {
    return {FamilyKind::sigma_logistic, {lo, hi, slope, center}};
}
CoefficientFamily CoefficientFamily::alpha_power(double nu, double p) {
    return {FamilyKind::alpha_power, {nu, p, 0, 0}};
}
CoefficientFamily CoefficientFamily::mu_zero() { return {FamilyKind::mu_zero, {}}; }
CoefficientFamily CoefficientFamily::mu_rational(double mu0, double kappa) {
    return {FamilyKind::mu_rational, {mu0, kappa, 0, 0}};
}
CoefficientFamily CoefficientFamily::mu_prop45(double c) {
    return {FamilyKind::mu_prop45, {c, 0, 0, 0}};
}

// ---------------------------------------------------------------------------

Jet ModelSpec::sigma_at(double x) const {
    const auto& v = sigma.values;
    switch (sigma.kind) {
        case FamilyKind::sigma_constant: return {v[0], 0.0, 0.0, 0.0};
        case FamilyKind::sigma_logistic: {
            const double lo = v[0], hi = v[1], k = v[2], c = v[3];
            const double s = 1.0 / (1.0 + std::exp(-k * (x - c)));
            const double q = s * (1.0 - s);
            const double amp = hi - lo;
            return {lo + amp * s, amp * k * q, amp * k * k * q * (1.0 - 2.0 * s),
                    amp * k * k * k * q * (1.0 - 6.0 * q)};
        }
        default: throw std::logic_error("sigma has a non-sigma family");
    }
}

Jet ModelSpec::alpha_at(double y) const {
    if (alpha.kind != FamilyKind::alpha_power) throw std::logic_error("alpha has a non-alpha family");
    const double nu = alpha.values[0], p = alpha.values[1];
    const double a = nu * std::pow(y, p);
    return {a, p * a / y, p * (p - 1.0) * a / (y * y), p * (p - 1.0) * (p - 2.0) * a / (y * y * y)};
}

Jet ModelSpec::mu_at(double y) const {
    const auto& v = mu.values;
    switch (mu.kind) {
        case FamilyKind::mu_zero: return {};
        case FamilyKind::mu_rational: {
            // mu = -kappa y + (mu0 + kappa) y / (1 + y^2)
            const double mu0 = v[0], kappa = v[1];
            const double w = 1.0 + y * y;
            const double r = y / w;
            const double r1 = (1.0 - y * y) / (w * w);
            const double r2 = 2.0 * y * (y * y - 3.0) / (w * w * w);
            const double r3 = -6.0 * (y * y * y * y - 6.0 * y * y + 1.0) / (w * w * w * w);
            const double m = mu0 + kappa;
            return {-kappa * y + m * r, -kappa + m * r1, m * r2, m * r3};
        }
        case FamilyKind::mu_prop45: {
            const double c = v[0];
            const Jet a = alpha_at(y);
            const double val = 0.5 * a.v * a.d1 - a.v * a.v / (2.0 * y) - c * y * a.v;
            const double d1 = 0.5 * (a.d1 * a.d1 + a.v * a.d2) - a.v * a.d1 / y +
                              a.v * a.v / (2.0 * y * y) - c * a.v - c * y * a.d1;
            const double d2 = 1.5 * a.d1 * a.d2 + 0.5 * a.v * a.d3 - (a.d1 * a.d1 + a.v * a.d2) / y +
                              2.0 * a.v * a.d1 / (y * y) - a.v * a.v / (y * y * y) - 2.0 * c * a.d1 -
                              c * y * a.d2;
            return {val, d1, d2, 0.0};
        }
        default: throw std::logic_error("mu has a non-mu family");
    }
}

double ModelSpec::rho_bar() const { return std::sqrt(1.0 - rho * rho); }

bool ModelSpec::is_sabr() const {
    return rho == 0.0 && sigma.kind == FamilyKind::sigma_constant &&
           alpha.kind == FamilyKind::alpha_power && alpha.values[1] == 1.0 &&
           mu.kind == FamilyKind::mu_zero;
}

GrowthConstants ModelSpec::growth() const {
    GrowthConstants g;
    g.A1 = alpha.values[0];
    g.B1 = alpha.values[0];
    g.p = alpha.values[1];
    if (mu.kind == FamilyKind::mu_rational) {
        g.mu0 = mu.values[0];
        g.kappa = mu.values[1];
    }
    return g;
}

ModelSpec ModelSpec::sabr(double y0, double nu, double rho) {
    ModelSpec m;
    m.alpha = CoefficientFamily::alpha_power(nu, 1.0);
    m.mu = rho == 0.0 ? CoefficientFamily::mu_zero() : CoefficientFamily::mu_prop45(0.0);
    m.rho = rho;
    m.y0 = y0;
    return m;
}

// ---------------------------------------------------------------------------

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

bool finite_params(const CoefficientFamily& f) {
    for (double v : f.values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace

void validate_model(const ModelSpec& m) {
    require(finite_params(m.sigma) && finite_params(m.alpha) && finite_params(m.mu),
            "model parameters must be finite");
    switch (m.sigma.kind) {
        case FamilyKind::sigma_constant:
            require(m.sigma.values[0] > 0, "sigma.sigma0 must be > 0");
            break;
        case FamilyKind::sigma_logistic:
            require(m.sigma.values[0] > 0, "sigma.lo must be > 0");
            require(m.sigma.values[1] >= m.sigma.values[0], "sigma.hi must be >= sigma.lo");
            break;
        default: require(false, "sigma: family must be constant or logistic");
    }
    require(m.alpha.kind == FamilyKind::alpha_power, "alpha: family must be power");
    require(m.alpha.values[0] > 0, "alpha.nu must be > 0");
    require(m.alpha.values[1] > 0 && m.alpha.values[1] <= 1, "alpha.p must lie in (0, 1]");
    switch (m.mu.kind) {
        case FamilyKind::mu_zero:
        case FamilyKind::mu_prop45: break;
        case FamilyKind::mu_rational:
            require(m.mu.values[0] >= 0, "mu.mu0 must be >= 0");
            require(m.mu.values[1] >= 0, "mu.kappa must be >= 0");
            break;
        default: require(false, "mu: family must be zero, rational or prop45");
    }
    require(std::isfinite(m.rho) && m.rho > -1.0 && m.rho <= 0.0, "rho must lie in (-1, 0]");
    require(std::isfinite(m.lambda) && m.lambda >= 0.0, "lambda must be >= 0");
    require(std::isfinite(m.x0), "x0 must be finite");
    require(std::isfinite(m.y0) && m.y0 > 0.0, "y0 must be > 0");
    if (m.rho != 0.0) {
        require(m.sigma.kind == FamilyKind::sigma_constant,
                "rho != 0 requires a constant sigma (gauge transform exists only then)");
        require(m.mu.kind == FamilyKind::mu_prop45,
                "rho != 0 requires the prop45 drift mu = alpha alpha'/2 - alpha^2/(2y) - c y alpha");
    }
    if (m.lambda > 0.0) {
        require(m.rho == 0.0, "lambda > 0 requires rho = 0");
        require(m.sigma.kind == FamilyKind::sigma_constant && m.sigma.values[0] == 1.0,
                "lambda > 0 requires sigma == 1");
    }
}

namespace {

CoefficientFamily read_family(const ConfigDocument& cfg, const std::string& section) {
    const std::string name = cfg.require(section, "family");
    static const std::pair<const char*, std::vector<FamilyKind>> table[] = {
        {"sigma", {FamilyKind::sigma_constant, FamilyKind::sigma_logistic}},
        {"alpha", {FamilyKind::alpha_power}},
        {"mu", {FamilyKind::mu_zero, FamilyKind::mu_rational, FamilyKind::mu_prop45}},
    };
    for (const auto& [sec, kinds] : table) {
        if (section != sec) continue;
        for (FamilyKind k : kinds) {
            if (family_name(k) != name) continue;
            CoefficientFamily fam;
            fam.kind = k;
            const auto names = family_param_names(k);
            for (std::size_t i = 0; i < names.size(); ++i) {
                fam.values[i] = cfg.require_number(section, std::string(names[i]));
            }
            for (const auto& key : cfg.keys(section)) {
                bool known = key == "family";
                for (auto n : names) known = known || key == n;
                if (!known) {
                    throw std::invalid_argument("unknown key '" + section + "." + key +
                                                "' for family '" + name + "'");
                }
            }
            return fam;
        }
    }
    throw std::invalid_argument("unknown family '" + name + "' for " + section);
}

}  // namespace

ModelSpec build_model(const ConfigDocument& cfg) {
    ModelSpec m;
    m.sigma = cfg.has_section("sigma") ? read_family(cfg, "sigma")
                                       : CoefficientFamily::sigma_constant(1.0);
    m.alpha = read_family(cfg, "alpha");
    m.mu = cfg.has_section("mu") ? read_family(cfg, "mu") : CoefficientFamily::mu_zero();
    m.rho = cfg.number_or("model", "rho", 0.0);
    m.lambda = cfg.number_or("model", "lambda", 0.0);
    m.x0 = cfg.number_or("model", "x0", 0.0);
    m.y0 = cfg.require_number("model", "y0");
    for (const auto& key : cfg.keys("model")) {
        if (key != "rho" && key != "lambda" && key != "x0" && key != "y0") {
            throw std::invalid_argument("unknown key 'model." + key + "'");
        }
    }
    validate_model(m);
    return m;
}

ModelSpec load_model(const std::string& path) { return build_model(ConfigDocument::load(path)); }

std::string model_to_config(const ModelSpec& m) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "[model]\nrho = " << m.rho << "\nlambda = " << m.lambda << "\nx0 = " << m.x0
        << "\ny0 = " << m.y0 << "\n";
    auto emit = [&](const char* section, const CoefficientFamily& f) {
        out << "\n[" << section << "]\nfamily = " << family_name(f.kind) << "\n";
        const auto names = family_param_names(f.kind);
        for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << " = " << f.values[i] << "\n";
    };
    emit("sigma", m.sigma);
    emit("alpha", m.alpha);
    emit("mu", m.mu);
    return out.str();
}

}  // namespace lsv
