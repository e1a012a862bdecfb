#include "lsv/asymptotics.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "lsv/numerics.hpp"

namespace lsv {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAtmGuard = 1e-6;
// below this the generic log-ratio is interpolated from nodes at +-k kSmallX, k = 1..4
constexpr double kSmallX = 1e-3;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require_otm(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("log-moneyness must be finite");
    if (std::abs(x) < kAtmGuard) {
        std::ostringstream msg;
        msg << "log-moneyness |x| = " << std::abs(x) << " < 1e-6: at-the-money is not covered";
        throw std::invalid_argument(msg.str());
    }
}

double root_or_nan(double v) { return v > 0.0 ? std::sqrt(v) : kNan; }

struct Core {
    double sigma0 = 0, a = 0, d = 0, y1_star = 0, A_SV = 0;
};

// A_SV = K sigma(x1)^2 psi / sqrt(phi'') / d^2 from the geometric pipeline
Core generic_core(const ModelSpec& m, double x1) {
    const LineGeodesic geo = solve_line_geodesic(m, x1);
    const KernelFactors k = kernel_factors(m, geo);
    const double x = x1 - m.x0;
    const double s1 = m.sigma_at(x1).v;
    Core c;
    c.d = geo.d;
    c.y1_star = geo.y1_star;
    c.sigma0 = std::abs(x) / geo.d;
    c.A_SV = std::exp(x1) * s1 * s1 * k.psi / std::sqrt(k.phi_second) / (geo.d * geo.d);
    const double A_BS = std::exp(x1) * std::exp(-0.5 * x) * std::pow(c.sigma0, 3) / (x * x);
    c.a = 2.0 * std::pow(c.sigma0, 4) / (x * x) * std::log(c.A_SV / A_BS);
    return c;
}

Core closed_core(const ModelSpec& m, double x1) {
    if (!m.is_sabr()) throw std::invalid_argument("closed-form smile needs a SABR model");
    const double s0 = m.sigma.values[0];
    const double nu = m.alpha.values[0];
    const double y0 = s0 * m.y0;  // sigma0 scales into the initial vol
    const double x = x1 - m.x0;
    const double u = nu * x / y0;
    const double D = std::asinh(std::abs(u));
    Core c;
    c.d = D / nu;
    const double Y = y0 * std::sqrt(1.0 + u * u);
    c.y1_star = Y / s0;
    c.sigma0 = std::abs(x) / c.d;
    c.A_SV = std::exp(x1) * std::exp(-0.5 * x) * std::sqrt(y0 * Y) / (c.d * c.d);
    c.a = 2.0 * std::pow(c.sigma0, 4) / (x * x) * sabr_log_ratio(u);
    return c;
}

}  // namespace

double sabr_log_ratio(double u) {
    const double v = u * u;
    if (std::abs(u) < 0.05) {
        return v * (1.0 / 12 + v * (-23.0 / 360 + v * (563.0 / 11340 + v * (-9181.0 / 226800 +
                     v * (63961.0 / 1871100 - v * (453658561.0 / 15324309000.0))))));
    }
    const double au = std::abs(u);
    return std::log(std::asinh(au) / au) + 0.25 * std::log1p(v);
}

bool SmilePoint::valid() const { return std::isfinite(sigma_t); }

SmilePoint smile_point(const ModelSpec& m, double x1, double t, SmileMethod method) {
    const double x = x1 - m.x0;
    require_otm(x);
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be >= 0");
    const bool closed = method == SmileMethod::closed_form ||
                        (method == SmileMethod::automatic && m.is_sabr());
    Core c = closed ? closed_core(m, x1) : generic_core(m, x1);

    if (!closed) {
        const double h = kSmallX;
        if (std::abs(x) < h) {
            // the log-ratio is 0/0-balanced here; interpolate a(x) from well-conditioned nodes
            double xs[8], as[8];
            int n = 0;
            for (int k = -4; k <= 4; ++k) {
                if (k == 0) continue;
                xs[n] = k * h;
                as[n] = generic_core(m, m.x0 + k * h).a;
                ++n;
            }
            c.a = numerics::lagrange(xs, as, n, x);
        }
    }

    SmilePoint p;
    p.x = x;
    p.sigma0 = c.sigma0;
    p.a = c.a;
    p.d = c.d;
    p.y1_star = c.y1_star;
    p.A_SV = c.A_SV;
    const double s4 = std::pow(c.sigma0, 4);
    p.a_jump = c.a + 2.0 * m.lambda * s4 * c.d / (x * x * c.y1_star);
    p.dsigma_jump = m.lambda * c.sigma0 * c.sigma0 * t / (std::abs(x) * c.y1_star);
    p.sigma_t = root_or_nan(c.sigma0 * c.sigma0 + c.a * t);
    p.sigma_t_jump = root_or_nan(c.sigma0 * c.sigma0 + p.a_jump * t);
    return p;
}

std::vector<SmilePoint> smile(const ModelSpec& m, const std::vector<double>& xs, double t,
                              SmileMethod method, unsigned threads) {
    std::vector<SmilePoint> out(xs.size());
    if (xs.empty()) return out;
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("LSV_SMILE_THREADS")) {
            const long cap = std::strtol(env, nullptr, 10);
            if (cap > 0) threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
        }
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(xs.size()));
    std::vector<std::exception_ptr> errors(xs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < xs.size(); i = next++) {
            try {
                out[i] = smile_point(m, m.x0 + xs[i], t, method);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

CallAsymptote call_asymptote(const ModelSpec& m, double K, double t) {
    if (!(K > 0.0)) throw std::invalid_argument("strike must be > 0");
    if (!(t > 0.0)) throw std::invalid_argument("t must be > 0");
    const double x1 = std::log(K);
    require_otm(x1 - m.x0);
    const LineGeodesic geo = solve_line_geodesic(m, x1);
    const KernelFactors k = kernel_factors(m, geo);
    const double s1 = m.sigma_at(x1).v;
    const double jump = std::exp(m.lambda * geo.d / geo.y1_star);
    CallAsymptote c;
    c.K = K;
    c.t = t;
    c.intrinsic = std::max(std::exp(m.x0) - K, 0.0);
    c.phi_star = k.phi;
    c.A_SV = K * s1 * s1 * k.psi * jump / std::sqrt(k.phi_second) / (2.0 * k.phi);
    c.leading_term = c.A_SV / std::sqrt(2.0 * kPi) * std::exp(-c.phi_star / t) * std::pow(t, 1.5);
    return c;
}

double bs_timedep_asymptote(double S0, double K, double t, double sigma, double a) {
    if (!(S0 > 0.0) || !(K > 0.0) || !(t > 0.0) || !(sigma > 0.0)) {
        throw std::invalid_argument("bs_timedep_asymptote: S0, K, t, sigma must be > 0");
    }
    const double x = std::log(K / S0);
    if (x == 0.0) throw std::invalid_argument("bs_timedep_asymptote: x = 0");
    if (a < 0.0 && t >= sigma * sigma / -a) {
        throw std::invalid_argument("bs_timedep_asymptote: t >= sigma^2/|a| for a < 0");
    }
    const double s2 = sigma * sigma;
    return std::max(S0 - K, 0.0) + K * std::exp(-x * x / (2.0 * s2 * t)) / std::sqrt(2.0 * kPi) *
                                       std::exp(-0.5 * x) * std::exp(0.5 * a * x * x / (s2 * s2)) *
                                       s2 * sigma / (x * x) * std::pow(t, 1.5);
}

double otm_put_leading(double lambda, double K, double t) {
    if (!(K > 0.0) || K >= 1.0) throw std::invalid_argument("otm_put_leading: need 0 < K < S0 = 1");
    if (!(lambda >= 0.0)) throw std::invalid_argument("otm_put_leading: lambda must be >= 0");
    if (!(t > 0.0)) throw std::invalid_argument("otm_put_leading: t must be > 0");
    return lambda * K * t;
}

double put_smile_smalltime(double lambda, double K, double x, double t) {
    if (!(lambda > 0.0)) throw std::invalid_argument("put_smile_smalltime: lambda must be > 0");
    if (!(K > 0.0)) throw std::invalid_argument("put_smile_smalltime: K must be > 0");
    if (!(t > 0.0) || t >= std::exp(-1.0)) {
        throw std::invalid_argument("put_smile_smalltime: t must lie in (0, 1/e)");
    }
    if (x == 0.0 || !std::isfinite(x)) throw std::invalid_argument("put_smile_smalltime: x must be nonzero");
    const double L = std::log(1.0 / t);
    const double a0 = lambda * K;
    const double V1 = std::log(4.0 * std::sqrt(kPi) * a0 * std::exp(-0.5 * x) * std::pow(L, 1.5) /
                               std::abs(x)) / L;
    return 0.5 * x * x / (t * L) * (1.0 + V1);
}

}  // namespace lsv
