#pragma once

#include <vector>

#include "lsv/heatkernel.hpp"

namespace lsv {

struct CallAsymptote {
    double K = 0.0;
    double t = 0.0;
    double intrinsic = 0.0;
    double leading_term = 0.0;  // A_SV / sqrt(2 pi) exp(-phi*/t) t^{3/2}
    double A_SV = 0.0;          // includes the default factor exp(lambda d / y1*)
    double phi_star = 0.0;
};

/// Small-time call asymptote E(S_t - K)^+ - (S_0 - K)^+.
CallAsymptote call_asymptote(const ModelSpec& model, double K, double t);

/// Intrinsic value plus the t^{3/2} term of the Black-Scholes price at vol sqrt(sigma^2 + a t).
double bs_timedep_asymptote(double S0, double K, double t, double sigma, double a);

struct SmilePoint {
    double x = 0.0;       // log-moneyness x1 - x0
    double sigma0 = 0.0;  // leading implied vol |x| / d
    double a = 0.0;       // O(t) correction, vol^2 per unit time
    double a_jump = 0.0;  // a + 2 lambda sigma0^4 d / (x^2 y1*)
    double sigma_t = 0.0;       // sqrt(sigma0^2 + a t); NaN when the radicand is <= 0
    double sigma_t_jump = 0.0;  // sqrt(sigma0^2 + a_jump t); NaN when the radicand is <= 0
    double dsigma_jump = 0.0;   // lambda sigma0^2 t / (|x| y1*)
    double d = 0.0;
    double y1_star = 0.0;
    double A_SV = 0.0;  // without the default factor
    bool valid() const;
};

enum class SmileMethod {
    automatic,    // closed forms for SABR, geometric pipeline otherwise
    closed_form,  // SABR only
    generic,      // geodesic + heat-kernel pipeline for any model
};

/// One point of the two-term implied-vol expansion sigma_t^2 = sigma0^2 + a t.
SmilePoint smile_point(const ModelSpec& model, double x1, double t,
                       SmileMethod method = SmileMethod::automatic);

/// Smile over log-moneyness points, evaluated in parallel with output in input order.
/// threads = 0 uses LSV_SMILE_THREADS or the hardware concurrency.
std::vector<SmilePoint> smile(const ModelSpec& model, const std::vector<double>& xs, double t,
                              SmileMethod method = SmileMethod::automatic, unsigned threads = 0);

/// Leading small-time OTM put value with default, lambda K t (S0 = 1).
double otm_put_leading(double lambda, double K, double t);

/// Two-term small-time implied variance of an OTM put under jump-to-default.
double put_smile_smalltime(double lambda, double K, double x, double t);

/// log(A_SV / A_BS) for SABR as a function of u = nu x / y0.
double sabr_log_ratio(double u);

}  // namespace lsv
