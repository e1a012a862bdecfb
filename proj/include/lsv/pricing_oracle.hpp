#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lsv/mc_kernels.hpp"
#include "lsv/model.hpp"

namespace lsv {

double norm_cdf(double z);

/// Black-Scholes call with zero rates and dividends.
double bs_price(double S0, double K, double t, double sigma);
double bs_put(double S0, double K, double t, double sigma);

/// Implied vol of a call price in ((S0 - K)^+, S0). Bisection to a bracket,
/// then Newton; the result reprices to within 1e-12 S0.
double implied_vol(double price, double S0, double K, double t);

struct MCConfig {
    std::int64_t paths = 200000;  // >= 1e4; even when antithetic
    int steps = 100;              // >= 16
    std::uint64_t seed = 1234567;
    bool antithetic = true;
    unsigned threads = 0;  // 0 = hardware concurrency
};

struct MCEstimate {
    double K = 0.0;
    double price = 0.0;
    double std_error = 0.0;
    std::optional<double> implied_vol;  // present iff price lies in (intrinsic, S0)
};

/// Lowers a model to the coefficient forms the path kernels evaluate.
simd::PathParams path_params(const ModelSpec& model, double t, const MCConfig& config);

/// Call prices on a strike grid from one set of log-Euler paths. Default is
/// handled by the compensator drift lambda and the discount exp(-lambda t).
std::vector<MCEstimate> mc_prices(const ModelSpec& model, const std::vector<double>& strikes,
                                  double t, const MCConfig& config);
MCEstimate mc_price(const ModelSpec& model, double K, double t, const MCConfig& config);

/// Put from the call estimate by parity P = C - S0 + K (same standard error).
MCEstimate mc_put_parity(const ModelSpec& model, double K, double t, const MCConfig& config);

/// E[S_t] including default (should equal S0).
MCEstimate mc_forward(const ModelSpec& model, double t, const MCConfig& config);

}  // namespace lsv
