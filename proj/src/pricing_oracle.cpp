#include "lsv/pricing_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lsv/numerics.hpp"

namespace lsv {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

double vega(double S0, double K, double t, double sigma) {
    const double st = sigma * std::sqrt(t);
    const double d1 = (std::log(S0 / K) + 0.5 * st * st) / st;
    return S0 * kInvSqrt2Pi * std::exp(-0.5 * d1 * d1) * std::sqrt(t);
}

void validate_config(const MCConfig& c) {
    if (c.paths < 10000) throw std::invalid_argument("mc: paths must be >= 10000");
    if (c.steps < 16) throw std::invalid_argument("mc: steps must be >= 16");
    if (c.antithetic && c.paths % 2 != 0) {
        throw std::invalid_argument("mc: paths must be even with antithetic pairs");
    }
}

// Payoff functionals evaluated on terminal X. Column j < strikes: call (S - K)^+;
// the last column is S itself.
struct BlockSums {
    std::vector<double> sum, sumsq;
};

}  // namespace

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double bs_price(double S0, double K, double t, double sigma) {
    require_positive(S0, "S0");
    require_positive(K, "K");
    if (!(t >= 0.0) || !(sigma >= 0.0)) throw std::invalid_argument("bs_price: t, sigma must be >= 0");
    const double st = sigma * std::sqrt(t);
    if (st == 0.0) return std::max(S0 - K, 0.0);
    const double d1 = (std::log(S0 / K) + 0.5 * st * st) / st;
    return S0 * norm_cdf(d1) - K * norm_cdf(d1 - st);
}

double bs_put(double S0, double K, double t, double sigma) {
    require_positive(S0, "S0");
    require_positive(K, "K");
    const double st = sigma * std::sqrt(t);
    if (st == 0.0) return std::max(K - S0, 0.0);
    const double d1 = (std::log(S0 / K) + 0.5 * st * st) / st;
    return K * norm_cdf(st - d1) - S0 * norm_cdf(-d1);
}

double implied_vol(double price, double S0, double K, double t) {
    require_positive(S0, "S0");
    require_positive(K, "K");
    require_positive(t, "t");
    const double lo_bound = std::max(S0 - K, 0.0);
    if (!(price > lo_bound && price < S0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "implied_vol: price " << price << " outside (" << lo_bound << ", " << S0 << ")";
        throw std::invalid_argument(msg.str());
    }
    const double tol = 1e-12 * S0;
    double lo = 0.0, hi = 1.0;
    while (bs_price(S0, K, t, hi) < price) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw NumericalError("implied_vol: no upper bracket below sigma = 1e6");
    }
    double sigma = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        const double f = bs_price(S0, K, t, sigma) - price;
        if (std::abs(f) < tol) return sigma;
        (f > 0.0 ? hi : lo) = sigma;
        // Newton once the bracket is tight enough for the step to stay inside it
        const double v = vega(S0, K, t, sigma);
        double next = v > 0.0 ? sigma - f / v : 0.5 * (lo + hi);
        if (!(next > lo && next < hi) || hi - lo > 0.5 * sigma) next = 0.5 * (lo + hi);
        sigma = next;
    }
    const double f = bs_price(S0, K, t, sigma) - price;
    if (std::abs(f) < tol) return sigma;
    std::ostringstream msg;
    msg.precision(17);
    msg << "implied_vol: no convergence, residual " << f << " at sigma " << sigma;
    throw NumericalError(msg.str());
}

simd::PathParams path_params(const ModelSpec& m, double t, const MCConfig& c) {
    simd::PathParams p;
    const auto& s = m.sigma.values;
    if (m.sigma.kind == FamilyKind::sigma_logistic) {
        p.sigma_logistic = true;
        p.sigma0 = s[0];
        p.sigma_amp = s[1] - s[0];
        p.sigma_slope = s[2];
        p.sigma_center = s[3];
    } else {
        p.sigma0 = s[0];
    }
    p.nu = m.alpha.values[0];
    p.p = m.alpha.values[1];
    switch (m.mu.kind) {
        case FamilyKind::mu_rational:
            p.mu_kind = 1;
            p.mu_a = m.mu.values[0];
            p.mu_b = m.mu.values[1];
            break;
        case FamilyKind::mu_prop45:
            p.mu_kind = 2;
            p.mu_a = m.mu.values[0];
            break;
        default: p.mu_kind = 0;
    }
    p.rho = m.rho;
    p.rho_bar = m.rho_bar();
    p.lambda = m.lambda;
    p.x0 = m.x0;
    p.y0 = m.y0;
    p.steps = c.steps;
    p.dt = t / c.steps;
    p.seed = c.seed;
    p.antithetic = c.antithetic;
    return p;
}

std::vector<MCEstimate> mc_prices(const ModelSpec& m, const std::vector<double>& strikes, double t,
                                  const MCConfig& c) {
    validate_model(m);
    validate_config(c);
    require_positive(t, "t");
    for (double K : strikes) require_positive(K, "K");
    const simd::PathParams prm = path_params(m, t, c);
    const std::size_t ncol = strikes.size() + 1;
    const auto paths = static_cast<std::uint64_t>(c.paths);
    const std::uint64_t nblocks = (paths + simd::kBlock - 1) / simd::kBlock;
    std::vector<BlockSums> blocks(nblocks);
    std::vector<std::exception_ptr> errors(nblocks);

    unsigned threads = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, nblocks));
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        std::vector<double> x(simd::kBlock), payoff(ncol);
        for (std::uint64_t b = next++; b < nblocks; b = next++) {
            try {
                const std::uint64_t first = b * simd::kBlock;
                const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(simd::kBlock, paths - first));
                simd::simulate_block(prm, first, n, x.data());
                BlockSums& out = blocks[b];
                out.sum.assign(ncol, 0.0);
                out.sumsq.assign(ncol, 0.0);
                // antithetic pairs are averaged into one sample
                const std::size_t stride = c.antithetic ? 2 : 1;
                for (std::size_t i = 0; i < n; i += stride) {
                    std::fill(payoff.begin(), payoff.end(), 0.0);
                    for (std::size_t k = 0; k < stride; ++k) {
                        if (!std::isfinite(x[i + k])) {
                            std::ostringstream msg;
                            msg << "mc: non-finite log-price on path " << first + i + k
                                << " (dt = " << prm.dt << ", steps = " << prm.steps << ")";
                            throw NumericalError(msg.str());
                        }
                        const double S = std::exp(x[i + k]);
                        for (std::size_t j = 0; j < strikes.size(); ++j) {
                            payoff[j] += std::max(S - strikes[j], 0.0);
                        }
                        payoff[ncol - 1] += S;
                    }
                    for (std::size_t j = 0; j < ncol; ++j) {
                        const double v = payoff[j] / static_cast<double>(stride);
                        out.sum[j] += v;
                        out.sumsq[j] += v * v;
                    }
                }
            } catch (...) {
                errors[b] = std::current_exception();
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

    // reduction in block order keeps results independent of the thread count
    std::vector<double> sum(ncol, 0.0), sumsq(ncol, 0.0);
    for (const auto& b : blocks) {
        for (std::size_t j = 0; j < ncol; ++j) {
            sum[j] += b.sum[j];
            sumsq[j] += b.sumsq[j];
        }
    }
    const double n = static_cast<double>(c.antithetic ? paths / 2 : paths);
    const double disc = std::exp(-m.lambda * t);
    const double S0 = std::exp(m.x0);
    std::vector<MCEstimate> out(ncol);
    for (std::size_t j = 0; j < ncol; ++j) {
        const double mean = sum[j] / n;
        const double var = std::max(sumsq[j] / n - mean * mean, 0.0) * n / (n - 1.0);
        MCEstimate& e = out[j];
        e.K = j + 1 < ncol ? strikes[j] : 0.0;
        e.price = disc * mean;
        e.std_error = disc * std::sqrt(var / n);
        if (j + 1 < ncol && e.price > std::max(S0 - e.K, 0.0) && e.price < S0) {
            try {
                e.implied_vol = implied_vol(e.price, S0, e.K, t);
            } catch (const NumericalError&) {
            }
        }
    }
    return out;
}

MCEstimate mc_price(const ModelSpec& m, double K, double t, const MCConfig& c) {
    return mc_prices(m, {K}, t, c).front();
}

MCEstimate mc_put_parity(const ModelSpec& m, double K, double t, const MCConfig& c) {
    MCEstimate call = mc_price(m, K, t, c);
    MCEstimate put;
    put.K = K;
    put.price = call.price - std::exp(m.x0) + K;
    put.std_error = call.std_error;
    return put;
}

MCEstimate mc_forward(const ModelSpec& m, double t, const MCConfig& c) {
    return mc_prices(m, {}, t, c).back();
}

}  // namespace lsv
