#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "lsv/asymptotics.hpp"
#include "lsv/numerics.hpp"
#include "lsv/pricing_oracle.hpp"

using namespace lsv;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const std::vector<double> kGrid{0.04, 0.08, 0.12, 0.16, 0.2};

ModelSpec rich_model() {
    ModelSpec m = ModelSpec::sabr(0.25);
    m.sigma = CoefficientFamily::sigma_logistic(0.6, 1.4, 2.0, 0.05);
    m.alpha = CoefficientFamily::alpha_power(0.9, 0.7);
    m.mu = CoefficientFamily::mu_rational(0.1, 0.3);
    return m;
}

// Independent evaluation of the SABR smile: distance from the hyperbolic closed form and
// log(A_SV / A_BS) straight from its definition, no series.
struct Direct {
    double sigma0, a;
};
Direct sabr_direct(double x, double y0) {
    const double d = std::asinh(x / y0);
    const double Y = std::sqrt(x * x + y0 * y0);
    const double s = x / d;
    const double A_SV = std::exp(0.5 * x) * std::sqrt(y0 * Y) / (d * d);
    const double A_BS = std::exp(0.5 * x) * s * s * s / (x * x);
    return {s, 2 * std::pow(s, 4) / (x * x) * std::log(A_SV / A_BS)};
}

}  // namespace

TEST_CASE("SABR smile level and correction") {
    const double sigma_ref[] = {0.201319, 0.20511, 0.210961, 0.21838, 0.226919};
    const double a_ref[] = {0.00664065, 0.00656944, 0.00646856, 0.00635304, 0.00623259};
    const double corr_ref[] = {0.202961, 0.206705, 0.212489, 0.21983, 0.228288};
    const ModelSpec m = ModelSpec::sabr(0.2);
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
        const double x = kGrid[i];
        const SmilePoint c = smile_point(m, x, 0.1, SmileMethod::closed_form);
        const SmilePoint g = smile_point(m, x, 0.1, SmileMethod::generic);
        const Direct o = sabr_direct(x, 0.2);
        CHECK(std::abs(c.sigma0 - sigma_ref[i]) < 2e-6);
        CHECK(std::abs(g.sigma0 - sigma_ref[i]) < 1e-4);
        CHECK(std::abs(c.a - a_ref[i]) < 5e-6);
        CHECK(std::abs(g.a - a_ref[i]) < 2e-5);
        CHECK(std::abs(c.sigma_t - corr_ref[i]) < 2e-5);
        CHECK(rel(c.sigma0, o.sigma0) < 1e-14);
        CHECK(rel(c.a, o.a) < 1e-9);
        CHECK(rel(g.a, o.a) < 1e-5);
        CHECK(c.sigma_t * c.sigma_t == doctest::Approx(c.sigma0 * c.sigma0 + c.a * 0.1).epsilon(1e-15));
    }
}

TEST_CASE("near-the-money correction tends to y0^2/6") {
    const ModelSpec m = ModelSpec::sabr(0.2);
    // the tabulated 0.00670034 at x = 1e-4 is not what the formula gives
    const SmilePoint p = smile_point(m, 1e-4, 0.1);
    CHECK(std::abs(p.a - 0.04 / 6) < 1e-9);
    CHECK(std::abs(p.a - 0.00670034) > 3e-5);
    CHECK(std::abs(smile_point(m, 1e-6, 0.1).sigma0 - 0.2) < 1e-9);
    // series and direct log-ratio agree across the switch
    for (double u : {0.049, 0.0501, 0.03, 0.2}) {
        const double direct = std::log(std::asinh(u) / u) + 0.25 * std::log1p(u * u);
        CHECK(std::abs(sabr_log_ratio(u) - direct) < 1e-15);
    }
    CHECK_THROWS_AS(smile_point(m, 5e-7, 0.1), std::invalid_argument);
}

TEST_CASE("generic small-x correction stays smooth") {
    const ModelSpec m = rich_model();
    const double h = 1e-3;
    // a is smooth through x = 0: the interpolated value must sit on the curve through
    // directly evaluated points outside the window
    const double nodes[] = {-3 * h, -2 * h, 2 * h, 3 * h};
    double vals[4];
    for (int i = 0; i < 4; ++i) vals[i] = smile_point(m, nodes[i], 0.1).a;
    for (double x : {0.3 * h, -0.7 * h}) {
        CHECK(rel(smile_point(m, x, 0.1).a, numerics::lagrange(nodes, vals, 4, x)) < 1e-8);
    }
    CHECK(std::abs(smile_point(m, 1e-6, 0.1).sigma0 - m.sigma_at(0).v * m.y0) < 1e-6);
}

TEST_CASE("A_SV collapses to the SABR closed form") {
    const ModelSpec m = ModelSpec::sabr(0.2);
    for (double x : {0.2, 0.05, -0.3}) {
        const CallAsymptote c = call_asymptote(m, std::exp(x), 0.1);
        const SabrReference r = sabr_reference(x, 0.2);
        CHECK(rel(c.A_SV, r.A_SV) < 1e-8);
        CHECK(rel(c.phi_star, 0.5 * r.d * r.d) < 1e-10);
    }
    const CallAsymptote c = call_asymptote(m, std::exp(0.2), 0.1);
    CHECK(rel(c.A_SV, 0.33837391786202) < 1e-8);
    const double lead = c.A_SV / std::sqrt(2 * 3.14159265358979323846) * std::exp(-c.phi_star / 0.1) *
                        std::pow(0.1, 1.5);
    CHECK(rel(c.leading_term, lead) < 1e-14);
    CHECK(c.intrinsic == 0.0);
    CHECK_THROWS_AS(call_asymptote(m, 1.0, 0.1), std::invalid_argument);

    ModelSpec j = m;
    j.lambda = 0.02;
    const CallAsymptote cj = call_asymptote(j, std::exp(0.2), 0.1);
    CHECK(rel(cj.A_SV / c.A_SV, std::exp(0.02 * std::asinh(1.0) / std::sqrt(0.08))) < 1e-9);
}

TEST_CASE("call asymptote matches the Black-Scholes expansion") {
    for (const ModelSpec& m : {ModelSpec::sabr(0.2), rich_model()}) {
        for (double x : {0.15, -0.2}) {
            const double K = std::exp(m.x0 + x), t = 0.05;
            const CallAsymptote c = call_asymptote(m, K, t);
            const SmilePoint p = smile_point(m, std::log(K), t, SmileMethod::generic);
            const double bs = bs_timedep_asymptote(std::exp(m.x0), K, t, p.sigma0, p.a);
            // in the money the intrinsic value dominates, so compare on the price scale
            CHECK(std::abs(bs - c.intrinsic - c.leading_term) < 1e-12 * std::max(c.leading_term, c.intrinsic));
            // A_SV = A_BS exp(a x^2 / (2 sigma^4))
            const double A_BS = K * std::exp(-0.5 * p.x) * std::pow(p.sigma0, 3) / (p.x * p.x);
            CHECK(rel(p.A_SV, A_BS * std::exp(0.5 * p.a * p.x * p.x / std::pow(p.sigma0, 4))) < 1e-12);
        }
    }
}

TEST_CASE("Black-Scholes expansion") {
    const double K = std::exp(0.2);
    const double coef = (bs_timedep_asymptote(1, K, 1.0, 0.2, 0.0)) / std::exp(-0.04 / 0.08);
    CHECK(rel(coef * std::sqrt(2 * 3.14159265358979323846), std::exp(0.1) * 0.2) < 1e-14);
    CHECK(std::abs(std::exp(0.1) * 0.2 - 0.221034) < 1e-6);

    // remainder against the exact price at vol sqrt(sigma^2 + a t) is O(t^{5/2})
    for (double a : {0.0, 0.006, -0.01}) {
        std::vector<double> err;
        const std::vector<double> ts{0.1, 0.05, 0.025};
        for (double t : ts) {
            const double exact = bs_price(1, K, t, std::sqrt(0.04 + a * t));
            const double e = std::abs(exact - bs_timedep_asymptote(1, K, t, 0.2, a));
            // strip the common exponential so the slope reads the power of t
            err.push_back(e / std::exp(-0.04 / (2 * 0.04 * t)));
        }
        // least-squares slope over the three maturities (equally spaced in log t); the
        // pairwise slopes rise towards 5/2 as t shrinks
        const double s01 = std::log(err[0] / err[1]) / std::log(ts[0] / ts[1]);
        const double s12 = std::log(err[1] / err[2]) / std::log(ts[1] / ts[2]);
        CHECK(std::log(err[0] / err[2]) / std::log(ts[0] / ts[2]) >= 2.3);
        CHECK(s12 > s01);
        CHECK(s12 < 2.5);
    }
    CHECK_THROWS_AS(bs_timedep_asymptote(1, 1, 0.1, 0.2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(bs_timedep_asymptote(1, K, 5.0, 0.2, -0.01), std::invalid_argument);
}

TEST_CASE("jump-to-default adjustments") {
    ModelSpec m = ModelSpec::sabr(0.2);
    m.lambda = 0.02;
    double prev = 0.0;
    for (double x : {0.1, 0.01, 0.001}) {
        const SmilePoint p = smile_point(m, x, 0.1);
        const double gap = p.a_jump - p.a;
        CHECK(gap == 2 * m.lambda * std::pow(p.sigma0, 4) * p.d / (x * x * p.y1_star));
        CHECK(gap > prev);
        prev = gap;
    }
    CHECK(prev > 1.0);

    const SmilePoint p = smile_point(m, 0.2, 0.1);
    CHECK(std::abs(p.dsigma_jump - 1.8205e-3) < 1e-6);
    for (double lam : {0.01, 0.02, 0.05}) {
        for (double t : {0.01, 0.05, 0.1}) {
            ModelSpec a = m, b = m;
            a.lambda = lam;
            b.lambda = lam * 1.5;
            CHECK(smile_point(b, 0.2, t).dsigma_jump > smile_point(a, 0.2, t).dsigma_jump);
            CHECK(smile_point(a, 0.2, t * 1.5).dsigma_jump > smile_point(a, 0.2, t).dsigma_jump);
        }
    }
}

TEST_CASE("negative radicand flags the point") {
    ModelSpec m = ModelSpec::sabr(0.2, 3.0);
    const SmilePoint p = smile_point(m, 1.5, 50.0);
    if (p.a < 0) {
        CHECK(std::isnan(p.sigma_t));
        CHECK_FALSE(p.valid());
    }
    CHECK(smile_point(m, 0.2, 0.1).valid());
}

TEST_CASE("OTM put under default") {
    CHECK(otm_put_leading(0.02, 0.9, 0.01) == doctest::Approx(1.8e-4).epsilon(1e-12));
    CHECK(otm_put_leading(0.0, 0.9, 0.01) == 0.0);
    CHECK_THROWS_AS(otm_put_leading(0.02, 1.1, 0.01), std::invalid_argument);

    const double L = std::log(100.0);
    const double v = put_smile_smalltime(0.02, 0.8, -0.2, 0.01);
    CHECK(std::abs(0.5 * 0.04 / (0.01 * L) - 0.434295) < 1e-6);
    const double V1 = v / (0.5 * 0.04 / (0.01 * L)) - 1;
    CHECK(rel(V1, std::log(4 * std::sqrt(3.14159265358979323846) * 0.016 * std::exp(0.1) *
                           std::pow(L, 1.5) / 0.2) / L) < 1e-12);
    // V1 shrinks as t -> 0
    double prev = 1e300;
    for (double t : {1e-5, 1e-7, 1e-9, 1e-12}) {
        const double lead = 0.5 * 0.04 / (t * std::log(1 / t));
        const double v1 = std::abs(put_smile_smalltime(0.02, 0.8, -0.2, t) / lead - 1);
        CHECK(v1 < prev);
        prev = v1;
    }
    CHECK_THROWS_AS(put_smile_smalltime(0.0, 0.8, -0.2, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(put_smile_smalltime(0.02, 0.8, -0.2, 0.5), std::invalid_argument);
}

TEST_CASE("parallel smile matches the serial one") {
    const ModelSpec m = rich_model();
    const std::vector<double> xs{-0.3, -0.1, 0.05, 0.2, 0.4};
    const auto serial = smile(m, xs, 0.1, SmileMethod::automatic, 1);
    const auto parallel = smile(m, xs, 0.1, SmileMethod::automatic, 4);
    setenv("LSV_SMILE_THREADS", "2", 1);
    const auto capped = smile(m, xs, 0.1);
    unsetenv("LSV_SMILE_THREADS");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(serial[i].x == xs[i]);
        CHECK(serial[i].a == parallel[i].a);
        CHECK(serial[i].sigma0 == capped[i].sigma0);
    }
    CHECK(smile(m, {}, 0.1).empty());
    CHECK_THROWS_AS(smile(m, {0.1, 0.0}, 0.1), std::invalid_argument);
}
