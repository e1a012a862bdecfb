#include <cmath>
#include <vector>

#include "lsv/mc_kernels.hpp"
#include "philox_common.hpp"

namespace lsv::simd {

using namespace detail;

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

void normals_scalar(std::uint64_t seed, std::uint64_t first, std::uint32_t step, std::size_t n,
                    double* z1, double* z2) {
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                           static_cast<std::uint32_t>(seed >> 32)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t idx = first + i;
        const auto w = philox4x32(
            {static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32), step, 0u}, key);
        const double u1 = 2.0 - unit_interval_12(w[0], w[1]);  // (0, 1]
        const double u2 = unit_interval_12(w[2], w[3]) - 1.0;  // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        z1[i] = r * std::cos(kTwoPi * u2);
        z2[i] = r * std::sin(kTwoPi * u2);
    }
}

void simulate_block_scalar(const PathParams& prm, std::uint64_t first, std::size_t n, double* x_out) {
    std::vector<double> X(n, prm.x0), L(n, std::log(prm.y0));
    std::vector<double> N1(n), N2(n), g1(kBlock), g2(kBlock);
    const double sdt = std::sqrt(prm.dt);
    const bool anti = prm.antithetic;
    const std::uint64_t c_first = anti ? first / 2 : first;
    const std::size_t c_count = anti ? (first + n + 1) / 2 - first / 2 : n;
    for (int step = 0; step < prm.steps; ++step) {
        normals_scalar(prm.seed, c_first, static_cast<std::uint32_t>(step), c_count, g1.data(), g2.data());
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t path = first + i;
            const std::size_t c = anti ? path / 2 - c_first : i;
            const double sgn = anti && (path & 1u) ? -1.0 : 1.0;
            N1[i] = sgn * g1[c];
            N2[i] = sgn * g2[c];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double Y = std::exp(L[i]);
            const double aY = prm.p == 1.0 ? prm.nu : prm.nu * std::exp((prm.p - 1.0) * L[i]);
            double muY = 0.0;
            if (prm.mu_kind == 1) {
                muY = -prm.mu_b + (prm.mu_a + prm.mu_b) / (1.0 + Y * Y);
            } else if (prm.mu_kind == 2) {
                muY = 0.5 * (prm.p - 1.0) * aY * aY - prm.mu_a * Y * aY;
            }
            double s = prm.sigma0;
            if (prm.sigma_logistic) {
                s += prm.sigma_amp / (1.0 + std::exp(-prm.sigma_slope * (X[i] - prm.sigma_center)));
            }
            const double sY = s * Y;
            X[i] += (prm.lambda - 0.5 * sY * sY) * prm.dt +
                    sY * sdt * (prm.rho * N2[i] + prm.rho_bar * N1[i]);
            L[i] += (muY - 0.5 * aY * aY) * prm.dt + aY * sdt * N2[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) x_out[i] = X[i];
}

}  // namespace lsv::simd
