#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace lsv::simd {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Model coefficients lowered to the forms the path kernels evaluate.
struct PathParams {
    bool sigma_logistic = false;
    double sigma0 = 1.0;  // constant sigma, or the logistic lower level
    double sigma_amp = 0.0;
    double sigma_slope = 0.0;
    double sigma_center = 0.0;
    double nu = 1.0;
    double p = 1.0;
    int mu_kind = 0;  // 0 zero, 1 rational (mu0, kappa), 2 prop45 (c)
    double mu_a = 0.0;
    double mu_b = 0.0;
    double rho = 0.0;
    double rho_bar = 1.0;
    double lambda = 0.0;
    double x0 = 0.0;
    double y0 = 0.2;
    double dt = 0.0;
    int steps = 0;
    std::uint64_t seed = 0;
    bool antithetic = true;
};

/// Terminal log-prices for paths [first, first + n). Paths sharing a Philox
/// counter (antithetic pairs) use the same normals with opposite signs.
/// n <= kBlock; scratch-free (uses stack-sized buffers of kBlock doubles).
constexpr std::size_t kBlock = 4096;

void simulate_block_scalar(const PathParams& prm, std::uint64_t first, std::size_t n, double* x_out);
void simulate_block_avx2(const PathParams& prm, std::uint64_t first, std::size_t n, double* x_out);

/// Standard-normal pair generation for counter indices [first, first + n) at one step.
void normals_scalar(std::uint64_t seed, std::uint64_t first, std::uint32_t step, std::size_t n,
                    double* z1, double* z2);
void normals_avx2(std::uint64_t seed, std::uint64_t first, std::uint32_t step, std::size_t n,
                  double* z1, double* z2);

/// Elementwise vector math used by the AVX2 kernels (exposed for equivalence tests).
void exp_avx2(const double* in, double* out, std::size_t n);
void log_avx2(const double* in, double* out, std::size_t n);
/// sin and cos of 2 pi u.
void sincos2pi_avx2(const double* u, double* s, double* c, std::size_t n);

enum class KernelIsa { scalar, avx2 };

bool avx2_supported();
/// Kernel selected at runtime: AVX2 when the CPU has AVX2 and FMA, unless
/// LSV_FORCE_SCALAR is set in the environment or a preference is forced.
KernelIsa active_isa();
void force_isa(KernelIsa isa);
void clear_forced_isa();
const char* isa_name(KernelIsa isa);

void simulate_block(const PathParams& prm, std::uint64_t first, std::size_t n, double* x_out);

}  // namespace lsv::simd
