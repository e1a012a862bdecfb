// Compiled with -mavx2 -mfma; only entered after a runtime CPU check.
#include <immintrin.h>

#include <cmath>
#include <vector>

#include "lsv/mc_kernels.hpp"
#include "philox_common.hpp"

namespace lsv::simd {

using namespace detail;

namespace {

inline __m256d polevl(__m256d x, const double* c, int n) {
    __m256d r = _mm256_set1_pd(c[0]);
    for (int i = 1; i <= n; ++i) r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c[i]));
    return r;
}

// polynomial with implicit leading coefficient 1
inline __m256d p1evl(__m256d x, const double* c, int n) {
    __m256d r = _mm256_add_pd(x, _mm256_set1_pd(c[0]));
    for (int i = 1; i < n; ++i) r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c[i]));
    return r;
}

// Cephes exp: x = n ln2 + r, exp(r) by a Pade form, then scale by 2^n.
inline __m256d vexp(__m256d x) {
    static const double P[] = {1.26177193074810590878e-4, 3.02994407707441961300e-2,
                               9.99999999999999999910e-1};
    static const double Q[] = {3.00198505138664455042e-6, 2.52448340349684104192e-3,
                               2.27265548208155028766e-1, 2.00000000000000000009e0};
    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(709.0));
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    x = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125e-1), x);
    x = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212e-6), x);
    const __m256d xx = _mm256_mul_pd(x, x);
    const __m256d px = _mm256_mul_pd(x, polevl(xx, P, 2));
    const __m256d qx = polevl(xx, Q, 3);
    __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));
    // 2^n through the exponent field
    const __m256i ni = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

// Cephes log for positive normal inputs.
inline __m256d vlog(__m256d x) {
    static const double P[] = {1.01875663804580931796e-4, 4.97494994976747001425e-1,
                               4.70579119878881725854e0,  1.44989225341610930846e1,
                               1.79368678507819816313e1,  7.70838733755885391666e0};
    static const double Q[] = {1.12873587189167450590e1, 4.52279145837532221105e1,
                               8.29875266912776603211e1, 7.11544750618563894466e1,
                               2.31251620126765340583e1};
    // frexp: mantissa in [0.5, 1), exponent e
    const __m256i xi = _mm256_castpd_si256(x);
    const __m256i exp_field = _mm256_srli_epi64(xi, 52);
    const __m128i e32 = _mm256_castsi256_si128(
        _mm256_permutevar8x32_epi32(exp_field, _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0)));
    __m256d e = _mm256_sub_pd(_mm256_cvtepi32_pd(e32), _mm256_set1_pd(1022.0));
    const __m256i mant_bits =
        _mm256_or_si256(_mm256_and_si256(xi, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
                        _mm256_set1_epi64x(0x3FE0000000000000ll));
    __m256d m = _mm256_castsi256_pd(mant_bits);
    // if m < sqrt(1/2): e -= 1, m = 2m - 1; else m = m - 1
    const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
    m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), _mm256_set1_pd(1.0));
    const __m256d z = _mm256_mul_pd(m, m);
    __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, polevl(m, P, 5)), p1evl(m, Q, 5)));
    y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
    __m256d r = _mm256_add_pd(m, y);
    return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
}

// sin and cos of 2 pi u for u in [0, 1): exact quadrant reduction in u.
inline void vsincos2pi(__m256d u, __m256d& s_out, __m256d& c_out) {
    static const double S[] = {1.58962301576546568060e-10, -2.50507477628578072866e-8,
                               2.75573136213857245213e-6,  -1.98412698295895385996e-4,
                               8.33333333332211858878e-3,  -1.66666666666666307295e-1};
    static const double C[] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9,
                               -2.75573141792967388112e-7,  2.48015872888517045348e-5,
                               -1.38888888888730564116e-3,  4.16666666666665929218e-2};
    const __m256d q = _mm256_round_pd(_mm256_mul_pd(u, _mm256_set1_pd(4.0)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(0.25), u);  // exact
    const __m256d a = _mm256_mul_pd(r, _mm256_set1_pd(kTwoPi));     // |a| <= pi/4
    const __m256d z = _mm256_mul_pd(a, a);
    const __m256d sn = _mm256_fmadd_pd(_mm256_mul_pd(a, z), polevl(z, S, 5), a);
    __m256d cs = _mm256_mul_pd(_mm256_mul_pd(z, z), polevl(z, C, 5));
    cs = _mm256_add_pd(_mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, _mm256_set1_pd(1.0)), cs);
    // quadrant k = q mod 4
    const __m128i k = _mm_and_si128(_mm256_cvtpd_epi32(q), _mm_set1_epi32(3));
    const __m256i k64 = _mm256_cvtepi32_epi64(k);
    const __m256d swap = _mm256_castsi256_pd(
        _mm256_cmpeq_epi64(_mm256_and_si256(k64, _mm256_set1_epi64x(1)), _mm256_set1_epi64x(1)));
    // sign of sin: negative for k = 2, 3; sign of cos: negative for k = 1, 2
    const __m256d neg_s = _mm256_castsi256_pd(
        _mm256_cmpeq_epi64(_mm256_and_si256(k64, _mm256_set1_epi64x(2)), _mm256_set1_epi64x(2)));
    const __m256i k_plus = _mm256_add_epi64(k64, _mm256_set1_epi64x(1));
    const __m256d neg_c = _mm256_castsi256_pd(
        _mm256_cmpeq_epi64(_mm256_and_si256(k_plus, _mm256_set1_epi64x(2)), _mm256_set1_epi64x(2)));
    const __m256d s_base = _mm256_blendv_pd(sn, cs, swap);
    const __m256d c_base = _mm256_blendv_pd(cs, sn, swap);
    const __m256d sign = _mm256_set1_pd(-0.0);
    s_out = _mm256_xor_pd(s_base, _mm256_and_pd(neg_s, sign));
    c_out = _mm256_xor_pd(c_base, _mm256_and_pd(neg_c, sign));
}

// four Philox4x32-10 streams, one per 64-bit lane (low 32 bits used)
inline void vphilox(__m256i& c0, __m256i& c1, __m256i& c2, __m256i& c3, std::uint32_t k0,
                    std::uint32_t k1) {
    const __m256i lo_mask = _mm256_set1_epi64x(0xFFFFFFFFll);
    const __m256i m0 = _mm256_set1_epi64x(kM0);
    const __m256i m1 = _mm256_set1_epi64x(kM1);
    for (int r = 0; r < 10; ++r) {
        const __m256i p0 = _mm256_mul_epu32(c0, m0);
        const __m256i p1 = _mm256_mul_epu32(c2, m1);
        const __m256i key0 = _mm256_set1_epi64x(k0);
        const __m256i key1 = _mm256_set1_epi64x(k1);
        const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p1, 32), c1), key0);
        const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p0, 32), c3), key1);
        c1 = _mm256_and_si256(p1, lo_mask);
        c3 = _mm256_and_si256(p0, lo_mask);
        c0 = n0;
        c2 = n2;
        k0 += kW0;
        k1 += kW1;
    }
}

inline __m256d vunit_12(__m256i hi, __m256i lo) {
    const __m256i bits = _mm256_xor_si256(_mm256_slli_epi64(hi, 20), _mm256_srli_epi64(lo, 12));
    const __m256i pattern =
        _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
                        _mm256_set1_epi64x(0x3FF0000000000000ll));
    return _mm256_castsi256_pd(pattern);
}

}  // namespace

void exp_avx2(const double* in, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vexp(_mm256_loadu_pd(in + i)));
    for (; i < n; ++i) out[i] = std::exp(in[i]);
}

void log_avx2(const double* in, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vlog(_mm256_loadu_pd(in + i)));
    for (; i < n; ++i) out[i] = std::log(in[i]);
}

void sincos2pi_avx2(const double* u, double* s, double* c, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d sv, cv;
        vsincos2pi(_mm256_loadu_pd(u + i), sv, cv);
        _mm256_storeu_pd(s + i, sv);
        _mm256_storeu_pd(c + i, cv);
    }
    for (; i < n; ++i) {
        s[i] = std::sin(kTwoPi * u[i]);
        c[i] = std::cos(kTwoPi * u[i]);
    }
}

void normals_avx2(std::uint64_t seed, std::uint64_t first, std::uint32_t step, std::size_t n,
                  double* z1, double* z2) {
    const auto k0 = static_cast<std::uint32_t>(seed);
    const auto k1 = static_cast<std::uint32_t>(seed >> 32);
    const __m256i lo_mask = _mm256_set1_epi64x(0xFFFFFFFFll);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i idx = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first + i)),
                                             _mm256_setr_epi64x(0, 1, 2, 3));
        __m256i c0 = _mm256_and_si256(idx, lo_mask);
        __m256i c1 = _mm256_srli_epi64(idx, 32);
        __m256i c2 = _mm256_set1_epi64x(step);
        __m256i c3 = _mm256_setzero_si256();
        vphilox(c0, c1, c2, c3, k0, k1);
        const __m256d u1 = _mm256_sub_pd(_mm256_set1_pd(2.0), vunit_12(c0, c1));
        const __m256d u2 = _mm256_sub_pd(vunit_12(c2, c3), _mm256_set1_pd(1.0));
        const __m256d r = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), vlog(u1)));
        __m256d s, c;
        vsincos2pi(u2, s, c);
        _mm256_storeu_pd(z1 + i, _mm256_mul_pd(r, c));
        _mm256_storeu_pd(z2 + i, _mm256_mul_pd(r, s));
    }
    if (i < n) normals_scalar(seed, first + i, step, n - i, z1 + i, z2 + i);
}

void simulate_block_avx2(const PathParams& prm, std::uint64_t first, std::size_t n, double* x_out) {
    const std::size_t padded = (n + 3) & ~std::size_t{3};
    std::vector<double> X(padded, prm.x0), L(padded, std::log(prm.y0));
    std::vector<double> N1(padded, 0.0), N2(padded, 0.0), g1(kBlock + 4), g2(kBlock + 4);
    const double sdt = std::sqrt(prm.dt);
    const bool anti = prm.antithetic;
    const std::uint64_t c_first = anti ? first / 2 : first;
    const std::size_t c_count = anti ? (first + n + 1) / 2 - first / 2 : n;

    const __m256d dt = _mm256_set1_pd(prm.dt);
    const __m256d vsdt = _mm256_set1_pd(sdt);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d nu = _mm256_set1_pd(prm.nu);
    const __m256d pm1 = _mm256_set1_pd(prm.p - 1.0);
    const __m256d lam = _mm256_set1_pd(prm.lambda);
    const __m256d rho = _mm256_set1_pd(prm.rho);
    const __m256d rho_bar = _mm256_set1_pd(prm.rho_bar);
    const __m256d s0 = _mm256_set1_pd(prm.sigma0);
    const __m256d s_amp = _mm256_set1_pd(prm.sigma_amp);
    const __m256d s_neg_slope = _mm256_set1_pd(-prm.sigma_slope);
    const __m256d s_center = _mm256_set1_pd(prm.sigma_center);
    const __m256d mu_a = _mm256_set1_pd(prm.mu_a);
    const __m256d mu_b = _mm256_set1_pd(prm.mu_b);

    for (int step = 0; step < prm.steps; ++step) {
        normals_avx2(prm.seed, c_first, static_cast<std::uint32_t>(step), c_count, g1.data(), g2.data());
        if (anti) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::uint64_t path = first + i;
                const std::size_t c = path / 2 - c_first;
                const double sgn = (path & 1u) ? -1.0 : 1.0;
                N1[i] = sgn * g1[c];
                N2[i] = sgn * g2[c];
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                N1[i] = g1[i];
                N2[i] = g2[i];
            }
        }
        for (std::size_t i = 0; i < padded; i += 4) {
            const __m256d l = _mm256_loadu_pd(&L[i]);
            const __m256d x = _mm256_loadu_pd(&X[i]);
            const __m256d z1 = _mm256_loadu_pd(&N1[i]);
            const __m256d z2 = _mm256_loadu_pd(&N2[i]);
            const __m256d Y = vexp(l);
            const __m256d aY = prm.p == 1.0 ? nu : _mm256_mul_pd(nu, vexp(_mm256_mul_pd(pm1, l)));
            __m256d muY = _mm256_setzero_pd();
            if (prm.mu_kind == 1) {
                muY = _mm256_sub_pd(_mm256_div_pd(_mm256_add_pd(mu_a, mu_b), _mm256_fmadd_pd(Y, Y, one)), mu_b);
            } else if (prm.mu_kind == 2) {
                muY = _mm256_fnmadd_pd(_mm256_mul_pd(mu_a, Y), aY,
                                       _mm256_mul_pd(_mm256_mul_pd(half, pm1), _mm256_mul_pd(aY, aY)));
            }
            __m256d s = s0;
            if (prm.sigma_logistic) {
                const __m256d e = vexp(_mm256_mul_pd(s_neg_slope, _mm256_sub_pd(x, s_center)));
                s = _mm256_add_pd(s0, _mm256_div_pd(s_amp, _mm256_add_pd(one, e)));
            }
            const __m256d sY = _mm256_mul_pd(s, Y);
            const __m256d driftx = _mm256_fnmadd_pd(_mm256_mul_pd(half, sY), sY, lam);
            const __m256d shock = _mm256_fmadd_pd(rho, z2, _mm256_mul_pd(rho_bar, z1));
            __m256d xn = _mm256_fmadd_pd(driftx, dt, x);
            xn = _mm256_fmadd_pd(_mm256_mul_pd(sY, vsdt), shock, xn);
            const __m256d drifty = _mm256_fnmadd_pd(_mm256_mul_pd(half, aY), aY, muY);
            __m256d ln = _mm256_fmadd_pd(drifty, dt, l);
            ln = _mm256_fmadd_pd(_mm256_mul_pd(aY, vsdt), z2, ln);
            _mm256_storeu_pd(&X[i], xn);
            _mm256_storeu_pd(&L[i], ln);
        }
    }
    for (std::size_t i = 0; i < n; ++i) x_out[i] = X[i];
}

}  // namespace lsv::simd
