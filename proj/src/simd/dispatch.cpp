#include <atomic>
#include <cstdlib>

#include "lsv/mc_kernels.hpp"

namespace lsv::simd {

namespace {

// -1 none, otherwise a KernelIsa value
std::atomic<int> g_forced{-1};

}  // namespace

bool avx2_supported() {
    static const bool ok = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return ok;
}

KernelIsa active_isa() {
    const int forced = g_forced.load();
    if (forced >= 0) {
        const auto isa = static_cast<KernelIsa>(forced);
        return isa == KernelIsa::avx2 && !avx2_supported() ? KernelIsa::scalar : isa;
    }
    if (const char* env = std::getenv("LSV_FORCE_SCALAR"); env && *env && *env != '0') {
        return KernelIsa::scalar;
    }
    return avx2_supported() ? KernelIsa::avx2 : KernelIsa::scalar;
}

void force_isa(KernelIsa isa) { g_forced.store(static_cast<int>(isa)); }

void clear_forced_isa() { g_forced.store(-1); }

const char* isa_name(KernelIsa isa) { return isa == KernelIsa::avx2 ? "avx2" : "scalar"; }

void simulate_block(const PathParams& prm, std::uint64_t first, std::size_t n, double* x_out) {
    if (active_isa() == KernelIsa::avx2) {
        simulate_block_avx2(prm, first, n, x_out);
    } else {
        simulate_block_scalar(prm, first, n, x_out);
    }
}

}  // namespace lsv::simd
