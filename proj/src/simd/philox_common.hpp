#pragma once

#include <cstdint>
#include <cstring>

namespace lsv::simd::detail {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// 52 random mantissa bits from (hi, lo) as a double in [1, 2)
inline double unit_interval_12(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 20) ^ (lo >> 12);
    const std::uint64_t pattern = 0x3FF0000000000000ull | (bits & 0x000FFFFFFFFFFFFFull);
    double d;
    std::memcpy(&d, &pattern, sizeof d);
    return d;
}

}  // namespace lsv::simd::detail
