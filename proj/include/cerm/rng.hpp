#pragma once

#include "cerm/gaussian.hpp"

#include <array>
#include <cstdint>

namespace cerm {

// Counter-based Philox4x32-10 generator. Every (path, time, stream) triple
// addresses an independent 128-bit counter block, so draws are reproducible
// regardless of evaluation order or worker count.
struct Philox4x32 {
    static constexpr std::uint32_t kMult0 = 0xD2511F53u;
    static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t path,
                                              std::uint32_t time, std::uint32_t stream) {
        std::uint32_t c0 = static_cast<std::uint32_t>(path);
        std::uint32_t c1 = static_cast<std::uint32_t>(path >> 32);
        std::uint32_t c2 = time;
        std::uint32_t c3 = stream;
        std::uint32_t k0 = static_cast<std::uint32_t>(seed);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * c0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return {c0, c1, c2, c3};
    }
};

// Uniform in the open interval (0, 1) from two 32-bit words (53 random bits).
inline double uniform_open(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// The three standard normal innovations (eps_E, eps_P, eps_theta) for one
// (path, time) cell. Gaussians come from the inverse CDF of the same Phi
// implementation used by the net-zero kernels.
inline std::array<double, 3> normal_triple(std::uint64_t seed, std::uint64_t path,
                                           std::uint32_t time) {
    const auto a = Philox4x32::block(seed, path, time, 0);
    const auto b = Philox4x32::block(seed, path, time, 1);
    return {norm_quantile(uniform_open(a[0], a[1])), norm_quantile(uniform_open(a[2], a[3])),
            norm_quantile(uniform_open(b[0], b[1]))};
}

} // namespace cerm
