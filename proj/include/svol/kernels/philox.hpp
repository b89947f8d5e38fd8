#pragma once

// Philox4x32-10 counter-based generator. Draws are a pure function of
// (seed, path index, step index, stream), so path ensembles are
// reproducible and parallelizable without shared generator state.

#include <cstdint>

namespace svol::kern {

struct PhiloxOut {
  std::uint32_t v[4];
};

inline PhiloxOut philox4x32_10(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                               std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c2;
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
    k0 += W0;
    k1 += W1;
  }
  return PhiloxOut{{c0, c1, c2, c3}};
}

// strictly inside (0,1): ((x >> 11) + 0.5) * 2^-53
inline double u64_to_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
}

// Inverse normal CDF (Wichura's PPND16 rational approximations), accurate to
// ~1e-15 relative over (0,1). Shared between the scalar and SIMD normal
// kernels; the SIMD side reproduces the identical operation sequence.
double inv_normal_cdf(double u);

}  // namespace svol::kern
