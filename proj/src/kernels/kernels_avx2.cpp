// AVX2 variants of the batch kernels. Semantics are pinned to the scalar
// reference: IEEE add/sub/mul/div/sqrt are exact in SIMD, abs/neg are sign
// bit manipulation, and exp/log/pow defer to the identical libm calls per
// lane. Branches become mask/blend pairs whose selected lane reproduces the
// scalar operation sequence exactly, so outputs are bit-identical.

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "svol/kernels/dispatch.hpp"
#include "svol/kernels/philox.hpp"

namespace svol::kern {

namespace {

constexpr std::size_t kLanes = 4;

inline __m256d abs_pd(__m256d x) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(x, mask);
}

inline __m256d neg_pd(__m256d x) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000ULL));
  return _mm256_xor_pd(x, mask);
}

inline double log_lane(double x) { return std::log(x); }

template <double F(double)>
inline __m256d map_lanes(__m256d x) {
  alignas(32) double buf[kLanes];
  _mm256_store_pd(buf, x);
  for (std::size_t i = 0; i < kLanes; ++i) buf[i] = F(buf[i]);
  return _mm256_load_pd(buf);
}

void tape_eval_avx2(const Tape& tape, const double* y, double* out, std::size_t n,
                    double* scratch) {
  const std::size_t stride = n;
  const std::size_t nv = n - n % kLanes;
  for (const Instr& ins : tape.code) {
    double* dst = scratch + static_cast<std::size_t>(ins.dst) * stride;
    const double* a = scratch + static_cast<std::size_t>(ins.a) * stride;
    const double* b = scratch + static_cast<std::size_t>(ins.b) * stride;
    std::size_t i = 0;
    switch (ins.op) {
      case Op::Const: {
        const __m256d v = _mm256_set1_pd(ins.imm);
        for (; i < nv; i += kLanes) _mm256_storeu_pd(dst + i, v);
        for (; i < n; ++i) dst[i] = ins.imm;
        break;
      }
      case Op::LoadY:
        for (; i < nv; i += kLanes)
          _mm256_storeu_pd(dst + i, _mm256_loadu_pd(y + i));
        for (; i < n; ++i) dst[i] = y[i];
        break;
      case Op::Neg:
        for (; i < nv; i += kLanes)
          _mm256_storeu_pd(dst + i, neg_pd(_mm256_loadu_pd(a + i)));
        for (; i < n; ++i) dst[i] = -a[i];
        break;
      case Op::Add:
        for (; i < nv; i += kLanes)
          _mm256_storeu_pd(dst + i,
                           _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        for (; i < n; ++i) dst[i] = a[i] + b[i];
        break;
      case Op::Sub:
        for (; i < nv; i += kLanes)
          _mm256_storeu_pd(dst + i,
                           _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        for (; i < n; ++i) dst[i] = a[i] - b[i];
        break;
      case Op::Mul:
        for (; i < nv; i += kLanes)
          _mm256_storeu_pd(dst + i,
                           _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        for (; i < n; ++i) dst[i] = a[i] * b[i];
        break;
      case Op::Div:
        for (; i < nv; i += kLanes)
          _mm256_storeu_pd(dst + i,
                           _mm256_div_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        for (; i < n; ++i) dst[i] = a[i] / b[i];
        break;
      case Op::Sqrt:
        for (; i < nv; i += kLanes)
          _mm256_storeu_pd(dst + i, _mm256_sqrt_pd(_mm256_loadu_pd(a + i)));
        for (; i < n; ++i) dst[i] = std::sqrt(a[i]);
        break;
      case Op::Abs:
        for (; i < nv; i += kLanes)
          _mm256_storeu_pd(dst + i, abs_pd(_mm256_loadu_pd(a + i)));
        for (; i < n; ++i) dst[i] = std::fabs(a[i]);
        break;
      case Op::Pow:
        for (; i < n; ++i) dst[i] = std::pow(a[i], ins.imm);
        break;
      case Op::Exp:
        for (; i < n; ++i) dst[i] = std::exp(a[i]);
        break;
      case Op::Log:
        for (; i < n; ++i) dst[i] = std::log(a[i]);
        break;
    }
  }
  std::memcpy(out, scratch + static_cast<std::size_t>(tape.out) * stride,
              n * sizeof(double));
}

// ---- vectorized PPND16 (same coefficient tables as the scalar kernel) ----

struct RatPoly {
  double p[8], q[8];
};

static const RatPoly kCentral = {
    {3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
     1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
     3.3430575583588128105e4, 2.5090809287301226727e3},
    {1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
     2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
     5.2264952788528545610e3}};
static const RatPoly kMidTail = {
    {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
     3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
     2.27238449892691845833e-2, 7.74545014278341407640e-4},
    {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
     1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
     1.05075007164441684324e-9}};
static const RatPoly kFarTail = {
    {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
     2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
     2.71155556874348757815e-5, 2.01033439929228813265e-7},
    {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
     7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
     2.04426310338993978564e-15}};

inline __m256d ratpoly_pd(const RatPoly& rp, __m256d r) {
  __m256d num = _mm256_set1_pd(rp.p[7]);
  for (int i = 6; i >= 0; --i)
    num = _mm256_add_pd(_mm256_mul_pd(num, r), _mm256_set1_pd(rp.p[i]));
  __m256d den = _mm256_set1_pd(rp.q[7]);
  for (int i = 6; i >= 0; --i)
    den = _mm256_add_pd(_mm256_mul_pd(den, r), _mm256_set1_pd(rp.q[i]));
  return _mm256_div_pd(num, den);
}

inline __m256d inv_normal_cdf_pd(__m256d u) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d q = _mm256_sub_pd(u, half);
  const __m256d aq = abs_pd(q);
  const __m256d central_mask =
      _mm256_cmp_pd(aq, _mm256_set1_pd(0.425), _CMP_LE_OQ);

  // central branch
  const __m256d rc = _mm256_sub_pd(_mm256_set1_pd(0.180625), _mm256_mul_pd(q, q));
  const __m256d central = _mm256_mul_pd(q, ratpoly_pd(kCentral, rc));

  // tail branch: r = sqrt(-log(min(u, 1-u))); log per lane via libm
  const __m256d one_minus = _mm256_sub_pd(_mm256_set1_pd(1.0), u);
  const __m256d neg_mask = _mm256_cmp_pd(q, _mm256_setzero_pd(), _CMP_LT_OQ);
  __m256d r0 = _mm256_blendv_pd(one_minus, u, neg_mask);
  r0 = map_lanes<log_lane>(r0);
  const __m256d r = _mm256_sqrt_pd(neg_pd(r0));
  const __m256d far_mask = _mm256_cmp_pd(r, _mm256_set1_pd(5.0), _CMP_GT_OQ);
  const __m256d mid = ratpoly_pd(kMidTail, _mm256_sub_pd(r, _mm256_set1_pd(1.6)));
  const __m256d far = ratpoly_pd(kFarTail, _mm256_sub_pd(r, _mm256_set1_pd(5.0)));
  __m256d tail = _mm256_blendv_pd(mid, far, far_mask);
  tail = _mm256_blendv_pd(tail, neg_pd(tail), neg_mask);

  return _mm256_blendv_pd(tail, central, central_mask);
}

// ---- vectorized Philox over 4 blocks (SoA via two 64-bit product lanes) ----

inline void mulhilo4(__m256i x, std::uint32_t mult, __m256i& hi, __m256i& lo) {
  // x holds 4 u32 values in the low halves of 4 u64 lanes
  const __m256i m = _mm256_set1_epi64x(mult);
  const __m256i prod = _mm256_mul_epu32(x, m);
  hi = _mm256_srli_epi64(prod, 32);
  lo = _mm256_and_si256(prod, _mm256_set1_epi64x(0xffffffffLL));
}

struct Philox4 {
  __m256i c0, c1, c2, c3;   // 4 counters, one u32 per u64 lane
};

inline Philox4 philox4x32_10_x4(Philox4 s, std::uint32_t key0, std::uint32_t key1) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  __m256i k0 = _mm256_set1_epi64x(key0);
  __m256i k1 = _mm256_set1_epi64x(key1);
  const __m256i wall = _mm256_set1_epi64x(0xffffffffLL);
  for (int round = 0; round < 10; ++round) {
    __m256i hi0, lo0, hi1, lo1;
    mulhilo4(s.c0, M0, hi0, lo0);
    mulhilo4(s.c2, M1, hi1, lo1);
    const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, s.c1), k0);
    const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, s.c3), k1);
    s.c0 = _mm256_and_si256(n0, wall);
    s.c1 = lo1;
    s.c2 = _mm256_and_si256(n2, wall);
    s.c3 = lo0;
    k0 = _mm256_and_si256(_mm256_add_epi64(k0, _mm256_set1_epi64x(W0)), wall);
    k1 = _mm256_and_si256(_mm256_add_epi64(k1, _mm256_set1_epi64x(W1)), wall);
  }
  return s;
}

void normal_pairs_avx2(std::uint64_t seed, std::uint32_t stream, std::uint64_t path0,
                       std::uint32_t step, bool antithetic, std::size_t n, double* z1,
                       double* z2) {
  const std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  const std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  const std::size_t nv = n - n % kLanes;
  std::size_t i = 0;
  alignas(32) std::uint64_t draw[kLanes];
  alignas(32) double u0[kLanes], u1[kLanes];
  for (; i < nv; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const std::uint64_t path = path0 + i + l;
      draw[l] = antithetic ? (path >> 1) : path;
    }
    Philox4 s;
    s.c0 = _mm256_set_epi64x(draw[3] & 0xffffffffu, draw[2] & 0xffffffffu,
                             draw[1] & 0xffffffffu, draw[0] & 0xffffffffu);
    s.c1 = _mm256_set_epi64x(draw[3] >> 32, draw[2] >> 32, draw[1] >> 32,
                             draw[0] >> 32);
    s.c2 = _mm256_set1_epi64x(step);
    s.c3 = _mm256_set1_epi64x(stream);
    const Philox4 r = philox4x32_10_x4(s, k0, k1);
    alignas(32) std::uint64_t v0[kLanes], v1[kLanes], v2[kLanes], v3[kLanes];
    _mm256_store_si256(reinterpret_cast<__m256i*>(v0), r.c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(v1), r.c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(v2), r.c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(v3), r.c3);
    for (std::size_t l = 0; l < kLanes; ++l) {
      u0[l] = u64_to_unit((v0[l] << 32) | v1[l]);
      u1[l] = u64_to_unit((v2[l] << 32) | v3[l]);
    }
    __m256d a = inv_normal_cdf_pd(_mm256_load_pd(u0));
    __m256d b = inv_normal_cdf_pd(_mm256_load_pd(u1));
    if (antithetic) {
      alignas(32) std::uint64_t flip[kLanes];
      for (std::size_t l = 0; l < kLanes; ++l)
        flip[l] = ((path0 + i + l) & 1u) ? 0x8000000000000000ULL : 0ULL;
      const __m256d fmask =
          _mm256_castsi256_pd(_mm256_load_si256(reinterpret_cast<__m256i*>(flip)));
      a = _mm256_xor_pd(a, fmask);
      b = _mm256_xor_pd(b, fmask);
    }
    _mm256_storeu_pd(z1 + i, a);
    _mm256_storeu_pd(z2 + i, b);
  }
  if (i < n)
    kScalarKernels.normal_pairs(seed, stream, path0 + i, step, antithetic, n - i,
                                z1 + i, z2 + i);
}

void euler_step_avx2(const StepParams& p, BoundaryMode mode, std::size_t n, double* y,
                     double* log_growth, const double* mu, const double* sig,
                     const double* bv, const double* z1, const double* z2) {
  const __m256d sqdt = _mm256_set1_pd(p.sqrt_dt);
  const __m256d rho = _mm256_set1_pd(p.rho);
  const __m256d rhoc = _mm256_set1_pd(p.rho_comp);
  const __m256d dt = _mm256_set1_pd(p.dt);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t nv = n - n % kLanes;
  std::size_t i = 0;
  for (; i < nv; i += kLanes) {
    const __m256d zv1 = _mm256_loadu_pd(z1 + i);
    const __m256d zv2 = _mm256_loadu_pd(z2 + i);
    const __m256d bvi = _mm256_loadu_pd(bv + i);
    const __m256d dB = _mm256_mul_pd(sqdt, zv1);
    const __m256d dW = _mm256_add_pd(_mm256_mul_pd(rho, dB),
                                     _mm256_mul_pd(rhoc, _mm256_mul_pd(sqdt, zv2)));
    const __m256d inc = _mm256_sub_pd(
        _mm256_mul_pd(bvi, dW),
        _mm256_mul_pd(_mm256_mul_pd(half, _mm256_mul_pd(bvi, bvi)), dt));
    _mm256_storeu_pd(log_growth + i,
                     _mm256_add_pd(_mm256_loadu_pd(log_growth + i), inc));
    const __m256d y_new = _mm256_add_pd(
        _mm256_add_pd(_mm256_loadu_pd(y + i),
                      _mm256_mul_pd(_mm256_loadu_pd(mu + i), dt)),
        _mm256_mul_pd(_mm256_loadu_pd(sig + i), dB));
    __m256d out;
    if (mode == BoundaryMode::Clamp) {
      const __m256d pos = _mm256_cmp_pd(y_new, zero, _CMP_GT_OQ);
      out = _mm256_blendv_pd(zero, y_new, pos);
    } else {
      const __m256d nonpos = _mm256_cmp_pd(y_new, zero, _CMP_LE_OQ);
      out = _mm256_blendv_pd(y_new, zero, nonpos);
    }
    _mm256_storeu_pd(y + i, out);
  }
  if (i < n)
    kScalarKernels.euler_step(p, mode, n - i, y + i, log_growth + i, mu + i, sig + i,
                              bv + i, z1 + i, z2 + i);
}

}  // namespace

const KernelTable kAvx2Kernels = {tape_eval_avx2, normal_pairs_avx2, euler_step_avx2};

}  // namespace svol::kern

#else  // non-x86 build: no AVX2 table

#include "svol/kernels/dispatch.hpp"

namespace svol::kern {
const KernelTable kAvx2Kernels = {nullptr, nullptr, nullptr};
}

#endif
