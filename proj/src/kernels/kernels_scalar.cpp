#include <cmath>

#include "svol/kernels/dispatch.hpp"
#include "svol/kernels/philox.hpp"

// Reference kernels. Plain scalar loops; every arithmetic step here defines
// the semantics the SIMD variants must reproduce bit for bit.

namespace svol::kern {

double inv_normal_cdf(double u) {
  // PPND16 coefficients (Wichura, Applied Statistics 37, 1988)
  static constexpr double A[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4,  4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static constexpr double B[8] = {
      1.0,                      4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3,  2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static constexpr double C[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double D[8] = {
      1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double E[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double F[8] = {
      1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto ratpoly = [](const double* P, const double* Q, double r) {
    double num = P[7];
    for (int i = 6; i >= 0; --i) num = num * r + P[i];
    double den = Q[7];
    for (int i = 6; i >= 0; --i) den = den * r + Q[i];
    return num / den;
  };

  const double q = u - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * ratpoly(A, B, r);
  }
  double r = (q < 0.0) ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    val = ratpoly(C, D, r - 1.6);
  } else {
    val = ratpoly(E, F, r - 5.0);
  }
  return (q < 0.0) ? -val : val;
}

namespace {

void tape_eval_scalar(const Tape& tape, const double* y, double* out, std::size_t n,
                      double* scratch) {
  const std::size_t stride = n;
  for (const Instr& ins : tape.code) {
    double* dst = scratch + static_cast<std::size_t>(ins.dst) * stride;
    const double* a = scratch + static_cast<std::size_t>(ins.a) * stride;
    const double* b = scratch + static_cast<std::size_t>(ins.b) * stride;
    switch (ins.op) {
      case Op::Const:
        for (std::size_t i = 0; i < n; ++i) dst[i] = ins.imm;
        break;
      case Op::LoadY:
        for (std::size_t i = 0; i < n; ++i) dst[i] = y[i];
        break;
      case Op::Neg:
        for (std::size_t i = 0; i < n; ++i) dst[i] = -a[i];
        break;
      case Op::Add:
        for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
        break;
      case Op::Sub:
        for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
        break;
      case Op::Mul:
        for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
        break;
      case Op::Div:
        for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] / b[i];
        break;
      case Op::Pow:
        for (std::size_t i = 0; i < n; ++i) dst[i] = std::pow(a[i], ins.imm);
        break;
      case Op::Sqrt:
        for (std::size_t i = 0; i < n; ++i) dst[i] = std::sqrt(a[i]);
        break;
      case Op::Exp:
        for (std::size_t i = 0; i < n; ++i) dst[i] = std::exp(a[i]);
        break;
      case Op::Log:
        for (std::size_t i = 0; i < n; ++i) dst[i] = std::log(a[i]);
        break;
      case Op::Abs:
        for (std::size_t i = 0; i < n; ++i) dst[i] = std::fabs(a[i]);
        break;
    }
  }
  const double* res = scratch + static_cast<std::size_t>(tape.out) * stride;
  for (std::size_t i = 0; i < n; ++i) out[i] = res[i];
}

void normal_pairs_scalar(std::uint64_t seed, std::uint32_t stream, std::uint64_t path0,
                         std::uint32_t step, bool antithetic, std::size_t n, double* z1,
                         double* z2) {
  const std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  const std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t path = path0 + i;
    const std::uint64_t draw = antithetic ? (path >> 1) : path;
    const PhiloxOut r = philox4x32_10(static_cast<std::uint32_t>(draw),
                                      static_cast<std::uint32_t>(draw >> 32), step,
                                      stream, k0, k1);
    const std::uint64_t x0 =
        (static_cast<std::uint64_t>(r.v[0]) << 32) | r.v[1];
    const std::uint64_t x1 =
        (static_cast<std::uint64_t>(r.v[2]) << 32) | r.v[3];
    double a = inv_normal_cdf(u64_to_unit(x0));
    double b = inv_normal_cdf(u64_to_unit(x1));
    if (antithetic && (path & 1u)) {
      a = -a;
      b = -b;
    }
    z1[i] = a;
    z2[i] = b;
  }
}

void euler_step_scalar(const StepParams& p, BoundaryMode mode, std::size_t n, double* y,
                       double* log_growth, const double* mu, const double* sig,
                       const double* bv, const double* z1, const double* z2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dB = p.sqrt_dt * z1[i];
    const double dW = p.rho * dB + p.rho_comp * (p.sqrt_dt * z2[i]);
    log_growth[i] = log_growth[i] + (bv[i] * dW - 0.5 * (bv[i] * bv[i]) * p.dt);
    const double y_new = y[i] + mu[i] * p.dt + sig[i] * dB;
    if (mode == BoundaryMode::Clamp) {
      y[i] = (y_new > 0.0) ? y_new : 0.0;
    } else {
      y[i] = (y_new <= 0.0) ? 0.0 : y_new;
    }
  }
}

}  // namespace

const KernelTable kScalarKernels = {tape_eval_scalar, normal_pairs_scalar,
                                    euler_step_scalar};

}  // namespace svol::kern
