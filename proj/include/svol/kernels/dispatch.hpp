#pragma once

// Runtime-dispatched batch kernels for the Monte Carlo inner loop: batched
// tape evaluation, counter-based normal generation, and the Euler step over
// a block of paths. The scalar implementation is the reference; the AVX2
// implementation must produce bit-identical results (the whole project is
// compiled without FP contraction and vector transcendentals defer to the
// same libm calls per lane), which the kernel test suite asserts exactly.

#include <cstddef>
#include <cstdint>

#include "svol/kernels/tape.hpp"

namespace svol::kern {

enum class Backend { Scalar, Avx2 };

enum class BoundaryMode { Clamp, Absorb };

struct StepParams {
  double dt = 0.0;
  double sqrt_dt = 0.0;
  double rho = 0.0;
  double rho_comp = 0.0;   // sqrt(1 - rho^2)
};

struct KernelTable {
  // out[i] = tape(y[i]); scratch holds tape.n_slots * n doubles
  void (*tape_eval)(const Tape& tape, const double* y, double* out, std::size_t n,
                    double* scratch);
  // z1/z2[i] = normals for path (path0 + i) at the given step; with
  // antithetic, path p draws pair p/2 and odd paths flip signs
  void (*normal_pairs)(std::uint64_t seed, std::uint32_t stream, std::uint64_t path0,
                       std::uint32_t step, bool antithetic, std::size_t n, double* z1,
                       double* z2);
  // full-truncation Euler update of (y, log_growth) over a block of paths;
  // mu/sig/bv are the coefficients evaluated at max(y, 0)
  void (*euler_step)(const StepParams& p, BoundaryMode mode, std::size_t n, double* y,
                     double* log_growth, const double* mu, const double* sig,
                     const double* bv, const double* z1, const double* z2);
};

bool avx2_supported();
Backend active_backend();
void set_backend(Backend b);   // throws std::runtime_error if unsupported
const KernelTable& kernels();

extern const KernelTable kScalarKernels;
extern const KernelTable kAvx2Kernels;   // entries null on non-x86 builds

}  // namespace svol::kern
