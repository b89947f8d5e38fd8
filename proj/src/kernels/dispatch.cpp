#include "svol/kernels/dispatch.hpp"

#include <atomic>
#include <stdexcept>

namespace svol::kern {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && kAvx2Kernels.tape_eval != nullptr;
#else
  return false;
#endif
}

namespace {

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> b{avx2_supported() ? Backend::Avx2 : Backend::Scalar};
  return b;
}

}  // namespace

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_supported())
    throw std::runtime_error("AVX2 backend requested but not supported on this CPU");
  backend_slot().store(b, std::memory_order_relaxed);
}

const KernelTable& kernels() {
  return active_backend() == Backend::Avx2 ? kAvx2Kernels : kScalarKernels;
}

}  // namespace svol::kern
