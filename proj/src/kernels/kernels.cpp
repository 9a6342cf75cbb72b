#include "backends.hpp"

#include <stdexcept>

namespace tqr::kernels {

namespace {

#define TQR_FILL_TABLE(ns)                                                                   \
  KernelTable{ns::add,          ns::sub,           ns::mul,           ns::scale,             \
              ns::axpy,         ns::clamp,         ns::relu,          ns::relu_mask,         \
              ns::ste_mask,     ns::ste_mask_relu, ns::sign_binary,   ns::ternary_cut,       \
              ns::fixed_point,  ns::gemm_nn,       ns::transpose,     ns::conv2d,            \
              ns::conv2d_igrad, ns::conv2d_wgrad,  ns::dwconv2d,      ns::dwconv2d_igrad,    \
              ns::dwconv2d_wgrad}

const KernelTable scalar_table = TQR_FILL_TABLE(scalar);
#if defined(TQR_HAVE_AVX2_BACKEND)
const KernelTable avx2_table = TQR_FILL_TABLE(avx2);
#endif
#if defined(TQR_HAVE_NEON_BACKEND)
const KernelTable neon_table = TQR_FILL_TABLE(neon);
#endif

#undef TQR_FILL_TABLE

Backend g_backend = best_backend();

} // namespace

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(TQR_HAVE_AVX2_BACKEND)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::Neon:
#if defined(TQR_HAVE_NEON_BACKEND)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend best_backend() {
  if (backend_supported(Backend::Avx2)) return Backend::Avx2;
  if (backend_supported(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
  if (!backend_supported(b))
    throw std::invalid_argument("kernel backend not supported on this host: " + backend_name(b));
  g_backend = b;
}

const KernelTable& table(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return scalar_table;
    case Backend::Avx2:
#if defined(TQR_HAVE_AVX2_BACKEND)
      return avx2_table;
#else
      break;
#endif
    case Backend::Neon:
#if defined(TQR_HAVE_NEON_BACKEND)
      return neon_table;
#else
      break;
#endif
  }
  throw std::invalid_argument("kernel backend not compiled in: " + backend_name(b));
}

const KernelTable& active() { return table(g_backend); }

} // namespace tqr::kernels
