#pragma once

#include "tqr/kernels.hpp"

// Internal: per-backend entry points. Only the dispatch table in kernels.cpp
// should care about these.

#define TQR_KERNEL_DECLS                                                                      \
  void add(const double*, const double*, double*, std::size_t);                              \
  void sub(const double*, const double*, double*, std::size_t);                              \
  void mul(const double*, const double*, double*, std::size_t);                              \
  void scale(const double*, double, double*, std::size_t);                                   \
  void axpy(double, const double*, double*, std::size_t);                                    \
  void clamp(const double*, double, double, double*, std::size_t);                           \
  void relu(const double*, double*, std::size_t);                                            \
  void relu_mask(const double*, const double*, double*, std::size_t);                        \
  void ste_mask(const double*, const double*, double, double*, std::size_t);                 \
  void ste_mask_relu(const double*, const double*, double, double*, std::size_t);            \
  void sign_binary(const double*, double*, std::size_t);                                     \
  void ternary_cut(const double*, double, double*, std::size_t);                             \
  void fixed_point(const double*, double, double, double, double*, std::size_t);             \
  void gemm_nn(const double*, const double*, double*, std::int64_t, std::int64_t,            \
               std::int64_t, bool);                                                          \
  void transpose(const double*, double*, std::int64_t, std::int64_t);                        \
  void conv2d(const double*, const double*, double*, const ConvShape&);                      \
  void conv2d_igrad(const double*, const double*, double*, const ConvShape&);                \
  void conv2d_wgrad(const double*, const double*, double*, const ConvShape&);                \
  void dwconv2d(const double*, const double*, double*, const ConvShape&);                    \
  void dwconv2d_igrad(const double*, const double*, double*, const ConvShape&);              \
  void dwconv2d_wgrad(const double*, const double*, double*, const ConvShape&);

namespace tqr::kernels::scalar {
TQR_KERNEL_DECLS
}

#if defined(__x86_64__) || defined(_M_X64)
#define TQR_HAVE_AVX2_BACKEND 1
namespace tqr::kernels::avx2 {
TQR_KERNEL_DECLS
}
#endif

#if defined(__aarch64__)
#define TQR_HAVE_NEON_BACKEND 1
namespace tqr::kernels::neon {
TQR_KERNEL_DECLS
}
#endif
