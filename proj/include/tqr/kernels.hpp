#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Data-parallel inner loops behind the tensor/tape layer. Every kernel has a
// scalar reference implementation and may have SIMD variants; the active
// variant is chosen at runtime from CPU capabilities and can be pinned with
// set_backend(). SIMD variants keep the per-output accumulation order of the
// scalar reference and avoid FMA contraction, so results are bit-identical
// across backends.

namespace tqr::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string backend_name(Backend b);
bool backend_supported(Backend b);
Backend best_backend();
Backend active_backend();
void set_backend(Backend b); // throws std::invalid_argument if unsupported

struct ConvShape {
  int batch = 1;
  int in_h = 1, in_w = 1, in_c = 1;
  int k_h = 1, k_w = 1;
  int out_c = 1; // ignored by depthwise kernels
  int stride = 1;
  int pad_h = 0, pad_w = 0;

  int out_h() const { return (in_h + 2 * pad_h - k_h) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad_w - k_w) / stride + 1; }
};

struct KernelTable {
  // elementwise
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(const double*, double, double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t); // y += a*x
  void (*clamp)(const double*, double, double, double*, std::size_t);
  void (*relu)(const double*, double*, std::size_t);
  void (*relu_mask)(const double*, const double*, double*, std::size_t); // u where x>0 else 0
  void (*ste_mask)(const double*, const double*, double, double*, std::size_t); // u where |x|<=c
  void (*ste_mask_relu)(const double*, const double*, double, double*, std::size_t); // u where 0<=x<=c

  // quantizer forwards (deterministic kinds)
  void (*sign_binary)(const double*, double*, std::size_t);          // x>=0 -> +1 else -1
  void (*ternary_cut)(const double*, double, double*, std::size_t);  // sign(x) if |x|>cut else 0
  void (*fixed_point)(const double*, double, double, double, double*, std::size_t);
  // clip(nearbyint(x*s), lo, hi)/s with lo/hi integer bounds

  // dense algebra, row-major
  void (*gemm_nn)(const double*, const double*, double*, std::int64_t, std::int64_t,
                  std::int64_t, bool); // C(m,n) = A(m,k)*B(k,n), accumulate flag
  void (*transpose)(const double*, double*, std::int64_t, std::int64_t);

  // convolutions, NHWC activations, HWIO weights (depthwise: HWC)
  void (*conv2d)(const double*, const double*, double*, const ConvShape&);
  void (*conv2d_igrad)(const double*, const double*, double*, const ConvShape&);
  void (*conv2d_wgrad)(const double*, const double*, double*, const ConvShape&);
  void (*dwconv2d)(const double*, const double*, double*, const ConvShape&);
  void (*dwconv2d_igrad)(const double*, const double*, double*, const ConvShape&);
  void (*dwconv2d_wgrad)(const double*, const double*, double*, const ConvShape&);
};

// Table for an explicit backend (throws if unsupported). Used by the
// equivalence tests; everything else goes through the dispatching wrappers.
const KernelTable& table(Backend b);
const KernelTable& active();

// Dispatching wrappers.
inline void add(const double* a, const double* b, double* o, std::size_t n) { active().add(a, b, o, n); }
inline void sub(const double* a, const double* b, double* o, std::size_t n) { active().sub(a, b, o, n); }
inline void mul(const double* a, const double* b, double* o, std::size_t n) { active().mul(a, b, o, n); }
inline void scale(const double* a, double s, double* o, std::size_t n) { active().scale(a, s, o, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }
inline void clamp(const double* x, double lo, double hi, double* o, std::size_t n) { active().clamp(x, lo, hi, o, n); }
inline void relu(const double* x, double* o, std::size_t n) { active().relu(x, o, n); }
inline void relu_mask(const double* x, const double* u, double* o, std::size_t n) { active().relu_mask(x, u, o, n); }
inline void ste_mask(const double* x, const double* u, double c, double* o, std::size_t n) { active().ste_mask(x, u, c, o, n); }
inline void ste_mask_relu(const double* x, const double* u, double c, double* o, std::size_t n) { active().ste_mask_relu(x, u, c, o, n); }
inline void sign_binary(const double* x, double* o, std::size_t n) { active().sign_binary(x, o, n); }
inline void ternary_cut(const double* x, double cut, double* o, std::size_t n) { active().ternary_cut(x, cut, o, n); }
inline void fixed_point(const double* x, double s, double lo, double hi, double* o, std::size_t n) { active().fixed_point(x, s, lo, hi, o, n); }
inline void gemm_nn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k, std::int64_t n, bool acc) { active().gemm_nn(a, b, c, m, k, n, acc); }
inline void transpose(const double* a, double* at, std::int64_t r, std::int64_t c) { active().transpose(a, at, r, c); }
inline void conv2d(const double* x, const double* w, double* y, const ConvShape& s) { active().conv2d(x, w, y, s); }
inline void conv2d_igrad(const double* u, const double* w, double* gx, const ConvShape& s) { active().conv2d_igrad(u, w, gx, s); }
inline void conv2d_wgrad(const double* x, const double* u, double* gw, const ConvShape& s) { active().conv2d_wgrad(x, u, gw, s); }
inline void dwconv2d(const double* x, const double* w, double* y, const ConvShape& s) { active().dwconv2d(x, w, y, s); }
inline void dwconv2d_igrad(const double* u, const double* w, double* gx, const ConvShape& s) { active().dwconv2d_igrad(u, w, gx, s); }
inline void dwconv2d_wgrad(const double* x, const double* u, double* gw, const ConvShape& s) { active().dwconv2d_wgrad(x, u, gw, s); }

} // namespace tqr::kernels
