#include "backends.hpp"

#if defined(TQR_HAVE_NEON_BACKEND)

#include <arm_neon.h>

#include <cmath>
#include <vector>

// NEON variants (2 lanes of f64). Accumulations use vaddq_f64(vmulq_f64(...))
// rather than vfmaq_f64, and the whole project builds with -ffp-contract=off,
// so results stay bit-identical to the scalar reference.

namespace tqr::kernels::neon {

namespace {

inline float64x2_t masked(uint64x2_t m, float64x2_t v) {
  return vreinterpretq_f64_u64(vandq_u64(m, vreinterpretq_u64_f64(v)));
}

} // namespace

void add(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* o, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(o + i, vmulq_f64(vld1q_f64(a + i), vs));
  for (; i < n; ++i) o[i] = a[i] * s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void clamp(const double* x, double lo, double hi, double* o, std::size_t n) {
  const float64x2_t vlo = vdupq_n_f64(lo), vhi = vdupq_n_f64(hi);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vminq_f64(vmaxq_f64(vld1q_f64(x + i), vlo), vhi));
  for (; i < n; ++i) o[i] = std::min(std::max(x[i], lo), hi);
}

void relu(const double* x, double* o, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(o + i, vmaxq_f64(vld1q_f64(x + i), zero));
  for (; i < n; ++i) o[i] = std::max(x[i], 0.0);
}

void relu_mask(const double* x, const double* u, double* o, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, masked(vcgtq_f64(vld1q_f64(x + i), zero), vld1q_f64(u + i)));
  for (; i < n; ++i) o[i] = x[i] > 0.0 ? u[i] : 0.0;
}

void ste_mask(const double* x, const double* u, double c, double* o, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, masked(vcleq_f64(vabsq_f64(vld1q_f64(x + i)), vc), vld1q_f64(u + i)));
  for (; i < n; ++i) o[i] = std::fabs(x[i]) <= c ? u[i] : 0.0;
}

void ste_mask_relu(const double* x, const double* u, double c, double* o, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0), vc = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vx = vld1q_f64(x + i);
    uint64x2_t m = vandq_u64(vcgeq_f64(vx, zero), vcleq_f64(vx, vc));
    vst1q_f64(o + i, masked(m, vld1q_f64(u + i)));
  }
  for (; i < n; ++i) o[i] = (x[i] >= 0.0 && x[i] <= c) ? u[i] : 0.0;
}

void sign_binary(const double* x, double* o, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t pone = vdupq_n_f64(1.0), mone = vdupq_n_f64(-1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64x2_t m = vcgeq_f64(vld1q_f64(x + i), zero);
    vst1q_f64(o + i, vbslq_f64(m, pone, mone));
  }
  for (; i < n; ++i) o[i] = x[i] >= 0.0 ? 1.0 : -1.0;
}

void ternary_cut(const double* x, double cut, double* o, std::size_t n) {
  const float64x2_t vcut = vdupq_n_f64(cut), vncut = vdupq_n_f64(-cut);
  const float64x2_t pone = vdupq_n_f64(1.0), mone = vdupq_n_f64(-1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vx = vld1q_f64(x + i);
    float64x2_t hi = masked(vcgtq_f64(vx, vcut), pone);
    float64x2_t lo = masked(vcltq_f64(vx, vncut), mone);
    vst1q_f64(o + i, vreinterpretq_f64_u64(vorrq_u64(vreinterpretq_u64_f64(hi),
                                                     vreinterpretq_u64_f64(lo))));
  }
  for (; i < n; ++i) o[i] = x[i] > cut ? 1.0 : (x[i] < -cut ? -1.0 : 0.0);
}

void fixed_point(const double* x, double s, double lo, double hi, double* o, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s), vlo = vdupq_n_f64(lo), vhi = vdupq_n_f64(hi);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t q = vrndnq_f64(vmulq_f64(vld1q_f64(x + i), vs));
    vst1q_f64(o + i, vdivq_f64(vminq_f64(vmaxq_f64(q, vlo), vhi), vs));
  }
  for (; i < n; ++i) {
    double q = std::nearbyint(x[i] * s);
    o[i] = std::min(std::max(q, lo), hi) / s;
  }
}

void gemm_nn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
             std::int64_t n, bool acc) {
  if (!acc) {
    for (std::int64_t i = 0; i < m * n; ++i) c[i] = 0.0;
  }
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      const float64x2_t av = vdupq_n_f64(arow[p]);
      const double* brow = b + p * n;
      std::int64_t j = 0;
      for (; j + 2 <= n; j += 2) {
        float64x2_t prod = vmulq_f64(av, vld1q_f64(brow + j));
        vst1q_f64(crow + j, vaddq_f64(vld1q_f64(crow + j), prod));
      }
      for (; j < n; ++j) crow[j] += arow[p] * brow[j];
    }
  }
}

void transpose(const double* a, double* at, std::int64_t r, std::int64_t c) {
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = 0; j < c; ++j) at[j * r + i] = a[i * c + j];
}

namespace {

inline void fused_axpy(double v, const double* w, double* y, int len) {
  const float64x2_t vv = vdupq_n_f64(v);
  int i = 0;
  for (; i + 2 <= len; i += 2) {
    float64x2_t prod = vmulq_f64(vv, vld1q_f64(w + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < len; ++i) y[i] += v * w[i];
}

inline void fused_madd(const double* a, const double* b, double* y, int len) {
  int i = 0;
  for (; i + 2 <= len; i += 2) {
    float64x2_t prod = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < len; ++i) y[i] += a[i] * b[i];
}

} // namespace

void conv2d(const double* x, const double* w, double* y, const ConvShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t total = std::size_t(s.batch) * oh * ow * s.out_c;
  for (std::size_t i = 0; i < total; ++i) y[i] = 0.0;
  for (int b = 0; b < s.batch; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double* yp = y + ((std::size_t(b) * oh + oy) * ow + ox) * s.out_c;
        for (int ky = 0; ky < s.k_h; ++ky) {
          const int iy = oy * s.stride - s.pad_h + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int kx = 0; kx < s.k_w; ++kx) {
            const int ix = ox * s.stride - s.pad_w + kx;
            if (ix < 0 || ix >= s.in_w) continue;
            const double* xp = x + ((std::size_t(b) * s.in_h + iy) * s.in_w + ix) * s.in_c;
            const double* wp = w + (std::size_t(ky) * s.k_w + kx) * s.in_c * s.out_c;
            for (int ic = 0; ic < s.in_c; ++ic)
              fused_axpy(xp[ic], wp + std::size_t(ic) * s.out_c, yp, s.out_c);
          }
        }
      }
}

void conv2d_igrad(const double* u, const double* w, double* gx, const ConvShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t total = std::size_t(s.batch) * s.in_h * s.in_w * s.in_c;
  for (std::size_t i = 0; i < total; ++i) gx[i] = 0.0;
  std::vector<double> wt(std::size_t(s.k_h) * s.k_w * s.in_c * s.out_c);
  for (int ky = 0; ky < s.k_h; ++ky)
    for (int kx = 0; kx < s.k_w; ++kx) {
      const double* src = w + (std::size_t(ky) * s.k_w + kx) * s.in_c * s.out_c;
      double* dst = wt.data() + (std::size_t(ky) * s.k_w + kx) * s.in_c * s.out_c;
      for (int ic = 0; ic < s.in_c; ++ic)
        for (int oc = 0; oc < s.out_c; ++oc)
          dst[std::size_t(oc) * s.in_c + ic] = src[std::size_t(ic) * s.out_c + oc];
    }
  for (int b = 0; b < s.batch; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const double* up = u + ((std::size_t(b) * oh + oy) * ow + ox) * s.out_c;
        for (int ky = 0; ky < s.k_h; ++ky) {
          const int iy = oy * s.stride - s.pad_h + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int kx = 0; kx < s.k_w; ++kx) {
            const int ix = ox * s.stride - s.pad_w + kx;
            if (ix < 0 || ix >= s.in_w) continue;
            double* gp = gx + ((std::size_t(b) * s.in_h + iy) * s.in_w + ix) * s.in_c;
            const double* wp = wt.data() + (std::size_t(ky) * s.k_w + kx) * s.in_c * s.out_c;
            for (int oc = 0; oc < s.out_c; ++oc)
              fused_axpy(up[oc], wp + std::size_t(oc) * s.in_c, gp, s.in_c);
          }
        }
      }
}

void conv2d_wgrad(const double* x, const double* u, double* gw, const ConvShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t total = std::size_t(s.k_h) * s.k_w * s.in_c * s.out_c;
  for (std::size_t i = 0; i < total; ++i) gw[i] = 0.0;
  for (int b = 0; b < s.batch; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const double* up = u + ((std::size_t(b) * oh + oy) * ow + ox) * s.out_c;
        for (int ky = 0; ky < s.k_h; ++ky) {
          const int iy = oy * s.stride - s.pad_h + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int kx = 0; kx < s.k_w; ++kx) {
            const int ix = ox * s.stride - s.pad_w + kx;
            if (ix < 0 || ix >= s.in_w) continue;
            const double* xp = x + ((std::size_t(b) * s.in_h + iy) * s.in_w + ix) * s.in_c;
            double* gp = gw + (std::size_t(ky) * s.k_w + kx) * s.in_c * s.out_c;
            for (int ic = 0; ic < s.in_c; ++ic)
              fused_axpy(xp[ic], up, gp + std::size_t(ic) * s.out_c, s.out_c);
          }
        }
      }
}

void dwconv2d(const double* x, const double* w, double* y, const ConvShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t total = std::size_t(s.batch) * oh * ow * s.in_c;
  for (std::size_t i = 0; i < total; ++i) y[i] = 0.0;
  for (int b = 0; b < s.batch; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double* yp = y + ((std::size_t(b) * oh + oy) * ow + ox) * s.in_c;
        for (int ky = 0; ky < s.k_h; ++ky) {
          const int iy = oy * s.stride - s.pad_h + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int kx = 0; kx < s.k_w; ++kx) {
            const int ix = ox * s.stride - s.pad_w + kx;
            if (ix < 0 || ix >= s.in_w) continue;
            const double* xp = x + ((std::size_t(b) * s.in_h + iy) * s.in_w + ix) * s.in_c;
            const double* wp = w + (std::size_t(ky) * s.k_w + kx) * s.in_c;
            fused_madd(xp, wp, yp, s.in_c);
          }
        }
      }
}

void dwconv2d_igrad(const double* u, const double* w, double* gx, const ConvShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t total = std::size_t(s.batch) * s.in_h * s.in_w * s.in_c;
  for (std::size_t i = 0; i < total; ++i) gx[i] = 0.0;
  for (int b = 0; b < s.batch; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const double* up = u + ((std::size_t(b) * oh + oy) * ow + ox) * s.in_c;
        for (int ky = 0; ky < s.k_h; ++ky) {
          const int iy = oy * s.stride - s.pad_h + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int kx = 0; kx < s.k_w; ++kx) {
            const int ix = ox * s.stride - s.pad_w + kx;
            if (ix < 0 || ix >= s.in_w) continue;
            double* gp = gx + ((std::size_t(b) * s.in_h + iy) * s.in_w + ix) * s.in_c;
            const double* wp = w + (std::size_t(ky) * s.k_w + kx) * s.in_c;
            fused_madd(up, wp, gp, s.in_c);
          }
        }
      }
}

void dwconv2d_wgrad(const double* x, const double* u, double* gw, const ConvShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t total = std::size_t(s.k_h) * s.k_w * s.in_c;
  for (std::size_t i = 0; i < total; ++i) gw[i] = 0.0;
  for (int b = 0; b < s.batch; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const double* up = u + ((std::size_t(b) * oh + oy) * ow + ox) * s.in_c;
        for (int ky = 0; ky < s.k_h; ++ky) {
          const int iy = oy * s.stride - s.pad_h + ky;
          if (iy < 0 || iy >= s.in_h) continue;
          for (int kx = 0; kx < s.k_w; ++kx) {
            const int ix = ox * s.stride - s.pad_w + kx;
            if (ix < 0 || ix >= s.in_w) continue;
            const double* xp = x + ((std::size_t(b) * s.in_h + iy) * s.in_w + ix) * s.in_c;
            double* gp = gw + (std::size_t(ky) * s.k_w + kx) * s.in_c;
            fused_madd(xp, up, gp, s.in_c);
          }
        }
      }
}

} // namespace tqr::kernels::neon

#endif // TQR_HAVE_NEON_BACKEND
