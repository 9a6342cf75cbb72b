#include "backends.hpp"

#if defined(TQR_HAVE_AVX2_BACKEND)

#include <immintrin.h>

#include <cmath>
#include <vector>

// AVX2 variants. This translation unit is built with -mavx2 (and no -mfma) so
// the compiler cannot contract mul+add; every accumulation below is an explicit
// _mm256_add_pd(_mm256_mul_pd(...)) matching the scalar reference order.

namespace tqr::kernels::avx2 {

namespace {

inline __m256d abs_pd(__m256d v) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign, v);
}

} // namespace

void add(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* o, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* o, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
  for (; i < n; ++i) o[i] = a[i] * s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void clamp(const double* x, double lo, double hi, double* o, std::size_t n) {
  const __m256d vlo = _mm256_set1_pd(lo), vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_min_pd(_mm256_max_pd(_mm256_loadu_pd(x + i), vlo), vhi));
  for (; i < n; ++i) o[i] = std::min(std::max(x[i], lo), hi);
}

void relu(const double* x, double* o, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) o[i] = std::max(x[i], 0.0);
}

void relu_mask(const double* x, const double* u, double* o, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(o + i, _mm256_and_pd(m, _mm256_loadu_pd(u + i)));
  }
  for (; i < n; ++i) o[i] = x[i] > 0.0 ? u[i] : 0.0;
}

void ste_mask(const double* x, const double* u, double c, double* o, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_cmp_pd(abs_pd(_mm256_loadu_pd(x + i)), vc, _CMP_LE_OQ);
    _mm256_storeu_pd(o + i, _mm256_and_pd(m, _mm256_loadu_pd(u + i)));
  }
  for (; i < n; ++i) o[i] = std::fabs(x[i]) <= c ? u[i] : 0.0;
}

void ste_mask_relu(const double* x, const double* u, double c, double* o, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd(), vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d m = _mm256_and_pd(_mm256_cmp_pd(vx, zero, _CMP_GE_OQ),
                              _mm256_cmp_pd(vx, vc, _CMP_LE_OQ));
    _mm256_storeu_pd(o + i, _mm256_and_pd(m, _mm256_loadu_pd(u + i)));
  }
  for (; i < n; ++i) o[i] = (x[i] >= 0.0 && x[i] <= c) ? u[i] : 0.0;
}

void sign_binary(const double* x, double* o, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pone = _mm256_set1_pd(1.0), mone = _mm256_set1_pd(-1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GE_OQ);
    _mm256_storeu_pd(o + i, _mm256_blendv_pd(mone, pone, m));
  }
  for (; i < n; ++i) o[i] = x[i] >= 0.0 ? 1.0 : -1.0;
}

void ternary_cut(const double* x, double cut, double* o, std::size_t n) {
  const __m256d vcut = _mm256_set1_pd(cut), vncut = _mm256_set1_pd(-cut);
  const __m256d pone = _mm256_set1_pd(1.0), mone = _mm256_set1_pd(-1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d hi = _mm256_and_pd(_mm256_cmp_pd(vx, vcut, _CMP_GT_OQ), pone);
    __m256d lo = _mm256_and_pd(_mm256_cmp_pd(vx, vncut, _CMP_LT_OQ), mone);
    _mm256_storeu_pd(o + i, _mm256_or_pd(hi, lo));
  }
  for (; i < n; ++i) o[i] = x[i] > cut ? 1.0 : (x[i] < -cut ? -1.0 : 0.0);
}

void fixed_point(const double* x, double s, double lo, double hi, double* o, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s), vlo = _mm256_set1_pd(lo), vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d q = _mm256_round_pd(_mm256_mul_pd(_mm256_loadu_pd(x + i), vs),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    _mm256_storeu_pd(o + i, _mm256_div_pd(_mm256_min_pd(_mm256_max_pd(q, vlo), vhi), vs));
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
      const __m256d av = _mm256_set1_pd(arow[p]);
      const double* brow = b + p * n;
      std::int64_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(brow + j));
        _mm256_storeu_pd(crow + j, _mm256_add_pd(_mm256_loadu_pd(crow + j), prod));
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

// y[0..len) += v * w[0..len), the shared inner step of the conv kernels
inline void fused_axpy(double v, const double* w, double* y, int len) {
  const __m256d vv = _mm256_set1_pd(v);
  int i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d prod = _mm256_mul_pd(vv, _mm256_loadu_pd(w + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < len; ++i) y[i] += v * w[i];
}

// y[0..len) += a[0..len) * b[0..len)
inline void fused_madd(const double* a, const double* b, double* y, int len) {
  int i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
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
  // repack weights as [ky][kx][oc][ic] so the ic loop reads contiguously
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

} // namespace tqr::kernels::avx2

#endif // TQR_HAVE_AVX2_BACKEND
