#include "tqr/kernels.hpp"

#include <cmath>

// Reference kernels. Loop nests are written so that each output element is
// accumulated in the same order the SIMD variants use (innermost dimension =
// the one the SIMD lanes cover); equivalence tests rely on that.

namespace tqr::kernels::scalar {

void add(const double* a, const double* b, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void clamp(const double* x, double lo, double hi, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = std::min(std::max(x[i], lo), hi);
}

void relu(const double* x, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = std::max(x[i], 0.0);
}

void relu_mask(const double* x, const double* u, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = x[i] > 0.0 ? u[i] : 0.0;
}

void ste_mask(const double* x, const double* u, double c, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = std::fabs(x[i]) <= c ? u[i] : 0.0;
}

void ste_mask_relu(const double* x, const double* u, double c, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = (x[i] >= 0.0 && x[i] <= c) ? u[i] : 0.0;
}

void sign_binary(const double* x, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = x[i] >= 0.0 ? 1.0 : -1.0;
}

void ternary_cut(const double* x, double cut, double* o, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) o[i] = x[i] > cut ? 1.0 : (x[i] < -cut ? -1.0 : 0.0);
}

void fixed_point(const double* x, double s, double lo, double hi, double* o, std::size_t n) {
  // round-half-to-even, matching the SIMD rounding instruction
  for (std::size_t i = 0; i < n; ++i) {
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
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void transpose(const double* a, double* at, std::int64_t r, std::int64_t c) {
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = 0; j < c; ++j) at[j * r + i] = a[i * c + j];
}

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
            for (int ic = 0; ic < s.in_c; ++ic) {
              const double xv = xp[ic];
              const double* wrow = wp + std::size_t(ic) * s.out_c;
              for (int oc = 0; oc < s.out_c; ++oc) yp[oc] += xv * wrow[oc];
            }
          }
        }
      }
}

void conv2d_igrad(const double* u, const double* w, double* gx, const ConvShape& s) {
  const int oh = s.out_h(), ow = s.out_w();
  const std::size_t total = std::size_t(s.batch) * s.in_h * s.in_w * s.in_c;
  for (std::size_t i = 0; i < total; ++i) gx[i] = 0.0;
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
            const double* wp = w + (std::size_t(ky) * s.k_w + kx) * s.in_c * s.out_c;
            for (int oc = 0; oc < s.out_c; ++oc) {
              const double uv = up[oc];
              for (int ic = 0; ic < s.in_c; ++ic) gp[ic] += uv * wp[std::size_t(ic) * s.out_c + oc];
            }
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
            for (int ic = 0; ic < s.in_c; ++ic) {
              const double xv = xp[ic];
              double* grow = gp + std::size_t(ic) * s.out_c;
              for (int oc = 0; oc < s.out_c; ++oc) grow[oc] += xv * up[oc];
            }
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
            for (int c = 0; c < s.in_c; ++c) yp[c] += xp[c] * wp[c];
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
            for (int c = 0; c < s.in_c; ++c) gp[c] += up[c] * wp[c];
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
            for (int c = 0; c < s.in_c; ++c) gp[c] += xp[c] * up[c];
          }
        }
      }
}

} // namespace tqr::kernels::scalar
