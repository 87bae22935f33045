#include "ppds/kernels.hpp"

#if defined(PPDS_HAVE_NEON)

#include <arm_neon.h>

namespace ppds::kern::neon {

void add(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void scale(double* dst, const double* a, double c, std::size_t n) {
  const float64x2_t cv = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vmulq_f64(cv, vld1q_f64(a + i)));
  }
  for (; i < n; ++i) dst[i] = c * a[i];
}

// mul then add (no fused multiply-add) to match the scalar rounding
void axpy(double* dst, double c, const double* x, std::size_t n) {
  const float64x2_t cv = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t prod = vmulq_f64(cv, vld1q_f64(x + i));
    vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), prod));
  }
  for (; i < n; ++i) dst[i] = dst[i] + c * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  // acc01 carries block lanes 0,1 and acc23 lanes 2,3 so the reduction tree
  // (acc0+acc1)+(acc2+acc3) matches the scalar reference.
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    acc23 = vaddq_f64(acc23,
                      vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double total = (vgetq_lane_f64(acc01, 0) + vgetq_lane_f64(acc01, 1)) +
                 (vgetq_lane_f64(acc23, 0) + vgetq_lane_f64(acc23, 1));
  for (; i < n; ++i) total = total + x[i] * y[i];
  return total;
}

}  // namespace ppds::kern::neon

#endif  // PPDS_HAVE_NEON
