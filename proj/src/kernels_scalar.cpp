#include "ppds/kernels.hpp"

namespace ppds::kern::scalar {

void add(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void scale(double* dst, const double* a, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = c * a[i];
}

void axpy(double* dst, double c, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = dst[i] + c * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  // Blocked-by-4 accumulation; the SIMD variants reproduce this exact
  // operation tree, one accumulator per lane.
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = acc0 + x[i] * y[i];
    acc1 = acc1 + x[i + 1] * y[i + 1];
    acc2 = acc2 + x[i + 2] * y[i + 2];
    acc3 = acc3 + x[i + 3] * y[i + 3];
  }
  double total = (acc0 + acc1) + (acc2 + acc3);
  for (; i < n; ++i) total = total + x[i] * y[i];
  return total;
}

}  // namespace ppds::kern::scalar
