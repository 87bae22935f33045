#pragma once

#include <cstddef>
#include <string>

// Low-level arithmetic kernels behind every dense operation. A scalar
// reference implementation always exists; AVX2 (x86-64) and NEON (aarch64)
// variants are selected at runtime when the CPU supports them. All variants
// are arithmetically identical: elementwise ops map one lane per element,
// and dot() uses a fixed blocked-by-4 summation tree, so results match the
// scalar reference bit for bit (the build disables FP contraction).
namespace ppds::kern {

enum class Backend { Scalar, Avx2, Neon };

/// Backend used by the dispatching entry points below. Detected once:
/// best available for the CPU unless the PPDS_KERNELS environment variable
/// ("scalar", "avx2", "neon") overrides it.
Backend active_backend();
std::string backend_name();

/// Force a backend (mainly for tests). Throws if unavailable on this CPU.
void set_backend(Backend b);

// dst = a + b, dst = a - b, dst = c*a, dst += c*x   (all length n)
void add(double* dst, const double* a, const double* b, std::size_t n);
void sub(double* dst, const double* a, const double* b, std::size_t n);
void scale(double* dst, const double* a, double c, std::size_t n);
void axpy(double* dst, double c, const double* x, std::size_t n);

/// Blocked dot product: four interleaved accumulators combined as
/// (acc0+acc1)+(acc2+acc3), then the tail added left to right.
double dot(const double* x, const double* y, std::size_t n);

namespace scalar {
void add(double* dst, const double* a, const double* b, std::size_t n);
void sub(double* dst, const double* a, const double* b, std::size_t n);
void scale(double* dst, const double* a, double c, std::size_t n);
void axpy(double* dst, double c, const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
}  // namespace scalar

#if defined(PPDS_HAVE_AVX2)
namespace avx2 {
bool supported();  // runtime CPUID check
void add(double* dst, const double* a, const double* b, std::size_t n);
void sub(double* dst, const double* a, const double* b, std::size_t n);
void scale(double* dst, const double* a, double c, std::size_t n);
void axpy(double* dst, double c, const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
}  // namespace avx2
#endif

#if defined(PPDS_HAVE_NEON)
namespace neon {
void add(double* dst, const double* a, const double* b, std::size_t n);
void sub(double* dst, const double* a, const double* b, std::size_t n);
void scale(double* dst, const double* a, double c, std::size_t n);
void axpy(double* dst, double c, const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
}  // namespace neon
#endif

}  // namespace ppds::kern
