#include "ppds/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace ppds::kern {

namespace {

struct Vtable {
  void (*add)(double*, const double*, const double*, std::size_t);
  void (*sub)(double*, const double*, const double*, std::size_t);
  void (*scale)(double*, const double*, double, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
};

constexpr Vtable kScalar{scalar::add, scalar::sub, scalar::scale,
                         scalar::axpy, scalar::dot};

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(PPDS_HAVE_AVX2)
      return avx2::supported();
#else
      return false;
#endif
    case Backend::Neon:
#if defined(PPDS_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Vtable vtable_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return kScalar;
#if defined(PPDS_HAVE_AVX2)
    case Backend::Avx2:
      return Vtable{avx2::add, avx2::sub, avx2::scale, avx2::axpy, avx2::dot};
#endif
#if defined(PPDS_HAVE_NEON)
    case Backend::Neon:
      return Vtable{neon::add, neon::sub, neon::scale, neon::axpy, neon::dot};
#endif
    default:
      return kScalar;
  }
}

Backend detect() {
  if (const char* env = std::getenv("PPDS_KERNELS")) {
    const std::string s(env);
    if (s == "scalar") return Backend::Scalar;
    if (s == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
    if (s == "neon" && backend_available(Backend::Neon)) return Backend::Neon;
    // unknown or unavailable value: fall through to auto-detection
  }
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

struct State {
  Backend backend;
  Vtable vt;
  State() : backend(detect()), vt(vtable_for(backend)) {}
};

State& state() {
  static State s;  // resolved once, thread-safe
  return s;
}

}  // namespace

Backend active_backend() { return state().backend; }

std::string backend_name() {
  switch (active_backend()) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "scalar";
}

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::runtime_error("kernel backend not available on this CPU");
  }
  state().backend = b;
  state().vt = vtable_for(b);
}

void add(double* dst, const double* a, const double* b, std::size_t n) {
  state().vt.add(dst, a, b, n);
}
void sub(double* dst, const double* a, const double* b, std::size_t n) {
  state().vt.sub(dst, a, b, n);
}
void scale(double* dst, const double* a, double c, std::size_t n) {
  state().vt.scale(dst, a, c, n);
}
void axpy(double* dst, double c, const double* x, std::size_t n) {
  state().vt.axpy(dst, c, x, n);
}
double dot(const double* x, const double* y, std::size_t n) {
  return state().vt.dot(x, y, n);
}

}  // namespace ppds::kern
