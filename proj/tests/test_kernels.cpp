#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ppds/kernels.hpp"
#include "ppds/rng.hpp"

using namespace ppds;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() * std::exp(2.0 * rng.uniform() - 1.0);
  return v;
}

}  // namespace

TEST_CASE("active backend reports a name") {
  CHECK(!kern::backend_name().empty());
}

#if defined(PPDS_HAVE_AVX2)
TEST_CASE("avx2 kernels match the scalar reference bit for bit") {
  if (!kern::avx2::supported()) return;
  Rng rng(7);
  // sizes straddling the vector width, including tails and tiny inputs
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 33u, 67u, 256u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    const double c = rng.normal();

    std::vector<double> ds(n), dv(n);
    kern::scalar::add(ds.data(), a.data(), b.data(), n);
    kern::avx2::add(dv.data(), a.data(), b.data(), n);
    CHECK(ds == dv);

    kern::scalar::sub(ds.data(), a.data(), b.data(), n);
    kern::avx2::sub(dv.data(), a.data(), b.data(), n);
    CHECK(ds == dv);

    kern::scalar::scale(ds.data(), a.data(), c, n);
    kern::avx2::scale(dv.data(), a.data(), c, n);
    CHECK(ds == dv);

    ds = b;
    dv = b;
    kern::scalar::axpy(ds.data(), c, a.data(), n);
    kern::avx2::axpy(dv.data(), c, a.data(), n);
    CHECK(ds == dv);

    const double s = kern::scalar::dot(a.data(), b.data(), n);
    const double v = kern::avx2::dot(a.data(), b.data(), n);
    CHECK(s == v);
  }
}
#endif

#if defined(PPDS_HAVE_NEON)
TEST_CASE("neon kernels match the scalar reference bit for bit") {
  Rng rng(7);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 15u, 33u, 67u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    const double c = rng.normal();
    std::vector<double> ds(n), dv(n);
    kern::scalar::axpy(ds.data(), c, a.data(), n);  // exercise all lanes via axpy+dot
    kern::neon::axpy(dv.data(), c, a.data(), n);
    CHECK(ds == dv);
    CHECK(kern::scalar::dot(a.data(), b.data(), n) ==
          kern::neon::dot(a.data(), b.data(), n));
  }
}
#endif

TEST_CASE("blocked dot agrees with a plain left-to-right sum") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + rng.uniform_int(300);
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    double naive = 0.0, magnitude = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      naive += a[i] * b[i];
      magnitude += std::fabs(a[i] * b[i]);
    }
    CHECK(std::fabs(kern::dot(a.data(), b.data(), n) - naive) <=
          1e-13 * (1.0 + magnitude));
  }
}

TEST_CASE("set_backend switches the dispatch table") {
  const kern::Backend original = kern::active_backend();
  kern::set_backend(kern::Backend::Scalar);
  CHECK(kern::backend_name() == "scalar");
  const double xs[4] = {1.0, 2.0, 3.0, 4.0};
  CHECK(kern::dot(xs, xs, 4) == (1.0 + 4.0) + (9.0 + 16.0));
  kern::set_backend(original);
}
