#include <doctest.h>

#include <cmath>
#include <vector>

#include "courtseq/kernels.hpp"
#include "courtseq/rng.hpp"

using namespace courtseq;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -3.0, double hi = 3.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// lengths around the 4-lane and 8-lane boundaries plus a large one
const std::size_t kLengths[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 257};

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(kern::backend_available(kern::Backend::Scalar));
  CHECK(kern::backend_ops(kern::Backend::Scalar) != nullptr);
}

TEST_CASE("scalar and avx2 elementwise kernels are bit-identical") {
  const kern::Ops* simd = kern::backend_ops(kern::Backend::Avx2);
  if (!simd) return;  // host without AVX2
  const kern::Ops& ref = *kern::backend_ops(kern::Backend::Scalar);
  Rng rng(99);
  for (const std::size_t n : kLengths) {
    const auto x = random_vec(rng, n);
    const auto g = random_vec(rng, n);

    SUBCASE("") {}  // keep doctest quiet about empty case
    {
      std::vector<double> a(n), b(n);
      ref.leaky_relu(n, 0.01, x.data(), a.data());
      simd->leaky_relu(n, 0.01, x.data(), b.data());
      CHECK(a == b);
      ref.leaky_relu_grad(n, 0.01, x.data(), g.data(), a.data());
      simd->leaky_relu_grad(n, 0.01, x.data(), g.data(), b.data());
      CHECK(a == b);
    }
    {
      std::vector<double> a(n), b(n);
      ref.tri_membership(n, 98.0, 94.0, 72.0, x.data(), a.data());
      simd->tri_membership(n, 98.0, 94.0, 72.0, x.data(), b.data());
      CHECK(a == b);
      const auto courtish = random_vec(rng, n, -20.0, 110.0);
      ref.tri_membership(n, 22.0, 0.0, -4.0, courtish.data(), a.data());
      simd->tri_membership(n, 22.0, 0.0, -4.0, courtish.data(), b.data());
      CHECK(a == b);
    }
    {
      std::vector<double> a = x, b = x;
      ref.axpy(n, 1.7, g.data(), a.data());
      simd->axpy(n, 1.7, g.data(), b.data());
      CHECK(a == b);
      ref.scale(n, -0.3, a.data());
      simd->scale(n, -0.3, b.data());
      CHECK(a == b);
    }
    {
      std::vector<double> pa = x, pb = x, ma(n, 0.1), mb(n, 0.1), va(n, 0.2), vb(n, 0.2);
      ref.adam_update(n, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001, g.data(), pa.data(), ma.data(),
                      va.data());
      simd->adam_update(n, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001, g.data(), pb.data(), mb.data(),
                        vb.data());
      CHECK(pa == pb);
      CHECK(ma == mb);
      CHECK(va == vb);
    }
    {
      // max is exact selection, so it must match bitwise too
      CHECK(ref.max_value(x.data(), n) == simd->max_value(x.data(), n));
    }
  }
}

TEST_CASE("scalar and avx2 reductions agree to tight relative tolerance") {
  const kern::Ops* simd = kern::backend_ops(kern::Backend::Avx2);
  if (!simd) return;
  const kern::Ops& ref = *kern::backend_ops(kern::Backend::Scalar);
  Rng rng(7);
  for (const std::size_t n : kLengths) {
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    const double d0 = ref.dot(a.data(), b.data(), n);
    const double d1 = simd->dot(a.data(), b.data(), n);
    CHECK(std::fabs(d0 - d1) <= 1e-12 * (1.0 + std::fabs(d0)));
    const double s0 = ref.sum(a.data(), n);
    const double s1 = simd->sum(a.data(), n);
    CHECK(std::fabs(s0 - s1) <= 1e-12 * (1.0 + std::fabs(s0)));
    const double q0 = ref.sq_l2(a.data(), b.data(), n);
    const double q1 = simd->sq_l2(a.data(), b.data(), n);
    CHECK(std::fabs(q0 - q1) <= 1e-12 * (1.0 + std::fabs(q0)));
  }
}

TEST_CASE("kernel semantics on known values") {
  const kern::Ops& K = *kern::backend_ops(kern::Backend::Scalar);
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, -5.0, 6.0};
  CHECK(K.dot(a, b, 3) == doctest::Approx(1 * 4 - 2 * 5 + 3 * 6));
  CHECK(K.sum(a, 3) == 6.0);
  CHECK(K.sq_l2(a, b, 3) == doctest::Approx(9.0 + 49.0 + 9.0));
  CHECK(K.max_value(b, 3) == 6.0);

  double y[] = {1.0, 1.0, 1.0};
  K.axpy(3, 2.0, a, y);
  CHECK(y[0] == 3.0);
  CHECK(y[2] == 7.0);

  double relu[3];
  const double z[] = {-2.0, 0.0, 2.0};
  K.leaky_relu(3, 0.1, z, relu);
  CHECK(relu[0] == doctest::Approx(-0.2));
  CHECK(relu[1] == 0.0);
  CHECK(relu[2] == 2.0);

  double gx[3];
  const double gy[] = {1.0, 1.0, 1.0};
  K.leaky_relu_grad(3, 0.1, z, gy, gx);
  CHECK(gx[0] == doctest::Approx(0.1));
  CHECK(gx[1] == doctest::Approx(0.1));  // derivative at 0 takes the slope
  CHECK(gx[2] == 1.0);
}

TEST_CASE("adam kernel: zero gradient leaves parameters untouched") {
  const kern::Ops& K = kern::ops();
  std::vector<double> p{1.0, -2.0, 0.5}, g(3, 0.0), m(3, 0.0), v(3, 0.0);
  const std::vector<double> before = p;
  K.adam_update(3, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001, g.data(), p.data(), m.data(), v.data());
  CHECK(p == before);
}
