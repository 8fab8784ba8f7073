// Scalar reference kernels. These define the semantics; the SIMD variants are
// equivalence-tested against them. This translation unit is compiled with
// -ffp-contract=off so no mul+add pair fuses into an FMA, keeping elementwise
// results bit-identical across backends.

#include "courtseq/kernels.hpp"

#include <cmath>

namespace courtseq::kern {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sq_l2_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double max_value_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] > m) m = x[i];
  }
  return m;
}

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(std::size_t n, double a, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void leaky_relu_scalar(std::size_t n, double slope, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_grad_scalar(std::size_t n, double slope, const double* x, const double* gy,
                            double* gx) {
  for (std::size_t i = 0; i < n; ++i) gx[i] = x[i] > 0.0 ? gy[i] : slope * gy[i];
}

void tri_membership_scalar(std::size_t n, double a, double b, double c, const double* x,
                           double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double rise = (x[i] - a) / (b - a);
    const double fall = (c - x[i]) / (c - b);
    const double m = rise < fall ? rise : fall;
    out[i] = m > 0.0 ? m : 0.0;
  }
}

void adam_update_scalar(std::size_t n, double lr, double beta1, double beta2, double eps,
                        double bc1, double bc2, const double* g, double* p, double* m,
                        double* v) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Ops& scalar_table() {
  static const Ops t = {
      dot_scalar,        sum_scalar,
      sq_l2_scalar,      max_value_scalar,
      axpy_scalar,       scale_scalar,
      leaky_relu_scalar, leaky_relu_grad_scalar,
      tri_membership_scalar, adam_update_scalar,
  };
  return t;
}

}  // namespace courtseq::kern
