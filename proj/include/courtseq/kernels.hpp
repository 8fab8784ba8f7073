#pragma once

#include <cstddef>
#include <string>

namespace courtseq::kern {

/// Data-parallel primitives behind the numeric hot loops (convolution taps,
/// fuzzy membership spans, optimizer updates, embedding distances). Each entry
/// has a scalar reference implementation and, on x86 hosts that support it, an
/// AVX2 variant selected at runtime. Elementwise kernels are bit-identical
/// across backends (both are built with FP contraction off); reduction kernels
/// may differ in the last ulps from summation order.
struct Ops {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sq_l2)(const double* a, const double* b, std::size_t n);
  double (*max_value)(const double* x, std::size_t n);  // n >= 1

  /// y[i] += a * x[i]
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  /// x[i] *= a
  void (*scale)(std::size_t n, double a, double* x);
  /// y[i] = x[i] > 0 ? x[i] : slope * x[i]
  void (*leaky_relu)(std::size_t n, double slope, const double* x, double* y);
  /// gx[i] = x[i] > 0 ? gy[i] : slope * gy[i]   (derivative at 0 takes slope)
  void (*leaky_relu_grad)(std::size_t n, double slope, const double* x, const double* gy,
                          double* gx);
  /// out[i] = max(min((x[i]-a)/(b-a), (c-x[i])/(c-b)), 0)
  void (*tri_membership)(std::size_t n, double a, double b, double c, const double* x,
                         double* out);
  /// Adam moment update + bias-corrected parameter step.
  /// m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g*g; p -= lr*(m/bc1)/(sqrt(v/bc2)+eps)
  void (*adam_update)(std::size_t n, double lr, double beta1, double beta2, double eps,
                      double bc1, double bc2, const double* g, double* p, double* m, double* v);
};

enum class Backend { Scalar, Avx2 };

/// Active kernel table. Picks the widest backend the CPU supports on first
/// use; the COURTSEQ_KERNELS env var ("scalar"/"avx2") forces a choice.
const Ops& ops();

Backend active_backend();
std::string backend_name(Backend b);
bool backend_available(Backend b);

/// Table for a specific backend, regardless of the active selection.
/// Returns nullptr when the backend is not compiled in / not supported here.
const Ops* backend_ops(Backend b);

/// Force the active backend (tests). Throws if unavailable.
void force_backend(Backend b);

}  // namespace courtseq::kern
