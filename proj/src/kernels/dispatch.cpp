#include "courtseq/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace courtseq::kern {

const Ops& scalar_table();
#if defined(COURTSEQ_BUILD_AVX2)
const Ops& avx2_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(COURTSEQ_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend pick_initial() {
  if (const char* env = std::getenv("COURTSEQ_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_has_avx2()) throw std::runtime_error("COURTSEQ_KERNELS=avx2: not supported here");
      return Backend::Avx2;
    }
    // anything else (including "auto") falls through to detection
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = pick_initial();

}  // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return cpu_has_avx2();
  }
  return false;
}

const Ops* backend_ops(Backend b) {
  switch (b) {
    case Backend::Scalar: return &scalar_table();
    case Backend::Avx2:
#if defined(COURTSEQ_BUILD_AVX2)
      if (cpu_has_avx2()) return &avx2_table();
#endif
      return nullptr;
  }
  return nullptr;
}

const Ops& ops() { return *backend_ops(g_backend); }

Backend active_backend() { return g_backend; }

std::string backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::runtime_error("kernel backend unavailable: " + backend_name(b));
  }
  g_backend = b;
}

}  // namespace courtseq::kern
