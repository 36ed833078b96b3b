#include "invreg/kernels.hpp"

namespace invreg::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, const double* x, double* out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void sub_scalar(const double* x, const double* y, double* out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

constexpr Table kScalar{Isa::scalar, dot_scalar, axpy_scalar, scale_scalar, sub_scalar};

}  // namespace

const Table& scalar_table() noexcept { return kScalar; }

}  // namespace invreg::kernels
