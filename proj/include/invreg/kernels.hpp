#pragma once
// Inner-loop arithmetic kernels with scalar reference and SIMD variants.
//
// The active table is chosen once per process from CPU features; the
// INVREG_SIMD environment variable ("scalar" or "avx2") overrides the choice.
// Every variant must agree with the scalar reference to rounding error, which
// tests/test_kernels.cpp checks for all tail lengths.

#include <cstddef>
#include <span>
#include <string_view>

namespace invreg::kernels {

enum class Isa { scalar, avx2 };

struct Table {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n) noexcept;
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n) noexcept;
  // out[i] = alpha * x[i]
  void (*scale)(double alpha, const double* x, double* out, std::size_t n) noexcept;
  // out[i] = x[i] - y[i]
  void (*sub)(const double* x, const double* y, double* out, std::size_t n) noexcept;
};

const Table& scalar_table() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const Table* avx2_table() noexcept;

bool cpu_supports_avx2() noexcept;

const Table& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

// Overrides the active table for the lifetime of the guard. Not thread safe;
// meant for tests that compare full pipelines across variants.
class ScopedIsa {
 public:
  explicit ScopedIsa(const Table& table) noexcept;
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  const Table* previous_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace invreg::kernels
