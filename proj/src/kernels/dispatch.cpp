#include <atomic>
#include <cstdlib>
#include <string_view>

#include "invreg/kernels.hpp"

namespace invreg::kernels {

#ifdef INVREG_HAVE_AVX2
extern const Table kAvx2Table;
#endif

bool cpu_supports_avx2() noexcept {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* avx2_table() noexcept {
#ifdef INVREG_HAVE_AVX2
  static const bool ok = cpu_supports_avx2();
  return ok ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const Table* select_default() noexcept {
  const char* env = std::getenv("INVREG_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
  if (const Table* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const Table*>& current() noexcept {
  static std::atomic<const Table*> table{select_default()};
  return table;
}

}  // namespace

const Table& active() noexcept { return *current().load(std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

ScopedIsa::ScopedIsa(const Table& table) noexcept
    : previous_(current().exchange(&table)) {}

ScopedIsa::~ScopedIsa() { current().store(previous_); }

}  // namespace invreg::kernels
